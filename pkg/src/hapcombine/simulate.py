"""Synthetic truth, phasing-error noise models, and brute-force reference solvers.

The noise models mimic how phasing tools actually fail: ``switch`` noise
flips phase between consecutive heterozygous markers (the dominant error
mode of real tools), ``allele`` noise flips the phase of single
heterozygous markers.  Both preserve genotype consistency by
construction.

The brute-force solvers here are deliberately simple reference
implementations, used as oracles by the test suite and usable for
small-instance verification; they never share code with the production
solvers they check.
"""

from dataclasses import dataclass

import numpy as np

from .combine import EXACT_BY_ENUMERATION, CombineResult
from .core import (
    HET,
    HOM0,
    HOM1,
    Ensemble,
    Genotype,
    HaplotypePair,
    TooLargeError,
    build_ensemble,
    het_positions,
    to_switch_sequence,
)
from .distance import HAMMING, SWITCH, DistanceSpec

BRUTE_MPRIME_MAX = 20
BRUTE_L_MAX = 20


@dataclass(frozen=True)
class NoiseSpec:
    """Per-site phasing error model: kind ``switch`` or ``allele``, rate ``p``."""

    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in ("switch", "allele"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise rate must be in [0, 1], got {self.p}")

    @classmethod
    def parse(cls, text: str) -> "NoiseSpec":
        """Parse ``"switch:0.1"`` or ``"allele:0.05"``."""
        kind, sep, rate = text.partition(":")
        if not sep:
            raise ValueError(f"expected KIND:RATE, got {text!r}")
        return cls(kind, float(rate))


@dataclass(frozen=True)
class SimConfig:
    """Marker count, target het fraction, ensemble size, and master seed."""

    m: int
    het_fraction: float = 0.322
    l: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one marker")
        if self.l < 1:
            raise ValueError("need at least one ensemble member")
        if not 0.0 <= self.het_fraction <= 1.0:
            raise ValueError("het_fraction must be in [0, 1]")


def gen_truth(cfg: SimConfig, rng: np.random.Generator, individual_id: str = "sim"):
    """Draw a genotype and a uniformly random consistent truth pair.

    Each marker is heterozygous with probability ``het_fraction`` and
    otherwise homozygous for a uniform allele; no missing calls are
    produced.
    """
    hets = rng.random(cfg.m) < cfg.het_fraction
    hom_allele = rng.integers(0, 2, cfg.m, dtype=np.int8)
    calls = np.where(hets, HET, np.where(hom_allele == 0, HOM0, HOM1)).astype(np.int8)
    g = Genotype(individual_id, calls)
    h1 = np.zeros(cfg.m, dtype=np.uint8)
    h1[calls == HOM1] = 1
    h1[hets] = rng.integers(0, 2, int(hets.sum()), dtype=np.uint8)
    h2 = h1.copy()
    h2[hets] ^= 1
    return g, HaplotypePair(h1, h2)


def perturb(
    p: HaplotypePair, g: Genotype, noise: NoiseSpec, rng: np.random.Generator
) -> HaplotypePair:
    """Apply one noisy reconstruction of ``p``; the result stays consistent with ``g``.

    ``switch`` noise flips each switch-sequence bit independently with
    probability ``noise.p`` and re-anchors at the original first het
    allele; ``allele`` noise independently flips the phase of each
    heterozygous marker (both alleles swap there), leaving homozygous
    markers untouched.
    """
    idx = het_positions(g)
    z = idx.zero_based
    mp = idx.m_prime
    if noise.kind == "switch":
        if mp <= 1:
            return p
        s = to_switch_sequence(p, idx)
        flips = (rng.random(mp - 1) < noise.p).astype(np.uint8)
        bits = s.bits ^ flips
        alleles = np.empty(mp, dtype=np.uint8)
        alleles[0] = p.h1[z[0]]
        alleles[1:] = np.bitwise_xor.accumulate(bits) ^ alleles[0]
    else:
        if mp == 0:
            return p
        alleles = p.h1[z] ^ (rng.random(mp) < noise.p).astype(np.uint8)
    h1 = np.asarray(p.h1).copy()
    h2 = np.asarray(p.h2).copy()
    h1[z] = alleles
    h2[z] = alleles ^ 1
    return HaplotypePair(h1, h2)


def simulate_individual(
    cfg: SimConfig, noise: NoiseSpec, rng: np.random.Generator, individual_id: str = "sim"
):
    """Generate ``(genotype, truth pair, list of l noisy member pairs)``."""
    g, truth = gen_truth(cfg, rng, individual_id)
    members = [perturb(truth, g, noise, rng) for _ in range(cfg.l)]
    return g, truth, members


# ---------------------------------------------------------------------------
# brute-force reference solvers


def candidate_scores(e: Ensemble, spec: DistanceSpec) -> np.ndarray:
    """Objective value of every canonical candidate pair, by direct definition.

    Candidate i (0 <= i < 2^(m'-1)) is the pair whose first haplotype
    carries the big-endian bits of i at the active heterozygous markers
    (leading bit fixed to 0).  Scores are computed straight from the
    distance definitions, independently of the production solvers.
    """
    M = e.het_matrix
    l, mp = M.shape
    if mp > BRUTE_MPRIME_MAX:
        raise TooLargeError(f"exhaustive scoring needs m' <= {BRUTE_MPRIME_MAX}, got {mp}")
    n_cand = 1 << max(mp - 1, 0)
    cands = np.arange(n_cand, dtype=np.uint64)
    powers = (1 << np.arange(mp - 1, -1, -1)).astype(np.uint64)
    member_ints = (M.astype(np.uint64) @ powers) if mp else np.zeros(l, dtype=np.uint64)
    scores = np.zeros(n_cand, dtype=np.int64)
    if spec.kind == SWITCH:
        if mp >= 2:
            smask = np.uint64((1 << (mp - 1)) - 1)
            cand_sw = (cands ^ (cands >> np.uint64(1))) & smask
            for v in member_ints:
                msw = (v ^ (v >> np.uint64(1))) & smask
                scores += np.bitwise_count(cand_sw ^ msw).astype(np.int64)
    elif spec.kind == HAMMING:
        for v in member_ints:
            t = np.bitwise_count(cands ^ v).astype(np.int64)
            scores += 2 * np.minimum(t, mp - t)
    else:
        k = spec.k
        if mp < k:
            for v in member_ints:
                t = np.bitwise_count(cands ^ v).astype(np.int64)
                scores += 2 * np.minimum(t, mp - t)
        else:
            kmask = np.uint64((1 << k) - 1)
            for v in member_ints:
                x = cands ^ v
                for j in range(mp - k + 1):
                    t = np.bitwise_count((x >> np.uint64(mp - k - j)) & kmask).astype(np.int64)
                    scores += 2 * np.minimum(t, k - t)
    return scores


def _bits_of(i: int, mp: int) -> np.ndarray:
    return np.array([(i >> (mp - 1 - j)) & 1 for j in range(mp)], dtype=np.uint8)


def brute_force_hvp(e: Ensemble, spec: DistanceSpec) -> CombineResult:
    """Exact voting optimum by enumerating all 2^(m'-1) consistent pairs.

    Returns the lexicographic representative of the optimum set together
    with its exact tie count.  Guarded to m' <= 20.
    """
    scores = candidate_scores(e, spec)
    best = int(scores.min())
    opt = scores == best
    pick = int(np.argmax(opt))
    bits = _bits_of(pick, e.m_prime)
    return CombineResult(
        e.expand(bits), best, int(opt.sum()), "brute_hvp", EXACT_BY_ENUMERATION
    )


def brute_force_orderings(e: Ensemble) -> CombineResult:
    """Exact Hamming voting optimum by trying all 2^(l-1) member orderings.

    Every ordering is voted from scratch (no incremental updates) and the
    vote's objective is evaluated by the pair-Hamming definition; this is
    the reference the Gray-code sweep is checked against.  Guarded to
    l <= 20.
    """
    M = e.het_matrix
    l, mp = M.shape
    if l > BRUTE_L_MAX:
        raise TooLargeError(f"ordering enumeration needs l <= {BRUTE_L_MAX}, got {l}")
    if mp == 0:
        return CombineResult(e.expand(np.zeros(0, np.uint8)), 0, 1, "brute_orderings", EXACT_BY_ENUMERATION)
    best_score = None
    optima = {}
    for code in range(1 << (l - 1)):
        flips = np.array([0] + [(code >> i) & 1 for i in range(l - 1)], dtype=np.uint8)
        oriented = M ^ flips[:, None]
        votes = (2 * oriented.sum(axis=0, dtype=np.int64) > l).astype(np.uint8)
        t = (M != votes).sum(axis=1, dtype=np.int64)
        score = int((2 * np.minimum(t, mp - t)).sum())
        if best_score is None or score < best_score:
            best_score = score
            optima = {}
        if score == best_score:
            key = votes.tobytes() if not votes[0] else (votes ^ 1).tobytes()
            optima.setdefault(key, np.frombuffer(key, dtype=np.uint8))
    bits = min(optima.values(), key=lambda b: b.tobytes())
    return CombineResult(
        e.expand(bits), best_score, len(optima), "brute_orderings", EXACT_BY_ENUMERATION
    )


def random_ensemble(
    rng: np.random.Generator,
    m_max: int = 14,
    l_choices=(1, 2, 3, 4, 5, 6),
    mprime_max: int = 12,
    individual_id: str = "rand",
) -> Ensemble:
    """Uniformly random valid ensemble for randomized cross-checking.

    The genotype has m <= m_max markers with at most ``mprime_max``
    heterozygous ones; members are drawn uniformly from the consistent
    pairs, which makes for adversarial (non-clustered) instances.
    """
    m = int(rng.integers(1, m_max + 1))
    calls = np.where(
        rng.random(m) < 0.5, HET, np.where(rng.random(m) < 0.5, HOM0, HOM1)
    ).astype(np.int8)
    hets = np.flatnonzero(calls == HET)
    if hets.size > mprime_max:
        drop = rng.choice(hets, hets.size - mprime_max, replace=False)
        calls[drop] = np.where(rng.random(drop.size) < 0.5, HOM0, HOM1)
    g = Genotype(individual_id, calls)
    z = np.flatnonzero(calls == HET)
    l = int(rng.choice(l_choices))
    members = []
    for _ in range(l):
        h1 = np.zeros(m, dtype=np.uint8)
        h1[calls == HOM1] = 1
        h1[z] = rng.integers(0, 2, z.size, dtype=np.uint8)
        h2 = h1.copy()
        h2[z] ^= 1
        members.append(HaplotypePair(h1, h2))
    return build_ensemble(members, genotype=g)
