"""Consensus solvers: selection (best member) and voting (best consistent pair).

Selection evaluates every member against the rest and keeps the one with
the smallest distance sum.  Voting searches the full space of
genotype-consistent pairs:

* switch distance: positionwise majority over the members' switch
  sequences, exact in O(lm);
* windowed (k-Hamming) distance: dynamic program over the 2^k unordered
  window patterns, exact in O(lm + 2^k k l (m'-k));
* pair-Hamming distance: exact by enumerating the 2^(m'-1) candidate
  pairs, or the 2^(l-1) member orderings with a Gray-code sweep that
  updates vote tallies one member flip at a time; past both limits, an
  induced-ordering heuristic whose optimality can often be certified
  after the fact.

Every solver reports a tie count and breaks ties by a deterministic
policy (lexicographic by default) so reruns and member permutations give
reproducible output.
"""

import random as pyrandom
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import (
    EmptyEnsembleError,
    Ensemble,
    HaplotypePair,
    LengthMismatchError,
    TooLargeError,
    as_bits,
)
from .distance import HAMMING, KHAMMING, SWITCH, DistanceSpec, InvalidKError

EXACT_BY_CONSTRUCTION = "exact_by_construction"
EXACT_BY_ENUMERATION = "exact_by_enumeration"
CERTIFIED_OPTIMAL = "certified_optimal"
HEURISTIC = "heuristic"

_ENUM_HARD_LIMIT = 32  # 2^(m'-1) candidates; past this, enumeration is hopeless
_GRAY_HARD_LIMIT = 32  # 2^(l-1) orderings


@dataclass(frozen=True)
class TiePolicy:
    """How a solver picks among equally good solutions.

    ``lex`` returns the pair whose canonical first haplotype is
    lexicographically smallest, ``first`` the first optimum in the
    solver's natural enumeration order, and ``random`` a uniform draw
    from a per-individual stream derived from ``(seed, individual_index)``
    so reruns are reproducible.
    """

    rule: str = "lex"
    seed: int = 0

    def __post_init__(self):
        if self.rule not in ("lex", "first", "random"):
            raise ValueError(f"unknown tie rule {self.rule!r}")

    def rng(self, individual_index: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, individual_index])


@dataclass(frozen=True)
class SolverLimits:
    """Work bounds for the exact Hamming-voting paths (~2^20 evaluations each)."""

    l_max: int = 20
    mprime_max: int = 20


@dataclass(frozen=True, eq=False)
class OrderingVector:
    """Per-member orientation bits; a vector and its complement are equivalent."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits, "ordering bits"))

    def canonical(self):
        if self.bits.size and self.bits[0]:
            return OrderingVector(self.bits ^ 1)
        return self

    def __len__(self):
        return int(self.bits.size)

    def __eq__(self, other):
        if not isinstance(other, OrderingVector):
            return NotImplemented
        return np.array_equal(self.canonical().bits, other.canonical().bits)

    def __hash__(self):
        return hash(self.canonical().bits.tobytes())


@dataclass(frozen=True, eq=False)
class CombineResult:
    """A chosen pair with its objective value and solver provenance.

    ``score`` is the sum of distances from the members to ``pair`` under
    the solver's distance.  ``tie_count`` is the number of equally good
    solutions the solver identified (exact for the enumeration solvers,
    the switch vote, and the window DP; for the Gray sweep it is exact
    when l is odd and a lower bound otherwise; the induced-ordering
    heuristic counts the tied-position variants of its own vote).
    """

    pair: HaplotypePair
    score: int
    tie_count: int
    solver: str
    certificate: str


def _int_from_bits(bits: np.ndarray) -> int:
    if bits.size == 0:
        return 0
    packed = np.packbits(bits)
    return int.from_bytes(packed.tobytes(), "big") >> ((-bits.size) % 8)


def _bits_from_int(v: int, mp: int) -> np.ndarray:
    if mp == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.frombuffer(int(v << ((-mp) % 8)).to_bytes((mp + 7) // 8, "big"), dtype=np.uint8)
    return np.unpackbits(raw)[:mp].copy()


def _pack_rows(M: np.ndarray) -> list:
    return [_int_from_bits(row) for row in M]


def _degenerate(e: Ensemble, solver: str) -> CombineResult:
    # m' <= 1: every consistent pair is the same unordered pair, all
    # distances are zero.
    pair = e.expand(np.zeros(e.m_prime, dtype=np.uint8))
    return CombineResult(pair, 0, 1, solver, EXACT_BY_CONSTRUCTION)


# ---------------------------------------------------------------------------
# selection


def _pairwise_het_matrix(M: np.ndarray, spec: DistanceSpec) -> np.ndarray:
    """All member-vs-member distances from the het projections."""
    l, mp = M.shape
    if spec.kind == SWITCH:
        if mp <= 1:
            return np.zeros((l, l), dtype=np.int64)
        S = M[:, 1:] ^ M[:, :-1]
        return (S[:, None, :] != S[None, :, :]).sum(axis=2, dtype=np.int64)
    if spec.kind == HAMMING or mp < spec.k:
        t = (M[:, None, :] != M[None, :, :]).sum(axis=2, dtype=np.int64)
        return 2 * np.minimum(t, mp - t)
    k = spec.k
    diff = (M[:, None, :] != M[None, :, :]).astype(np.int64)
    csum = np.concatenate([np.zeros((l, l, 1), dtype=np.int64), diff.cumsum(axis=2)], axis=2)
    t = csum[:, :, k:] - csum[:, :, :-k]
    return (2 * np.minimum(t, k - t)).sum(axis=2)


def select_hsp(
    e: Ensemble,
    spec: DistanceSpec,
    ties: TiePolicy = TiePolicy(),
    individual_index: int = 0,
) -> CombineResult:
    """Return the member minimizing the sum of distances to all members.

    Evaluates the full member-by-member distance matrix, so the cost is
    roughly l^2 distance computations.  Remaining ties under the ``lex``
    rule are broken by the lowest member index.
    """
    if e.l < 1:
        raise EmptyEnsembleError("selection needs at least one reconstruction")
    D = _pairwise_het_matrix(e.het_matrix, spec)
    sums = D.sum(axis=1)
    best = int(sums.min())
    winners = np.flatnonzero(sums == best)
    if ties.rule == "first":
        pick = int(winners[0])
    elif ties.rule == "random":
        pick = int(ties.rng(individual_index).choice(winners))
    else:
        pick = int(min(winners, key=lambda i: (e.members[i].canonical()[0].tobytes(), i)))
    return CombineResult(e.members[pick], best, int(winners.size), "hsp", EXACT_BY_ENUMERATION)


# ---------------------------------------------------------------------------
# switch voting


def vote_switch(
    e: Ensemble, ties: TiePolicy = TiePolicy(), individual_index: int = 0
) -> CombineResult:
    """Exact voting optimum for the switch distance via positionwise majority.

    The output's switch sequence takes the majority bit at each of the
    m'-1 positions; positions split exactly in half are free, giving
    ``2^(number of tied positions)`` optima.  Runs in O(lm').
    """
    M = e.het_matrix
    l, mp = M.shape
    if mp <= 1:
        return _degenerate(e, "switch_vote")
    S = M[:, 1:] ^ M[:, :-1]
    ones = S.sum(axis=0, dtype=np.int64)
    score = int(np.minimum(ones, l - ones).sum())
    s = (2 * ones > l).astype(np.uint8)
    tied = 2 * ones == l
    n_tied = int(tied.sum())
    if n_tied:
        if ties.rule == "first":
            s[tied] = 0
        elif ties.rule == "random":
            s[tied] = ties.rng(individual_index).integers(0, 2, n_tied, dtype=np.uint8)
        else:
            # keep the next allele 0 whenever the switch bit is free, so the
            # anchored allele vector is lexicographically smallest
            a = 0
            for j in range(mp - 1):
                if tied[j]:
                    s[j] = a
                    a = 0
                else:
                    a ^= s[j]
    alleles = np.zeros(mp, dtype=np.uint8)
    alleles[1:] = np.bitwise_xor.accumulate(s)
    return CombineResult(
        e.expand(alleles), score, 1 << n_tied, "switch_vote", EXACT_BY_CONSTRUCTION
    )


# ---------------------------------------------------------------------------
# windowed-Hamming voting (dynamic program over window patterns)


@dataclass(frozen=True, eq=False)
class DPTable:
    """Per-window pattern costs and accumulated tables for the window DP.

    ``window_costs[j, p]`` is the summed member cost of placing pattern
    ``p`` (k allele bits, complement-equivalent) at window j.
    ``forward[j, p]`` accumulates windows 1..j ending in ``p``;
    ``suffix[j, p]`` accumulates windows j..W starting at ``p``.
    Consecutive windows must agree on their k-1 overlapping markers.
    """

    k: int
    window_costs: np.ndarray
    forward: np.ndarray
    suffix: np.ndarray

    @property
    def n_windows(self) -> int:
        return int(self.window_costs.shape[0])

    def optimum(self) -> int:
        return int(self.suffix[0].min())


def khamming_dp_tables(M: np.ndarray, k: int) -> DPTable:
    """Build the window-pattern DP tables for the het projection matrix."""
    l, mp = M.shape
    if not 2 <= k <= mp:
        raise InvalidKError(f"window length {k} not in [2, {mp}]")
    W = mp - k + 1
    n = 1 << k
    powers = (1 << np.arange(k - 1, -1, -1)).astype(np.uint64)
    win = sliding_window_view(M, k, axis=1).astype(np.uint64) @ powers
    pats = np.arange(n, dtype=np.uint64)
    D = np.empty((W, n), dtype=np.int64)
    for j in range(W):
        pc = np.bitwise_count(win[:, j][:, None] ^ pats[None, :]).astype(np.int64)
        D[j] = (2 * np.minimum(pc, k - pc)).sum(axis=0)
    pi = np.arange(n)
    succ0 = (pi << 1) & (n - 1)
    succ1 = succ0 | 1
    pred0 = pi >> 1
    pred1 = pred0 | (1 << (k - 1))
    T = np.empty_like(D)
    T[0] = D[0]
    for j in range(1, W):
        T[j] = D[j] + np.minimum(T[j - 1][pred0], T[j - 1][pred1])
    S = np.empty_like(D)
    S[W - 1] = D[W - 1]
    for j in range(W - 2, -1, -1):
        S[j] = D[j] + np.minimum(S[j + 1][succ0], S[j + 1][succ1])
    return DPTable(k, D, T, S)


def _dp_path_counts(dp: DPTable) -> list:
    """counts[j][p] = number of optimal completions of windows j..W from pattern p."""
    W, n = dp.window_costs.shape
    levels = [None] * W
    levels[W - 1] = [1] * n
    for j in range(W - 2, -1, -1):
        S_here = dp.suffix[j]
        S_next = dp.suffix[j + 1]
        D_here = dp.window_costs[j]
        nxt = levels[j + 1]
        cur = [0] * n
        for p in range(n):
            target = int(S_here[p]) - int(D_here[p])
            q0 = (p << 1) & (n - 1)
            q1 = q0 | 1
            c = 0
            if int(S_next[q0]) == target:
                c += nxt[q0]
            if int(S_next[q1]) == target:
                c += nxt[q1]
            cur[p] = c
        levels[j] = cur
    return levels


def vote_k_hamming(
    e: Ensemble,
    k: int,
    ties: TiePolicy = TiePolicy(),
    limits: SolverLimits = SolverLimits(),
    individual_index: int = 0,
) -> CombineResult:
    """Exact voting optimum for the windowed Hamming distance.

    Solves the chain of overlapping k-marker windows by dynamic
    programming over the 2^k window patterns; with fewer than k
    heterozygous markers the distance degenerates to plain pair-Hamming
    and the call is delegated to :func:`vote_hamming`.
    """
    if k < 2:
        raise InvalidKError(f"window length must be >= 2, got {k}")
    M = e.het_matrix
    l, mp = M.shape
    if mp <= 1:
        return _degenerate(e, "khamming_dp")
    if mp < k:
        return vote_hamming(e, ties, limits, individual_index)
    dp = khamming_dp_tables(M, k)
    n = 1 << k
    half = n >> 1
    W = dp.n_windows
    S0 = dp.suffix[0]
    opt = int(S0[:half].min())
    counts = _dp_path_counts(dp)
    starts = [p for p in range(half) if int(S0[p]) == opt]
    tie_count = sum(counts[0][p] for p in starts)

    def walk(p0, chooser):
        bits = list(_bits_from_int(p0, k))
        p = p0
        for j in range(1, W):
            target = int(dp.suffix[j - 1][p]) - int(dp.window_costs[j - 1][p])
            q0 = (p << 1) & (n - 1)
            q1 = q0 | 1
            ok0 = int(dp.suffix[j][q0]) == target
            ok1 = int(dp.suffix[j][q1]) == target
            b = chooser(j, q0, q1, ok0, ok1)
            bits.append(b)
            p = q1 if b else q0
        return np.array(bits, dtype=np.uint8)

    if ties.rule == "random" and tie_count > 1:
        r = pyrandom.Random(int(ties.rng(individual_index).integers(1 << 62)))
        x = r.randrange(tie_count)
        p0 = starts[-1]
        for p in starts:
            c = counts[0][p]
            if x < c:
                p0 = p
                break
            x -= c

        def chooser(j, q0, q1, ok0, ok1):
            nonlocal x
            c0 = counts[j][q0] if ok0 else 0
            if x < c0:
                return 0
            x -= c0
            return 1

        bits = walk(p0, chooser)
    else:
        # first and lex coincide here: the smallest admissible pattern,
        # then always the 0 bit when it stays optimal
        p0 = starts[0]
        bits = walk(p0, lambda j, q0, q1, ok0, ok1: 0 if ok0 else 1)

    return CombineResult(
        e.expand(bits), opt, tie_count, "khamming_dp", EXACT_BY_CONSTRUCTION
    )


# ---------------------------------------------------------------------------
# Hamming voting


def hamming_vote_given_ordering(e: Ensemble, o) -> HaplotypePair:
    """Positionwise majority vote after orienting every member by ``o``.

    With the members oriented, the best first haplotype takes the
    majority allele at each marker and the second haplotype is its
    complement at heterozygous markers; positionwise ties (even l)
    resolve toward allele 0 on the oriented first haplotype.  O(lm).
    """
    M = e.het_matrix
    l, mp = M.shape
    ob = o.bits if isinstance(o, OrderingVector) else as_bits(o, "ordering bits")
    if ob.size != l:
        raise LengthMismatchError(f"ordering length {ob.size} does not match l={l}")
    cnt = (M ^ ob[:, None]).sum(axis=0, dtype=np.int64)
    bits = (2 * cnt > l).astype(np.uint8)
    return e.expand(bits)


def certify_induced_ordering(e: Ensemble, result: HaplotypePair) -> bool:
    """Check a voted pair's optimality for Hamming voting after the fact.

    Let t_i be each member's oriented mismatch count against ``result``
    on the m' active heterozygous markers (t_i = min over the two
    orientations).  The certificate holds iff

    * every member is strictly within m'/2 pair-Hamming of the result
      (4 t_i < m'), which pins every member's orientation, and
    * sum(t_i) <= m' - 2 max(t_i), which rules out every alternative
      orientation assignment: flipping any member subset costs at least
      m' - 2 max(t_i) while the induced ordering pays sum(t_i).

    True implies the result attains the exact voting optimum.  The radius
    condition alone does not: with an even number of members a vote with
    tied positions can pass it yet be beaten by another orientation
    assignment.
    """
    M = e.het_matrix
    l, mp = M.shape
    if mp == 0:
        return True
    r = result.h1[e.het_index.zero_based]
    traw = (M != r).sum(axis=1, dtype=np.int64)
    t = np.minimum(traw, mp - traw)
    if not bool(np.all(4 * t < mp)):
        return False
    return bool(int(t.sum()) + 2 * int(t.max()) <= mp)


def vote_hamming_enumerate(
    e: Ensemble, ties: TiePolicy = TiePolicy(), individual_index: int = 0
) -> CombineResult:
    """Exact Hamming voting by scoring all 2^(m'-1) candidate pairs."""
    M = e.het_matrix
    l, mp = M.shape
    if mp <= 1:
        return _degenerate(e, "hamming_enum")
    if mp > _ENUM_HARD_LIMIT:
        raise TooLargeError(f"candidate enumeration needs m' <= {_ENUM_HARD_LIMIT}, got {mp}")
    cands = np.arange(1 << (mp - 1), dtype=np.uint64)
    scores = np.zeros(cands.size, dtype=np.int64)
    for v in _pack_rows(M):
        pc = np.bitwise_count(cands ^ np.uint64(v)).astype(np.int64)
        scores += 2 * np.minimum(pc, mp - pc)
    best = int(scores.min())
    opt = scores == best
    tie_count = int(opt.sum())
    if ties.rule == "random" and tie_count > 1:
        pick = int(ties.rng(individual_index).choice(np.flatnonzero(opt)))
    else:
        # ascending candidate order is lexicographic on the allele vector,
        # so the first optimum is also the lex rule's choice
        pick = int(np.argmax(opt))
    bits = _bits_from_int(int(cands[pick]), mp)
    return CombineResult(e.expand(bits), best, tie_count, "hamming_enum", EXACT_BY_ENUMERATION)


def vote_hamming_gray(
    e: Ensemble, ties: TiePolicy = TiePolicy(), individual_index: int = 0
) -> CombineResult:
    """Exact Hamming voting by sweeping the 2^(l-1) member orderings.

    Orderings are visited in Gray-code order so each step reorients a
    single member and updates the per-marker vote tallies incrementally;
    an ordering's cost is the tally's minority sum, whose minimum over
    the sweep equals the voting optimum.
    """
    M = e.het_matrix
    l, mp = M.shape
    if mp <= 1:
        return _degenerate(e, "hamming_gray")
    if l > _GRAY_HARD_LIMIT:
        raise TooLargeError(f"ordering sweep needs l <= {_GRAY_HARD_LIMIT}, got {l}")
    Mi = M.astype(np.int64)
    deltas = 1 - 2 * Mi
    cnt = Mi.sum(axis=0)
    flipped = np.zeros(l, dtype=bool)
    full = (1 << mp) - 1

    best = None
    optima: dict[int, None] = {}

    def consider():
        nonlocal best
        score = int((2 * np.minimum(cnt, l - cnt)).sum())
        if best is None or score < best:
            best = score
            optima.clear()
        elif score > best:
            return
        v = _int_from_bits((2 * cnt > l).astype(np.uint8))
        if v >> (mp - 1):
            v ^= full
        optima.setdefault(v)

    consider()
    for step in range(1, 1 << (l - 1)):
        i = (step & -step).bit_length()  # member 1..l-1 flips; member 0 stays fixed
        cnt += deltas[i] if not flipped[i] else -deltas[i]
        flipped[i] = ~flipped[i]
        consider()

    keys = list(optima)
    if ties.rule == "first":
        choice = keys[0]
    elif ties.rule == "random" and len(keys) > 1:
        keys.sort()
        choice = keys[int(ties.rng(individual_index).integers(len(keys)))]
    else:
        choice = min(keys)
    bits = _bits_from_int(choice, mp)
    return CombineResult(
        e.expand(bits), best, len(keys), "hamming_gray", EXACT_BY_ENUMERATION
    )


def vote_hamming_induced(
    e: Ensemble, ties: TiePolicy = TiePolicy(), individual_index: int = 0
) -> CombineResult:
    """Hamming voting via the ordering induced by the first member.

    Every member is oriented toward the first one, voted positionwise,
    and the outcome is certified after the fact: when all members lie
    close enough to the vote (see :func:`certify_induced_ordering`) the
    result is provably optimal, otherwise it is a heuristic.
    """
    M = e.het_matrix
    l, mp = M.shape
    if mp <= 1:
        return _degenerate(e, "hamming_induced")
    traw = (M != M[0]).sum(axis=1, dtype=np.int64)
    flip = (2 * traw > mp).astype(np.uint8)
    cnt = (M ^ flip[:, None]).sum(axis=0, dtype=np.int64)
    bits = (2 * cnt > l).astype(np.uint8)
    tied = 2 * cnt == l
    n_tied = int(tied.sum())
    if n_tied:
        if ties.rule == "first":
            bits[tied] = 0
        elif ties.rule == "random":
            bits[tied] = ties.rng(individual_index).integers(0, 2, n_tied, dtype=np.uint8)
        else:
            anchor = 0 if tied[0] else int(bits[0])
            bits[tied] = anchor
    if bits.size and bits[0]:
        bits ^= 1
    pc = (M != bits).sum(axis=1, dtype=np.int64)
    score = int((2 * np.minimum(pc, mp - pc)).sum())
    pair = e.expand(bits)
    cert = CERTIFIED_OPTIMAL if certify_induced_ordering(e, pair) else HEURISTIC
    return CombineResult(pair, score, 1 << n_tied, "hamming_induced", cert)


def vote_hamming(
    e: Ensemble,
    ties: TiePolicy = TiePolicy(),
    limits: SolverLimits = SolverLimits(),
    individual_index: int = 0,
) -> CombineResult:
    """Hamming voting: exact within the solver limits, certified heuristic past them.

    Chooses the cheaper of candidate enumeration (2^(m'-1) pairs) and the
    Gray-code ordering sweep (2^(l-1) orderings) when both are within
    ``limits``; otherwise whichever is; otherwise the induced-ordering
    heuristic with an optimality certificate.
    """
    M = e.het_matrix
    l, mp = M.shape
    if mp <= 1:
        return _degenerate(e, "hamming_enum")
    can_enum = mp <= limits.mprime_max and mp <= _ENUM_HARD_LIMIT
    can_gray = l <= limits.l_max and l <= _GRAY_HARD_LIMIT
    if can_enum and can_gray:
        if (1 << (mp - 1)) * l <= (1 << (l - 1)) * mp:
            return vote_hamming_enumerate(e, ties, individual_index)
        return vote_hamming_gray(e, ties, individual_index)
    if can_enum:
        return vote_hamming_enumerate(e, ties, individual_index)
    if can_gray:
        return vote_hamming_gray(e, ties, individual_index)
    return vote_hamming_induced(e, ties, individual_index)


# ---------------------------------------------------------------------------
# dispatch


def combine(
    e: Ensemble,
    mode: str,
    spec: DistanceSpec,
    ties: TiePolicy = TiePolicy(),
    limits: SolverLimits = SolverLimits(),
    individual_index: int = 0,
) -> CombineResult:
    """Run one combiner: ``select`` picks a member, ``vote`` builds a consensus."""
    if mode == "select":
        return select_hsp(e, spec, ties, individual_index)
    if mode != "vote":
        raise ValueError(f"unknown mode {mode!r}")
    if spec.kind == SWITCH:
        return vote_switch(e, ties, individual_index)
    if spec.kind == HAMMING:
        return vote_hamming(e, ties, limits, individual_index)
    return vote_k_hamming(e, spec.k, ties, limits, individual_index)
