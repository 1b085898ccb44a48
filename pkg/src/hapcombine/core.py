"""Core domain types: genotypes, haplotype pairs, and switch-sequence coding.

Conventions
-----------
Alleles are biallelic and coded 0/1.  Genotype calls use allele-count
coding: 0 = homozygous reference, 1 = heterozygous, 2 = homozygous
alternate, -1 = missing.  Marker positions are 1-based in the public API
(``HetIndex.positions``); numpy indexing uses the ``zero_based`` view.

A haplotype pair is an unordered set of two allele sequences.  Restricted
to the heterozygous markers of its genotype, the second haplotype is the
bitwise complement of the first, so the pair is fully described by the
first haplotype's alleles at heterozygous markers plus the genotype.  The
switch sequence records, between consecutive heterozygous markers, whether
the phase flips; it is invariant under swapping the two haplotypes.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

HOM0 = 0
HET = 1
HOM1 = 2
MISSING = -1

CALL_FROM_CHAR = {"0": HOM0, "1": HET, "2": HOM1, "?": MISSING}
CHAR_FROM_CALL = {HOM0: "0", HET: "1", HOM1: "2", MISSING: "?"}


class HapcombineError(Exception):
    """Base class for all errors raised by this package."""


class LengthMismatchError(HapcombineError):
    """Sequences that must share a length do not."""


class ValidationError(HapcombineError):
    """A haplotype pair contradicts its genotype under the strict policy."""


class EmptyEnsembleError(HapcombineError):
    """An operation that needs at least one reconstruction got none."""


class TooLargeError(HapcombineError):
    """An exhaustive computation was asked for beyond its instance-size guard."""


def as_bits(seq, name="sequence"):
    """Coerce a 0/1 string or sequence to a read-only uint8 array."""
    if isinstance(seq, str):
        arr = (np.frombuffer(seq.encode("ascii"), dtype=np.uint8) - ord("0")).astype(np.uint8)
    else:
        arr = np.array(seq, dtype=np.uint8, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError(f"{name} must contain only 0/1 alleles")
    arr.flags.writeable = False
    return arr


def as_calls(seq, name="calls"):
    """Coerce a genotype call string or sequence to a read-only int8 array."""
    if isinstance(seq, str):
        try:
            arr = np.array([CALL_FROM_CHAR[c] for c in seq], dtype=np.int8)
        except KeyError as exc:
            raise ValueError(f"{name}: unknown call character {exc.args[0]!r}") from None
    else:
        arr = np.array(seq, dtype=np.int8, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and not np.isin(arr, (HOM0, HET, HOM1, MISSING)).all():
        raise ValueError(f"{name} must contain only calls 0/1/2/-1")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Genotype:
    """Per-marker unordered allele pair for one individual.

    Parameters
    ----------
    id : str
        Opaque individual identifier.
    calls : array-like or str
        Length-m sequence of calls; a string like ``"01?2"`` is accepted.
    """

    id: str
    calls: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "calls", as_calls(self.calls))
        if self.calls.size < 1:
            raise ValueError("a genotype needs at least one marker")

    @property
    def m(self) -> int:
        return int(self.calls.size)

    @property
    def het_count(self) -> int:
        return int(np.count_nonzero(self.calls == HET))

    @property
    def has_missing(self) -> bool:
        return bool(np.any(self.calls == MISSING))

    def __eq__(self, other):
        if not isinstance(other, Genotype):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.calls, other.calls)

    def __hash__(self):
        return hash((self.id, self.calls.tobytes()))

    def __repr__(self):
        text = "".join(CHAR_FROM_CALL[int(c)] for c in self.calls)
        return f"Genotype({self.id!r}, {text!r})"


@dataclass(frozen=True, eq=False)
class HetIndex:
    """Strictly increasing 1-based positions of heterozygous markers."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.int64, copy=True)
        if pos.size and (pos[0] < 1 or np.any(np.diff(pos) <= 0)):
            raise ValueError("het positions must be 1-based and strictly increasing")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @property
    def m_prime(self) -> int:
        return int(self.positions.size)

    @cached_property
    def zero_based(self) -> np.ndarray:
        z = self.positions - 1
        z.flags.writeable = False
        return z

    def __len__(self):
        return self.m_prime

    def __eq__(self, other):
        if not isinstance(other, HetIndex):
            return NotImplemented
        return np.array_equal(self.positions, other.positions)


def het_positions(g: Genotype) -> HetIndex:
    """Return the 1-based positions of the heterozygous calls of ``g``."""
    return HetIndex(np.flatnonzero(g.calls == HET) + 1)


@dataclass(frozen=True, eq=False)
class HaplotypePair:
    """Unordered pair of binary allele sequences of equal length.

    Equality and hashing treat ``{h1, h2}`` and ``{h2, h1}`` as the same
    value.  Arrays are stored read-only.
    """

    h1: np.ndarray
    h2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h1", as_bits(self.h1, "h1"))
        object.__setattr__(self, "h2", as_bits(self.h2, "h2"))
        if self.h1.size != self.h2.size:
            raise LengthMismatchError(
                f"haplotype lengths differ: {self.h1.size} vs {self.h2.size}"
            )

    @property
    def m(self) -> int:
        return int(self.h1.size)

    def canonical(self):
        """Return ``(first, second)`` with the lexicographically smaller sequence first."""
        if self.h1.tobytes() <= self.h2.tobytes():
            return self.h1, self.h2
        return self.h2, self.h1

    def __eq__(self, other):
        if not isinstance(other, HaplotypePair):
            return NotImplemented
        a1, a2 = self.canonical()
        b1, b2 = other.canonical()
        return np.array_equal(a1, b1) and np.array_equal(a2, b2)

    def __hash__(self):
        a1, a2 = self.canonical()
        return hash((a1.tobytes(), a2.tobytes()))

    def __repr__(self):
        a1, a2 = self.canonical()
        s1 = "".join(map(str, a1))
        s2 = "".join(map(str, a2))
        return f"HaplotypePair({s1!r}, {s2!r})"


def canonical_orientation(p: HaplotypePair):
    """Deterministic ordering of a pair: lexicographically smaller sequence first."""
    return p.canonical()


def genotype_from_pair(p: HaplotypePair, individual_id: str) -> Genotype:
    """Infer the genotype generated by ``p`` (heterozygous where the alleles differ)."""
    calls = np.where(p.h1 != p.h2, HET, np.where(p.h1 == 0, HOM0, HOM1)).astype(np.int8)
    return Genotype(individual_id, calls)


@dataclass(frozen=True, eq=False)
class SwitchSequence:
    """Phase-flip indicators between consecutive heterozygous markers.

    ``bits[j] = 1`` iff the pair's phase flips between the j-th and the
    (j+1)-th heterozygous marker; length is ``max(m' - 1, 0)``.
    """

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits, "switch bits"))

    def __len__(self):
        return int(self.bits.size)

    def __eq__(self, other):
        if not isinstance(other, SwitchSequence):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"SwitchSequence({''.join(map(str, self.bits))!r})"


def to_switch_sequence(p: HaplotypePair, idx: HetIndex) -> SwitchSequence:
    """Encode a pair as its switch sequence over the given heterozygous markers.

    The result is identical for either ordering of the pair.  Raises
    ``ValidationError`` if the pair is not heterozygous at every indexed
    marker, since the encoding is undefined there.
    """
    z = idx.zero_based
    if z.size and (z[-1] >= p.m):
        raise LengthMismatchError("het index exceeds pair length")
    a = p.h1[z]
    if z.size and np.any(a == p.h2[z]):
        raise ValidationError("pair is homozygous at an indexed heterozygous marker")
    if a.size < 2:
        return SwitchSequence(np.zeros(0, dtype=np.uint8))
    return SwitchSequence(a[:-1] ^ a[1:])


def from_switch_sequence(
    s: SwitchSequence, g: Genotype, anchor: int, missing_fill: int | None = None
) -> HaplotypePair:
    """Decode a switch sequence into the haplotype pair it describes.

    ``anchor`` fixes the first haplotype's allele at the first heterozygous
    marker; both anchor values yield the same unordered pair.  Missing calls
    are only allowed when ``missing_fill`` supplies the allele to place at
    them (they are treated as homozygous for that allele).
    """
    if anchor not in (0, 1):
        raise ValueError("anchor must be 0 or 1")
    idx = het_positions(g)
    mp = idx.m_prime
    if len(s) != max(mp - 1, 0):
        raise LengthMismatchError(
            f"switch sequence length {len(s)} does not match {max(mp - 1, 0)}"
        )
    calls = g.calls
    if np.any(calls == MISSING) and missing_fill is None:
        raise ValidationError(
            "genotype has missing calls; pass missing_fill to decode anyway"
        )
    h1 = np.zeros(g.m, dtype=np.uint8)
    h1[calls == HOM1] = 1
    if missing_fill is not None:
        h1[calls == MISSING] = missing_fill
    if mp:
        alleles = np.empty(mp, dtype=np.uint8)
        alleles[0] = anchor
        if mp > 1:
            alleles[1:] = np.bitwise_xor.accumulate(s.bits) ^ anchor
        h1[idx.zero_based] = alleles
    h2 = h1.copy()
    if mp:
        h2[idx.zero_based] ^= 1
    return HaplotypePair(h1, h2)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a pair against a genotype.

    ``violations`` lists the 1-based markers whose non-missing call
    contradicts the pair's alleles.  Missing calls never contradict.
    """

    violations: tuple
    policy: str

    @property
    def ok(self) -> bool:
        return not self.violations


def _contradictions(h1, h2, calls) -> np.ndarray:
    """Boolean mask of markers where {h1, h2} contradicts a non-missing call."""
    bad = np.zeros(calls.size, dtype=bool)
    bad |= (calls == HOM0) & ((h1 != 0) | (h2 != 0))
    bad |= (calls == HOM1) & ((h1 != 1) | (h2 != 1))
    bad |= (calls == HET) & (h1 == h2)
    return bad


def validate_pair(p: HaplotypePair, g: Genotype, policy: str = "strict") -> ValidationReport:
    """Check a pair's consistency with a genotype.

    Under both policies the report lists every marker where the pair
    contradicts a non-missing call; the pair is accepted under ``strict``
    iff that list is empty, while ``lenient`` callers mask the listed
    markers from downstream distance computation.
    """
    if policy not in ("strict", "lenient"):
        raise ValueError(f"unknown policy {policy!r}")
    if p.m != g.m:
        raise LengthMismatchError(f"pair length {p.m} does not match genotype length {g.m}")
    bad = _contradictions(p.h1, p.h2, g.calls)
    return ValidationReport(tuple(int(i) + 1 for i in np.flatnonzero(bad)), policy)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """The reconstructions of one individual, validated against one genotype.

    Construction resolves missing genotype calls from the members (majority
    of the members' local het/hom status, ties to homozygous) and records a
    mask of markers excluded from distance computation: markers where some
    member contradicts the working call.  Under ``strict`` a contradiction
    at an originally non-missing call raises ``ValidationError`` instead.

    ``het_index`` / ``het_matrix`` expose the active (unmasked)
    heterozygous markers, on which every member is consistent; combiners
    and distances operate on that common marker set.
    """

    genotype: Genotype
    members: tuple
    labels: tuple
    policy: str
    working_calls: np.ndarray
    mask: np.ndarray
    reports: tuple
    resolved: tuple

    @property
    def l(self) -> int:
        return len(self.members)

    @property
    def m(self) -> int:
        return self.genotype.m

    @cached_property
    def het_index(self) -> HetIndex:
        active = (self.working_calls == HET) & ~self.mask
        return HetIndex(np.flatnonzero(active) + 1)

    @property
    def m_prime(self) -> int:
        return self.het_index.m_prime

    @cached_property
    def het_matrix(self) -> np.ndarray:
        """(l, m') matrix: each member's first haplotype at active het markers."""
        z = self.het_index.zero_based
        mat = np.stack([p.h1[z] for p in self.members])
        mat.flags.writeable = False
        return mat

    def expand(self, het_bits) -> HaplotypePair:
        """Build the full-length pair whose active het alleles are ``het_bits``.

        Homozygous and resolved markers take the working call's allele;
        masked heterozygous markers get the arbitrary but deterministic
        phase (0, 1).
        """
        bits = np.asarray(het_bits, dtype=np.uint8)
        if bits.size != self.m_prime:
            raise LengthMismatchError(
                f"expected {self.m_prime} het alleles, got {bits.size}"
            )
        wc = self.working_calls
        h1 = np.zeros(self.m, dtype=np.uint8)
        h1[wc == HOM1] = 1
        het_all = wc == HET
        h1[het_all] = 0
        h1[self.het_index.zero_based] = bits
        h2 = h1.copy()
        h2[het_all] ^= 1
        return HaplotypePair(h1, h2)


def _resolve_missing(calls, H1, H2):
    """Resolve missing calls from member majority; return (working, resolved log).

    A marker is resolved heterozygous iff strictly more members are locally
    heterozygous there than homozygous; otherwise homozygous, with the
    majority allele among the locally homozygous members (ties keep the
    first such member's allele).
    """
    working = calls.copy()
    resolved = []
    for i in np.flatnonzero(calls == MISSING):
        het_local = H1[:, i] != H2[:, i]
        n_het = int(het_local.sum())
        n_hom = het_local.size - n_het
        if n_het > n_hom:
            working[i] = HET
        else:
            hom_alleles = H1[~het_local, i]
            ones = int(hom_alleles.sum())
            zeros = hom_alleles.size - ones
            if ones > zeros:
                allele = 1
            elif zeros > ones:
                allele = 0
            else:
                allele = int(hom_alleles[0])
            working[i] = HOM1 if allele else HOM0
        resolved.append((int(i) + 1, int(working[i])))
    return working, tuple(resolved)


def build_ensemble(members, genotype=None, labels=None, policy="strict") -> Ensemble:
    """Assemble and validate the reconstructions of one individual.

    Parameters
    ----------
    members : sequence of HaplotypePair
    genotype : Genotype, optional
        When absent, inferred from the first member.
    labels : sequence of str, optional
        Method names, defaulting to ``member_1 .. member_l``.
    policy : {"strict", "lenient"}
        ``strict`` raises ``ValidationError`` when a member contradicts a
        non-missing call; ``lenient`` masks such markers instead.
    """
    members = tuple(members)
    if not members:
        raise EmptyEnsembleError("an ensemble needs at least one reconstruction")
    if labels is None:
        labels = tuple(f"member_{i + 1}" for i in range(len(members)))
    else:
        labels = tuple(labels)
        if len(labels) != len(members):
            raise ValueError("labels and members differ in length")
    if genotype is None:
        genotype = genotype_from_pair(members[0], "unknown")
    m = genotype.m
    for p in members:
        if p.m != m:
            raise LengthMismatchError(
                f"member length {p.m} does not match genotype length {m}"
            )
    H1 = np.stack([p.h1 for p in members])
    H2 = np.stack([p.h2 for p in members])

    reports = tuple(validate_pair(p, genotype, policy) for p in members)
    if policy == "strict":
        bad = [(lab, r) for lab, r in zip(labels, reports) if not r.ok]
        if bad:
            detail = "; ".join(f"{lab} at markers {r.violations}" for lab, r in bad)
            raise ValidationError(f"{genotype.id}: inconsistent reconstructions: {detail}")

    working, resolved = _resolve_missing(genotype.calls, H1, H2)

    # Mask every marker where some member contradicts the working call.
    # In strict mode these can only be markers whose original call was
    # missing; validation above already rejected the rest.
    bad = np.zeros(m, dtype=bool)
    for i in range(len(members)):
        bad |= _contradictions(H1[i], H2[i], working)
    bad.flags.writeable = False
    working.flags.writeable = False

    return Ensemble(
        genotype=genotype,
        members=members,
        labels=labels,
        policy=policy,
        working_calls=working,
        mask=bad,
        reports=reports,
        resolved=resolved,
    )
