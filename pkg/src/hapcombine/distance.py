"""Distances between haplotype pairs: switch, pair-Hamming, and windowed Hamming.

All three distances are defined for pairs consistent with one shared
genotype and return exact non-negative integers.  Pair-Hamming compares a
pair of unordered pairs by trying both ways of matching the haplotypes and
keeping the cheaper one; the switch distance is the Hamming distance
between switch sequences; the windowed (k-Hamming) distance sums
pair-Hamming over every window of k consecutive heterozygous markers and
interpolates between the two (k=2 doubles the switch distance, k=m'
matches pair-Hamming).
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    HapcombineError,
    HaplotypePair,
    HetIndex,
    LengthMismatchError,
    ValidationError,
    to_switch_sequence,
)

SWITCH = "switch"
HAMMING = "hamming"
KHAMMING = "khamming"


class InvalidKError(HapcombineError):
    """Window length below 2 is meaningless for the windowed distance."""


@dataclass(frozen=True)
class DistanceSpec:
    """Selects one of the three distances; ``k`` applies to ``khamming`` only."""

    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in (SWITCH, HAMMING, KHAMMING):
            raise ValueError(f"unknown distance kind {self.kind!r}")
        if self.kind == KHAMMING:
            if self.k is None or self.k < 2:
                raise InvalidKError(f"window length must be >= 2, got {self.k}")
        elif self.k is not None:
            raise ValueError(f"{self.kind} distance takes no window length")

    @classmethod
    def switch(cls):
        return cls(SWITCH)

    @classmethod
    def hamming(cls):
        return cls(HAMMING)

    @classmethod
    def k_hamming(cls, k: int):
        return cls(KHAMMING, k)


def hamming_seq(a, b) -> int:
    """Number of positions where the two equal-length sequences disagree."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size != b.size:
        raise LengthMismatchError(f"sequence lengths differ: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b))


def hamming_pair(A: HaplotypePair, B: HaplotypePair) -> int:
    """Hamming distance between unordered pairs: the cheaper of the two matchings."""
    if A.m != B.m:
        raise LengthMismatchError(f"pair lengths differ: {A.m} vs {B.m}")
    straight = np.count_nonzero(A.h1 != B.h1) + np.count_nonzero(A.h2 != B.h2)
    crossed = np.count_nonzero(A.h1 != B.h2) + np.count_nonzero(A.h2 != B.h1)
    return int(min(straight, crossed))


def switch_distance(A: HaplotypePair, B: HaplotypePair, idx: HetIndex) -> int:
    """Hamming distance between the two pairs' switch sequences (0 when m' <= 1)."""
    sa = to_switch_sequence(A, idx)
    sb = to_switch_sequence(B, idx)
    return hamming_seq(sa.bits, sb.bits)


def pair_hamming_het(a_bits, b_bits) -> int:
    """Pair-Hamming restricted to het markers, from the two first-haplotype projections."""
    a_bits = np.asarray(a_bits)
    b_bits = np.asarray(b_bits)
    if a_bits.size != b_bits.size:
        raise LengthMismatchError("het projections differ in length")
    t = int(np.count_nonzero(a_bits != b_bits))
    return 2 * min(t, a_bits.size - t)


def k_hamming(A: HaplotypePair, B: HaplotypePair, k: int, idx: HetIndex) -> int:
    """Windowed Hamming distance over every window of k consecutive het markers.

    Falls back to the plain pair-Hamming distance when the pairs have fewer
    than k heterozygous markers.  Homozygous markers between the windowed
    het markers are not counted (they agree for valid pairs anyway).
    """
    if k < 2:
        raise InvalidKError(f"window length must be >= 2, got {k}")
    mp = idx.m_prime
    if mp < k:
        return hamming_pair(A, B)
    z = idx.zero_based
    a = A.h1[z]
    b = B.h1[z]
    if np.any(A.h1[z] == A.h2[z]) or np.any(B.h1[z] == B.h2[z]):
        raise ValidationError("pair is homozygous at an indexed heterozygous marker")
    diff = (a != b).astype(np.int64)
    csum = np.concatenate(([0], np.cumsum(diff)))
    t = csum[k:] - csum[:-k]
    return int(np.sum(2 * np.minimum(t, k - t)))


def distance(spec: DistanceSpec, A: HaplotypePair, B: HaplotypePair, idx: HetIndex) -> int:
    """Dispatch to the distance selected by ``spec``."""
    if spec.kind == SWITCH:
        return switch_distance(A, B, idx)
    if spec.kind == HAMMING:
        return hamming_pair(A, B)
    return k_hamming(A, B, spec.k, idx)
