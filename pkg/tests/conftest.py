import numpy as np
import pytest

from hapcombine import Genotype, HaplotypePair, build_ensemble


def pair(h1: str, h2: str) -> HaplotypePair:
    return HaplotypePair(h1, h2)


@pytest.fixture
def abc_pairs():
    """Three reconstructions of an all-het 4-marker genotype.

    Switch sequences are 000, 010, 111; pairwise switch distances
    (1, 3, 2) and pairwise pair-Hamming distances all 4.
    """
    return pair("0000", "1111"), pair("0011", "1100"), pair("0101", "1010")


@pytest.fixture
def abc_ensemble(abc_pairs):
    return build_ensemble(abc_pairs, genotype=Genotype("ind1", "1111"))


def random_valid_pair(rng, calls) -> HaplotypePair:
    """Uniform consistent pair for a genotype without missing calls."""
    calls = np.asarray(calls)
    h1 = np.zeros(calls.size, dtype=np.uint8)
    h1[calls == 2] = 1
    hets = calls == 1
    h1[hets] = rng.integers(0, 2, int(hets.sum()), dtype=np.uint8)
    h2 = h1.copy()
    h2[hets] ^= 1
    return HaplotypePair(h1, h2)


def random_calls(rng, m, het_p=0.5):
    calls = np.where(
        rng.random(m) < het_p, 1, np.where(rng.random(m) < 0.5, 0, 2)
    ).astype(np.int8)
    return calls
