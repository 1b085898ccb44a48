import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hapcombine import (
    EmptyEnsembleError,
    Genotype,
    HaplotypePair,
    HetIndex,
    LengthMismatchError,
    SwitchSequence,
    ValidationError,
    build_ensemble,
    canonical_orientation,
    from_switch_sequence,
    genotype_from_pair,
    het_positions,
    to_switch_sequence,
    validate_pair,
)
from hapcombine.core import HET, HOM0, HOM1, MISSING

from conftest import pair, random_calls, random_valid_pair


# --- het_positions -----------------------------------------------------------


def test_het_positions_mixed():
    assert het_positions(Genotype("x", "101")).positions.tolist() == [1, 3]


def test_het_positions_none():
    assert het_positions(Genotype("x", "02")).positions.tolist() == []


def test_het_positions_all():
    assert het_positions(Genotype("x", "1111")).positions.tolist() == [1, 2, 3, 4]


# --- validate_pair -----------------------------------------------------------


def test_validate_exact_match():
    rep = validate_pair(pair("01", "10"), Genotype("x", "11"))
    assert rep.ok and rep.violations == ()


def test_validate_hom_pair_against_het_calls():
    rep = validate_pair(pair("01", "01"), Genotype("x", "11"))
    assert not rep.ok
    assert rep.violations == (1, 2)


def test_validate_opposite_haplotypes_are_het_consistent():
    # {00, 11} has alleles {0, 1} at every marker, so it matches het calls
    assert validate_pair(pair("00", "11"), Genotype("x", "11")).ok


def test_validate_missing_never_contradicts():
    # marker 1 missing, marker 2 hom-0: {0,0} matches, accepted overall
    rep = validate_pair(pair("00", "10"), Genotype("x", "?0"))
    assert rep.ok


def test_validate_length_mismatch():
    with pytest.raises(LengthMismatchError):
        validate_pair(pair("01", "10"), Genotype("x", "111"))


# --- switch-sequence coding --------------------------------------------------


def test_switch_sequence_constant():
    idx = het_positions(Genotype("x", "1111"))
    assert to_switch_sequence(pair("0000", "1111"), idx) == SwitchSequence("000")


def test_switch_sequence_single_flip():
    idx = het_positions(Genotype("x", "1111"))
    assert to_switch_sequence(pair("0011", "1100"), idx) == SwitchSequence("010")


def test_switch_sequence_alternating():
    idx = het_positions(Genotype("x", "1111"))
    assert to_switch_sequence(pair("0101", "1010"), idx) == SwitchSequence("111")


def test_switch_sequence_skips_hom_markers():
    g = Genotype("x", "10211")
    assert to_switch_sequence(pair("00110", "10101"), het_positions(g)) == SwitchSequence("11")


def test_from_switch_sequence_inverse():
    g = Genotype("x", "1111")
    assert from_switch_sequence(SwitchSequence("010"), g, anchor=0) == pair("0011", "1100")


def test_from_switch_sequence_single_het():
    assert from_switch_sequence(SwitchSequence(""), Genotype("x", "1"), anchor=0) == pair("0", "1")


def test_from_switch_sequence_anchor_symmetry():
    g = Genotype("x", "1111")
    assert from_switch_sequence(SwitchSequence("000"), g, anchor=1) == pair("0000", "1111")


def test_from_switch_sequence_length_check():
    with pytest.raises(LengthMismatchError):
        from_switch_sequence(SwitchSequence("01"), Genotype("x", "11"), anchor=0)


def test_from_switch_sequence_missing_needs_fill():
    g = Genotype("x", "1?1")
    with pytest.raises(ValidationError):
        from_switch_sequence(SwitchSequence("1"), g, anchor=0)
    p = from_switch_sequence(SwitchSequence("1"), g, anchor=0, missing_fill=0)
    assert p == pair("001", "100")


# --- canonical orientation ---------------------------------------------------


def test_canonical_orientation_swaps():
    h1, h2 = canonical_orientation(pair("10", "01"))
    assert "".join(map(str, h1)) == "01"
    assert "".join(map(str, h2)) == "10"


def test_canonical_orientation_single():
    h1, h2 = canonical_orientation(pair("0", "1"))
    assert (h1[0], h2[0]) == (0, 1)


def test_canonical_orientation_keeps_order():
    h1, _ = canonical_orientation(pair("0011", "1100"))
    assert "".join(map(str, h1)) == "0011"


def test_pair_equality_is_unordered():
    assert pair("01", "10") == pair("10", "01")
    assert hash(pair("01", "10")) == hash(pair("10", "01"))
    assert pair("01", "10") != pair("00", "11")


# --- properties --------------------------------------------------------------


@st.composite
def genotype_and_pair(draw, m_max=16, het_only=False):
    m = draw(st.integers(1, m_max))
    if het_only:
        calls = [HET] * m
    else:
        calls = draw(st.lists(st.sampled_from([HOM0, HET, HOM1]), min_size=m, max_size=m))
    g = Genotype("h", calls)
    hets = np.flatnonzero(g.calls == HET)
    bits = draw(st.lists(st.integers(0, 1), min_size=len(hets), max_size=len(hets)))
    h1 = np.zeros(m, dtype=np.uint8)
    h1[g.calls == HOM1] = 1
    h1[hets] = bits
    h2 = h1.copy()
    h2[hets] ^= 1
    return g, HaplotypePair(h1, h2)


@given(genotype_and_pair())
def test_switch_round_trip(gp):
    g, p = gp
    idx = het_positions(g)
    s = to_switch_sequence(p, idx)
    anchor = int(p.h1[idx.zero_based[0]]) if idx.m_prime else 0
    assert from_switch_sequence(s, g, anchor) == p


@given(genotype_and_pair())
def test_switch_orientation_independence(gp):
    g, p = gp
    idx = het_positions(g)
    assert to_switch_sequence(p, idx) == to_switch_sequence(HaplotypePair(p.h2, p.h1), idx)


@given(genotype_and_pair())
def test_het_complement(gp):
    g, p = gp
    z = het_positions(g).zero_based
    assert np.all(p.h1[z] != p.h2[z])


@given(genotype_and_pair())
def test_decode_anchor_symmetry(gp):
    g, p = gp
    s = to_switch_sequence(p, het_positions(g))
    assert from_switch_sequence(s, g, 0) == from_switch_sequence(s, g, 1)


@pytest.mark.parametrize("mp", [1, 2, 3, 5, 8, 12])
def test_consistent_pair_count(mp):
    # a genotype with m' het markers admits exactly 2^(m'-1) distinct pairs
    g = Genotype("x", [HET] * mp)
    seen = set()
    for v in range(1 << mp):
        h1 = np.array([(v >> j) & 1 for j in range(mp)], dtype=np.uint8)
        seen.add(HaplotypePair(h1, h1 ^ 1))
    assert len(seen) == 1 << (mp - 1)


def test_genotype_from_pair():
    g = genotype_from_pair(pair("0101", "0011"), "z")
    assert g.calls.tolist() == [HOM0, HET, HET, HOM1]


# --- ensembles: missing resolution and masking -------------------------------


def test_build_ensemble_infers_genotype(abc_pairs):
    e = build_ensemble(abc_pairs)
    assert e.genotype.calls.tolist() == [HET] * 4
    assert e.m_prime == 4


def test_missing_resolved_to_het_by_majority():
    members = [pair("01", "10"), pair("01", "10"), pair("00", "01")]
    e = build_ensemble(members, genotype=Genotype("x", "?1"))
    assert e.working_calls[0] == HET
    assert e.resolved == ((1, HET),)
    # the dissenting hom member masks the marker for distance purposes
    assert bool(e.mask[0])
    assert e.het_index.positions.tolist() == [2]


def test_missing_resolved_to_hom_majority_allele():
    members = [pair("11", "10"), pair("11", "10"), pair("01", "10")]
    e = build_ensemble(members, genotype=Genotype("x", "?1"))
    assert e.working_calls[0] == HOM1
    assert bool(e.mask[0])  # the het member disagrees with the resolution


def test_missing_tie_resolves_to_hom_first_member_allele():
    members = [pair("01", "00"), pair("11", "10")]
    e = build_ensemble(members, genotype=Genotype("x", "?1"))
    # one member het, one hom at marker 1: tie goes to hom with allele 0
    assert e.working_calls[0] == HOM0


def test_strict_rejects_contradictions():
    with pytest.raises(ValidationError):
        build_ensemble([pair("00", "11")], genotype=Genotype("x", "00"), policy="strict")


def test_lenient_masks_contradictions():
    e = build_ensemble(
        [pair("01", "10"), pair("00", "11")],
        genotype=Genotype("x", "10"),
        policy="lenient",
    )
    # marker 2: call hom-0 but second member is {1,1} there
    assert e.mask.tolist() == [False, True]
    assert e.het_index.positions.tolist() == [1]
    assert e.reports[1].violations == (2,)


def test_lenient_masked_het_drops_from_index():
    e = build_ensemble(
        [pair("0101", "1010"), pair("0001", "1010")],
        genotype=Genotype("x", "1111"),
        policy="lenient",
    )
    # member 2 is hom at marker 2; that het marker is masked
    assert e.mask.tolist() == [False, True, False, False]
    assert e.het_index.positions.tolist() == [1, 3, 4]
    assert e.het_matrix.shape == (2, 3)


def test_empty_ensemble():
    with pytest.raises(EmptyEnsembleError):
        build_ensemble([])


def test_member_length_mismatch():
    with pytest.raises(LengthMismatchError):
        build_ensemble([pair("01", "10"), pair("011", "100")])


def test_expand_fills_from_working_calls(abc_ensemble):
    p = abc_ensemble.expand([0, 0, 1, 1])
    assert p == pair("0011", "1100")


def test_arrays_are_read_only(abc_ensemble):
    with pytest.raises(ValueError):
        abc_ensemble.members[0].h1[0] = 1
    with pytest.raises(ValueError):
        abc_ensemble.genotype.calls[0] = 0


def test_genotype_rejects_bad_values():
    with pytest.raises(ValueError):
        Genotype("x", "013")
    with pytest.raises(ValueError):
        Genotype("x", [])


def test_het_index_must_increase():
    with pytest.raises(ValueError):
        HetIndex([3, 2])
