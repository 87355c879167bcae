import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rnaqaoa.errors import InputError
from rnaqaoa.rna import (
    Sequence,
    Stem,
    StemSet,
    can_pair,
    enumerate_stems,
    pairing_matrix,
    partition_domains,
    stems_overlap,
    stems_pseudoknot,
    structure_from_selection,
)

PKB092 = "AAAGUCGCUGAAGACUUAAAAUUCAGG"

sequences = st.text(alphabet="ACGU", min_size=1, max_size=40).map(Sequence)


# ---------------------------------------------------------------------------
# sequences and pairing


def test_sequence_normalizes_t_to_u():
    assert Sequence("acgt").bases == "ACGU"


def test_sequence_rejects_bad_symbol_with_position():
    with pytest.raises(InputError, match="position 3"):
        Sequence("ACXG")


def test_sequence_rejects_empty():
    with pytest.raises(InputError):
        Sequence("")


def test_can_pair_table():
    assert can_pair("A", "U") and can_pair("U", "A")
    assert can_pair("C", "G") and can_pair("G", "C")
    assert can_pair("G", "U") and can_pair("U", "G")
    assert not can_pair("A", "A")
    assert not can_pair("A", "C")
    assert not can_pair("A", "G")
    assert not can_pair("C", "U")


def test_pairing_matrix_example_entry():
    mat = pairing_matrix(Sequence("CUACGAUAG"))
    assert mat[0, 8]  # C1-G9
    assert not mat.diagonal().any()


def test_pairing_matrix_all_a_is_zero():
    assert not pairing_matrix(Sequence("AAAA")).any()


@given(sequences)
def test_pairing_matrix_symmetric(seq):
    mat = pairing_matrix(seq)
    assert (mat == mat.T).all()


def test_pairing_matrix_respects_min_loop():
    # A-U at distance 2 admissible only when the loop gap allows it
    seq = Sequence("ACU")
    assert not pairing_matrix(seq, min_loop=2).any()
    assert pairing_matrix(seq, min_loop=1)[0, 2]


# ---------------------------------------------------------------------------
# stems


def test_stem_validation():
    with pytest.raises(ValueError):
        Stem(1, 5, 3)  # innermost pair would sit on the diagonal
    assert Stem(0, 0, 0).positions() == frozenset()
    assert Stem(1, 9, 3).pairs() == ((1, 9), (2, 8), (3, 7))


def test_enumerate_single_stem_instance():
    stems = enumerate_stems(Sequence("CUACGAUAG"), min_len=3)
    assert [(s.i, s.j, s.k) for s in stems] == [(1, 9, 3)]


def test_enumerate_pkb092_count():
    assert len(enumerate_stems(Sequence(PKB092), min_len=3)) == 18


def test_enumerate_unpairable_sequence_is_empty():
    assert len(enumerate_stems(Sequence("AAAA"), min_len=3)) == 0


def test_enumerate_maximal_subset_of_all():
    seq = Sequence(PKB092)
    full = {(s.i, s.j, s.k) for s in enumerate_stems(seq)}
    maximal = {(s.i, s.j, s.k) for s in enumerate_stems(seq, maximal_only=True)}
    assert maximal < full
    assert len(maximal) == 8


@given(sequences)
@settings(max_examples=60)
def test_enumerated_stems_are_legal_and_ordered(seq):
    stems = enumerate_stems(seq, min_len=2)
    order = [(s.i, s.j) for s in stems]
    assert order == sorted(order)
    for s in stems:
        for a, b in s.pairs():
            assert can_pair(seq.base(a), seq.base(b))


@given(sequences)
@settings(max_examples=60)
def test_maximal_stems_cannot_be_extended(seq):
    mat = pairing_matrix(seq)
    n = len(seq)

    def hit(i, j):
        return 1 <= i < j <= n and mat[i - 1, j - 1]

    for s in enumerate_stems(seq, min_len=2, maximal_only=True):
        assert not hit(s.i - 1, s.j + 1)
        assert not hit(s.i + s.k, s.j - s.k)


# ---------------------------------------------------------------------------
# relations


def _stems_of(seq_str, **kw):
    return enumerate_stems(Sequence(seq_str), **kw)


def test_overlap_shared_position():
    # both stems use bases 1..3
    stems = _stems_of("CCCAAAAGGGAAAGGGAAAA", maximal_only=True)
    assert [(s.i, s.j, s.k) for s in stems] == [(1, 10, 3), (1, 16, 3)]
    assert stems_overlap(stems[0], stems[1])


def test_disjoint_stems_do_not_overlap():
    s1, s2 = Stem(1, 10, 3), Stem(11, 20, 3)
    assert not stems_overlap(s1, s2)


def test_pseudoknot_crossing_true_nested_false():
    crossing = (Stem(1, 15, 3), Stem(8, 22, 3))
    assert stems_pseudoknot(*crossing)
    assert stems_pseudoknot(*reversed(crossing))
    nested = (Stem(1, 20, 3), Stem(6, 14, 3))
    assert not stems_pseudoknot(*nested)
    side_by_side = (Stem(1, 9, 3), Stem(11, 20, 3))
    assert not stems_pseudoknot(*side_by_side)


@given(sequences)
@settings(max_examples=40)
def test_relations_symmetric_and_exclusive(seq):
    stems = enumerate_stems(seq, min_len=2)
    for s1, s2 in itertools.combinations(list(stems)[:12], 2):
        assert stems_overlap(s1, s2) == stems_overlap(s2, s1)
        assert stems_pseudoknot(s1, s2) == stems_pseudoknot(s2, s1)
        assert not (stems_overlap(s1, s2) and stems_pseudoknot(s1, s2))


# ---------------------------------------------------------------------------
# domains


def test_domains_all_disjoint_gives_singletons():
    stems = _stems_of("CCCAAAAGGGAAAACCCAAAAGGG", maximal_only=True)
    disjoint = [s for s in stems if all(
        not stems_overlap(s, t) for t in stems if t != s)]
    if len(disjoint) == len(stems):
        doms = partition_domains(stems)
        assert all(d.size == 1 for d in doms)


def test_domains_all_overlapping_gives_one():
    stems = _stems_of("CCCAAAAGGGGG", maximal_only=True)
    assert all(
        stems_overlap(a, b) for a, b in itertools.combinations(stems, 2)
    )
    doms = partition_domains(stems)
    assert len(doms) == 1 and doms[0].size == len(stems)
    assert doms[0].dummy_index == len(stems)


def _prefix_scan_oracle(stems):
    """Independent greedy partition: longest prefix that stays mutually overlapping."""
    groups = []
    idx = 0
    items = list(stems)
    while idx < len(items):
        end = idx + 1
        while end < len(items) and all(
            stems_overlap(items[end], items[m]) for m in range(idx, end)
        ):
            end += 1
        groups.append(tuple(range(idx, end)))
        idx = end
    return groups


def test_pkb092_domains_match_prefix_scan_oracle():
    stems = enumerate_stems(Sequence(PKB092))
    doms = partition_domains(stems)
    assert [d.members for d in doms] == _prefix_scan_oracle(stems)
    assert [d.size for d in doms] == [8, 8, 2]


@given(sequences)
@settings(max_examples=40)
def test_domain_partition_invariants(seq):
    stems = enumerate_stems(seq, min_len=2)
    doms = partition_domains(stems)
    covered = [m for d in doms for m in d.members]
    assert sorted(covered) == list(range(len(stems)))
    for d in doms:
        for a, b in itertools.combinations(d.members, 2):
            assert stems_overlap(stems[a], stems[b])
    for prev, nxt in zip(doms, doms[1:]):
        first = nxt.members[0]
        assert not all(
            stems_overlap(stems[first], stems[m]) for m in prev.members
        )


# ---------------------------------------------------------------------------
# selections


def test_selection_empty_gives_no_pairs():
    stems = enumerate_stems(Sequence("CUACGAUAG"))
    pairs, conflicts = structure_from_selection(stems, "0")
    assert pairs == () and conflicts == ()


def test_selection_single_stem():
    stems = enumerate_stems(Sequence("CUACGAUAG"))
    pairs, conflicts = structure_from_selection(stems, "1")
    assert pairs == ((1, 9), (2, 8), (3, 7))
    assert conflicts == ()


def test_selection_flags_conflicts():
    stems = _stems_of("CCCAAAAGGGAAAGGGAAAA", maximal_only=True)
    _, conflicts = structure_from_selection(stems, "11")
    assert conflicts == ((0, 1),)


def test_selection_length_checked():
    stems = enumerate_stems(Sequence("CUACGAUAG"))
    with pytest.raises(ValueError):
        structure_from_selection(stems, "10")


def test_stemset_rejects_illegal_pairing():
    with pytest.raises(ValueError, match="illegal pair"):
        StemSet(Sequence("AAAAAAAAAA"), (Stem(1, 10, 2),))
