import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rnaqaoa.errors import ResourceLimitError
from rnaqaoa.instances import generate_instances
from rnaqaoa.qubo import (
    IsingModel,
    QuboModel,
    QuboParams,
    brute_force_solve,
    build_qubo,
    ising_diagonal,
    ising_energy,
    model_to_dict,
    objective,
    penalty,
    qubo_diagonal,
    stem_labels,
    to_ising,
)
from rnaqaoa.rna import (
    Sequence,
    Stem,
    enumerate_stems,
    partition_domains,
    stems_pseudoknot,
)

PKB092 = "AAAGUCGCUGAAGACUUAAAAUUCAGG"


def single_stem_instance():
    return enumerate_stems(Sequence("CUACGAUAG"))


def overlapping_pair_instance():
    # exactly two k=3 stems sharing their 5' run, 20 bases
    return enumerate_stems(Sequence("CCCAAAAGGGAAAGGGAAAA"), maximal_only=True)


def test_params_validation():
    with pytest.raises(ValueError):
        QuboParams(epsilon=-1.0)
    with pytest.raises(ValueError):
        QuboParams(c_p=1.5)


def test_penalty_overlap():
    assert penalty(Stem(1, 10, 3), Stem(2, 11, 4), QuboParams()) == -7


def test_penalty_pseudoknot_zero_weight():
    s1, s2 = Stem(1, 15, 3), Stem(8, 22, 3)
    assert stems_pseudoknot(s1, s2)
    assert penalty(s1, s2, QuboParams(c_p=0.0)) == 0.0
    assert penalty(s1, s2, QuboParams(c_p=0.5)) == 3.0


def test_penalty_unrelated_zero():
    assert penalty(Stem(1, 20, 3), Stem(6, 14, 3), QuboParams()) == 0.0


def test_objective_empty_selection():
    assert objective("0", single_stem_instance(), QuboParams()) == 0.0


def test_objective_single_stem_value():
    assert objective("1", single_stem_instance(), QuboParams()) == pytest.approx(5.25)


def test_objective_two_overlapping_stems():
    stems = overlapping_pair_instance()
    assert len(stems.sequence) == 20
    val = objective("11", stems, QuboParams())
    assert val == pytest.approx(12 - 2 * (20 / 12) - 6)
    # selecting both overlapping stems never beats the better single stem
    assert val < max(
        objective("10", stems, QuboParams()), objective("01", stems, QuboParams())
    )


def test_length_preference_single_long_beats_two_short():
    stems = enumerate_stems(Sequence("CCCCCCAAAAGGGGGG"), maximal_only=True)
    by_coord = {(s.i, s.j, s.k): idx for idx, s in enumerate(stems)}
    long_idx = by_coord[(1, 16, 6)]
    short_a, short_b = by_coord[(1, 13, 3)], by_coord[(4, 16, 3)]
    n = len(stems)

    def select(indices):
        return "".join("1" if q in indices else "0" for q in range(n))

    params = QuboParams(epsilon=6.0)
    assert objective(select({long_idx}), stems, params) > objective(
        select({short_a, short_b}), stems, params
    )


def test_build_qubo_single_stem():
    model = build_qubo(single_stem_instance(), QuboParams())
    assert model.n == 1
    assert model.linear == (pytest.approx(5.25),)
    assert model.quadratic == {}


def test_build_qubo_quadratic_keys_lower_index_second():
    model = build_qubo(enumerate_stems(Sequence(PKB092)), QuboParams())
    assert all(j < i for (i, j) in model.quadratic)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_model_matches_objective_exhaustively(seed):
    stems = generate_instances(1, seed=seed, min_stems=3, max_stems=8)[0]
    params = QuboParams()
    model = build_qubo(stems, params)
    vals = qubo_diagonal(model)
    for idx in range(2**model.n):
        bits = format(idx, f"0{model.n}b")
        assert vals[idx] == pytest.approx(objective(bits, stems, params), abs=1e-9)


def test_to_ising_single_variable():
    model = build_qubo(single_stem_instance(), QuboParams())
    ising = to_ising(model)
    assert ising.h == (pytest.approx(2.625),)
    assert ising.constant == pytest.approx(-2.625)
    assert ising_energy(ising, "1") == pytest.approx(-5.25)
    assert ising_energy(ising, "0") == pytest.approx(0.0)


def test_to_ising_zero_model():
    ising = to_ising(QuboModel(n=2, linear=(0.0, 0.0)))
    assert ising.h == (0.0, 0.0) and ising.J == {} and ising.constant == 0.0


def test_to_ising_domain_reduction_drops_same_domain_terms():
    stems = enumerate_stems(Sequence(PKB092))
    domains = partition_domains(stems)
    model = build_qubo(stems, QuboParams())
    reduced = to_ising(model, domains)
    full = to_ising(model)
    assert reduced.n == model.n + len(domains)
    same = set()
    for dom in domains:
        same.update(itertools.combinations(sorted(dom.members), 2))
    assert not any(key in same for key in reduced.J)
    assert len(reduced.J) < len(full.J)
    # dummy qubits carry no coefficients
    assert all(reduced.h[q] == 0.0 for q in range(model.n, reduced.n))


@pytest.mark.parametrize("seed", range(5))
def test_ising_equals_negated_objective(seed):
    stems = generate_instances(1, seed=100 + seed, min_stems=3, max_stems=10)[0]
    params = QuboParams(c_p=0.3 if seed % 2 else 0.0)
    model = build_qubo(stems, params)
    ising = to_ising(model)
    qd, idg = qubo_diagonal(model), ising_diagonal(ising)
    assert np.abs(qd + idg).max() < 1e-9
    for idx in (0, 1, 2**model.n - 1):
        bits = format(idx, f"0{model.n}b")
        assert ising_energy(ising, bits) == pytest.approx(-objective(bits, stems, params), abs=1e-9)


def test_spin_convention_bit_one_is_minus_z():
    ising = IsingModel(n=1, h=(1.0,), constant=0.0)
    assert ising_energy(ising, "0") == 1.0
    assert ising_energy(ising, "1") == -1.0


def test_brute_force_single_stem():
    strings, value = brute_force_solve(build_qubo(single_stem_instance(), QuboParams()))
    assert strings == ("1",) and value == pytest.approx(5.25)


def test_brute_force_empty_model():
    strings, value = brute_force_solve(QuboModel(n=0, linear=()))
    assert strings == ("",) and value == 0.0


def test_brute_force_guard():
    with pytest.raises(ResourceLimitError):
        brute_force_solve(QuboModel(n=25, linear=(0.0,) * 25))


def test_brute_force_never_selects_overlapping_pair():
    for seed in range(4):
        stems = generate_instances(1, seed=300 + seed, min_stems=3, max_stems=8)[0]
        model = build_qubo(stems, QuboParams())
        strings, _ = brute_force_solve(model)
        from rnaqaoa.rna import structure_from_selection

        for bits in strings:
            _, conflicts = structure_from_selection(stems, bits)
            assert conflicts == ()


def _find_pseudoknot_degenerate_instance():
    """Instance whose optimum set mixes crossing and non-crossing structures."""
    for seed in range(200):
        stems = generate_instances(1, seed=1000 + seed, min_stems=3, max_stems=8)[0]
        strings, _ = brute_force_solve(build_qubo(stems, QuboParams(c_p=0.0)))
        if len(strings) < 2:
            continue

        def has_crossing(bits):
            chosen = [i for i, b in enumerate(bits) if b == "1"]
            return any(
                stems_pseudoknot(stems[a], stems[b])
                for a, b in itertools.combinations(chosen, 2)
            )

        flags = [has_crossing(b) for b in strings]
        if any(flags) and not all(flags):
            return stems, strings
    raise AssertionError("no degenerate instance found in the search budget")


def test_cp_zero_admits_pseudoknot_degenerate_optima():
    stems, strings = _find_pseudoknot_degenerate_instance()
    assert len(strings) >= 2


def test_model_export_shape():
    stems = single_stem_instance()
    model = build_qubo(stems, QuboParams())
    doc = model_to_dict(model, stem_labels(stems))
    assert doc["n"] == 1
    assert doc["variables"] == ["stem_1_9_3"]
    assert doc["linear"] == [pytest.approx(5.25)]
    assert doc["quadratic"] == [] and doc["offset"] == 0.0


@given(st.integers(min_value=0, max_value=2**10 - 1))
@settings(max_examples=30)
def test_qubo_diagonal_matches_evaluate(idx):
    stems = enumerate_stems(Sequence(PKB092), maximal_only=True)  # 8 stems
    model = build_qubo(stems, QuboParams())
    if idx >= 2**model.n:
        idx %= 2**model.n
    bits = format(idx, f"0{model.n}b")
    assert qubo_diagonal(model)[idx] == pytest.approx(model.evaluate(bits), abs=1e-9)
