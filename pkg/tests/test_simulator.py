import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rnaqaoa.errors import ResourceLimitError
from rnaqaoa.qubo import IsingModel, QuboParams, build_qubo, to_ising
from rnaqaoa.rna import Domain, Sequence, enumerate_stems, partition_domains
from rnaqaoa.simulator import (
    CostLayerSpec,
    GateOp,
    MixerSpec,
    NoiseSpec,
    QuantumState,
    SampleSet,
    apply_cost_layer,
    apply_parity_xy_mixer,
    apply_x_mixer,
    circuit_to_dicts,
    cost_layer_ops,
    init_uniform,
    mixer_layer_ops,
    prepare_w_states,
    qaoa_circuit_ops,
    ring_pairs,
    run_noisy,
    sample,
    simulate_circuit,
    two_qubit_gate_count,
    w_state_ops,
    zero_state,
)

angles = st.floats(min_value=-6.3, max_value=6.3, allow_nan=False)


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return QuantumState(amps / np.linalg.norm(amps))


# ---------------------------------------------------------------------------
# state preparation


def test_init_uniform_two_qubits():
    assert np.allclose(init_uniform(2).amplitudes, 0.25**0.5)


def test_init_uniform_one_qubit():
    assert np.allclose(init_uniform(1).amplitudes, [1 / math.sqrt(2)] * 2)


def test_init_uniform_norm_at_twelve_qubits():
    assert init_uniform(12).norm() == pytest.approx(1.0, abs=1e-12)


def test_quantum_state_requires_normalization():
    with pytest.raises(ValueError, match="not normalized"):
        QuantumState(np.array([1.0, 1.0], dtype=complex))


def test_init_uniform_guard():
    with pytest.raises(ResourceLimitError):
        init_uniform(0)
    with pytest.raises(ResourceLimitError):
        init_uniform(25)


def test_w_state_one_stem_plus_dummy():
    state = prepare_w_states([Domain(members=(0,), dummy_index=1)], 2)
    expect = np.zeros(4, dtype=complex)
    expect[0b01] = expect[0b10] = 1 / math.sqrt(2)
    assert np.allclose(state.amplitudes, expect, atol=1e-12)


def test_w_state_two_singleton_domains():
    domains = [Domain(members=(0,), dummy_index=2), Domain(members=(1,), dummy_index=3)]
    probs = prepare_w_states(domains, 4).probabilities()
    # rings (0,2) and (1,3): exactly one qubit set per ring
    hot = [0b1100, 0b1001, 0b0110, 0b0011]
    assert np.allclose(probs[hot], 0.25, atol=1e-12)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.delete(probs, hot), 0.0, atol=1e-12)


@pytest.mark.parametrize("size", [2, 3, 4, 5, 6])
def test_w_state_uniform_weight_one_magnitudes(size):
    ring = tuple(range(size))
    state = simulate_circuit(w_state_ops(ring), size)
    probs = state.probabilities()
    for idx in range(2**size):
        weight = bin(idx).count("1")
        if weight == 1:
            assert probs[idx] == pytest.approx(1 / size, abs=1e-12)
        else:
            assert probs[idx] == pytest.approx(0.0, abs=1e-12)


def test_w_state_gate_cost_linear():
    assert two_qubit_gate_count(w_state_ops(tuple(range(5)))) == 8  # 2*(L-1)


def test_prepare_w_states_requires_domains():
    with pytest.raises(ValueError):
        prepare_w_states([], 0)


# ---------------------------------------------------------------------------
# layers


def toy_cost(n=2):
    ising = IsingModel(n=n, h=tuple([0.5] * n), constant=0.5 * n)
    return CostLayerSpec.from_ising(ising)  # integer spectrum: E = #zeros


def test_cost_layer_gamma_zero_is_identity():
    state = random_state(3, 1)
    out = apply_cost_layer(state, toy_cost(3), 0.0)
    assert np.allclose(out.amplitudes, state.amplitudes)


def test_cost_layer_preserves_probabilities():
    state = random_state(3, 2)
    out = apply_cost_layer(state, toy_cost(3), 0.77)
    assert np.allclose(out.probabilities(), state.probabilities(), atol=1e-12)


def test_cost_layer_pi_flips_odd_energy_states():
    spec = toy_cost(2)  # energies: |00| -> 2, |01|,|10| -> 1, |11| -> 0
    state = init_uniform(2)
    out = apply_cost_layer(state, spec, math.pi)
    signs = np.real(out.amplitudes / state.amplitudes)
    assert np.allclose(signs, [1, -1, -1, 1], atol=1e-12)


def test_x_mixer_beta_zero_identity():
    state = random_state(3, 3)
    assert np.allclose(apply_x_mixer(state, 0.0).amplitudes, state.amplitudes)


def test_x_mixer_half_pi_flips_all():
    out = apply_x_mixer(zero_state(3), math.pi / 2)
    probs = out.probabilities()
    assert probs[-1] == pytest.approx(1.0, abs=1e-12)


def test_x_mixer_pi_is_identity_up_to_phase():
    state = random_state(4, 4)
    out = apply_x_mixer(state, math.pi)
    overlap = abs(np.vdot(state.amplitudes, out.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-12)


@given(angles)
@settings(max_examples=25)
def test_x_mixer_preserves_norm(beta):
    out = apply_x_mixer(random_state(4, 5), beta)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def _pxy_spec():
    domains = [Domain(members=(0, 1, 2), dummy_index=4), Domain(members=(3,), dummy_index=5)]
    return MixerSpec.parity_xy(domains, 6), domains


def test_parity_xy_beta_zero_identity():
    spec, domains = _pxy_spec()
    state = prepare_w_states(domains, 6)
    out = apply_parity_xy_mixer(state, spec, 0.0)
    assert np.allclose(out.amplitudes, state.amplitudes, atol=1e-12)


def test_two_ring_applies_pair_once():
    spec = MixerSpec.parity_xy([Domain(members=(0,), dummy_index=1)], 2)
    assert ring_pairs((0, 1)) == [(0, 1)]
    beta = 0.37
    state = QuantumState(np.array([0, 1, 0, 0], dtype=complex))
    out = apply_parity_xy_mixer(state, spec, beta)
    # one application of exp(i*beta*(XX+YY)) on |01>
    expect = np.array([0, math.cos(2 * beta), 1j * math.sin(2 * beta), 0])
    assert np.allclose(out.amplitudes, expect, atol=1e-12)


@given(angles)
@settings(max_examples=25)
def test_parity_xy_preserves_hamming_weight_per_domain(beta):
    spec, domains = _pxy_spec()
    state = prepare_w_states(domains, 6)
    out = apply_parity_xy_mixer(state, spec, beta)
    probs = out.probabilities()
    leaked = 0.0
    for idx in range(2**6):
        bits = format(idx, "06b")
        ok = all(sum(int(bits[q]) for q in d.ring()) == 1 for d in domains)
        if not ok:
            leaked += probs[idx]
    assert leaked < 1e-10


def test_parity_xy_matches_decomposed_circuit():
    spec, _ = _pxy_spec()
    state = random_state(6, 7)
    beta = 0.713
    fast = apply_parity_xy_mixer(state, spec, beta)
    slow = simulate_circuit(mixer_layer_ops(spec, beta), 6, initial=state)
    assert np.allclose(fast.amplitudes, slow.amplitudes, atol=1e-11)


def test_cost_layer_matches_decomposed_circuit_up_to_global_phase():
    stems = enumerate_stems(Sequence("CCCAAAAGGGAAAGGGAAAA"), maximal_only=True)
    ising = to_ising(build_qubo(stems, QuboParams()))
    spec = CostLayerSpec.from_ising(ising)
    gamma = 0.47
    state = init_uniform(ising.n)
    fast = apply_cost_layer(state, spec, gamma)
    slow = simulate_circuit(cost_layer_ops(ising, gamma), ising.n, initial=state)
    phase = np.exp(-1j * gamma * ising.constant)
    assert np.allclose(fast.amplitudes, phase * slow.amplitudes, atol=1e-11)


def test_x_mixer_matches_decomposed_circuit():
    spec = MixerSpec.x_mixer(4)
    state = random_state(4, 11)
    beta = 1.234
    fast = apply_x_mixer(state, beta)
    slow = simulate_circuit(mixer_layer_ops(spec, beta), 4, initial=state)
    assert np.allclose(fast.amplitudes, slow.amplitudes, atol=1e-11)


# ---------------------------------------------------------------------------
# sampling


def test_sample_basis_state_single_entry():
    samples = sample(zero_state(3), 50, seed=1)
    assert samples.entries == (("000", 50),)


def test_sample_uniform_concentration():
    samples = sample(init_uniform(2), 10**6, seed=2)
    for _, count in samples.entries:
        assert count / 10**6 == pytest.approx(0.25, abs=0.002)


def test_sample_deterministic():
    state = random_state(4, 8)
    assert sample(state, 1000, seed=9) == sample(state, 1000, seed=9)


def test_sampleset_validation():
    with pytest.raises(ValueError):
        SampleSet(entries=(("00", 3),), shots=4)
    with pytest.raises(ValueError):
        SampleSet(entries=(("00", 2), ("00", 2)), shots=4)


def test_sampleset_ordering():
    s = SampleSet(entries=(("11", 5), ("00", 5), ("01", 7)), shots=17)
    assert s.entries == (("01", 7), ("00", 5), ("11", 5))
    assert s.max_frequency() == pytest.approx(7 / 17)


# ---------------------------------------------------------------------------
# noise


def _demo_circuit():
    stems = enumerate_stems(Sequence("CCCAAAAGGGAAAGGGAAAA"), maximal_only=True)
    ising = to_ising(build_qubo(stems, QuboParams()))
    cost = CostLayerSpec.from_ising(ising)
    mixer = MixerSpec.x_mixer(ising.n)
    return qaoa_circuit_ops(cost, mixer, [0.3, 0.2], [0.5, 0.7]), ising.n


def test_run_noisy_zero_error_matches_sample_exactly():
    ops, n = _demo_circuit()
    ideal = simulate_circuit(ops, n)
    assert run_noisy(ops, n, NoiseSpec(), 500, seed=7) == sample(ideal, 500, seed=7)


def test_run_noisy_forced_readout_flip():
    out = run_noisy([], 1, NoiseSpec(readout_flip=(1.0, 0.0)), 100, seed=3)
    assert out.entries == (("1", 100),)


def test_run_noisy_preserves_shot_count_and_determinism():
    ops, n = _demo_circuit()
    spec = NoiseSpec(two_qubit_error=0.05, readout_flip=(0.01, 0.02))
    a = run_noisy(ops, n, spec, 300, seed=5)
    b = run_noisy(ops, n, spec, 300, seed=5)
    assert a == b and a.shots == 300


def test_run_noisy_degrades_monotonically():
    # ground-state weight of a concentrated parity-xy circuit decays with p2
    domains = [Domain(members=(0, 1), dummy_index=2)]
    mixer = MixerSpec.parity_xy(domains, 3)
    ising = IsingModel(n=3, h=(1.0, -1.0, 0.0), constant=0.0)
    cost = CostLayerSpec.from_ising(ising)
    ops = qaoa_circuit_ops(cost, mixer, [0.4, 0.3], [0.5, 0.6])
    ideal = simulate_circuit(ops, 3)
    top = format(int(np.argmax(ideal.probabilities())), "03b")

    freqs = []
    for p2 in (0.0, 0.02, 0.1, 0.3):
        out = run_noisy(ops, 3, NoiseSpec(two_qubit_error=p2), 2000, seed=11)
        freqs.append(dict(out.entries).get(top, 0) / 2000)
    assert freqs[0] > freqs[-1]
    for a, b in zip(freqs, freqs[1:]):
        assert b <= a + 0.05  # multinomial tolerance


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(two_qubit_error=1.5)
    with pytest.raises(ValueError):
        NoiseSpec(readout_flip=(0.5, -0.1))


# ---------------------------------------------------------------------------
# circuits


def test_circuit_trace_export_shape():
    ops, _ = _demo_circuit()
    trace = circuit_to_dicts(ops)
    assert all(set(t) <= {"gate", "qubits", "param"} for t in trace)
    assert any(t["gate"] == "cnot" for t in trace)


def test_cost_layer_two_qubit_count_is_twice_couplings():
    stems = enumerate_stems(Sequence("AAAGUCGCUGAAGACUUAAAAUUCAGG"))
    ising = to_ising(build_qubo(stems, QuboParams()))
    ops = cost_layer_ops(ising, 0.9)
    nonzero = sum(1 for v in ising.J.values() if v)
    assert two_qubit_gate_count(ops) == 2 * nonzero


def test_mixer_layer_two_qubit_counts():
    spec, domains = _pxy_spec()
    ops = mixer_layer_ops(spec, 0.4)
    # ring of 4 -> 4 pairs, ring of 2 -> 1 pair; 4 gates per pair
    assert two_qubit_gate_count(ops) == 4 * 4 + 4 * 1
    assert two_qubit_gate_count(mixer_layer_ops(MixerSpec.x_mixer(5), 0.4)) == 0


@given(angles, angles)
@settings(max_examples=15)
def test_simulate_circuit_preserves_norm(beta, gamma):
    ops, n = _demo_circuit()
    spec = CostLayerSpec.from_ising(IsingModel(n=n, h=tuple([0.3] * n), constant=0.0))
    extra = qaoa_circuit_ops(spec, MixerSpec.x_mixer(n), [beta], [gamma])
    state = simulate_circuit(ops + extra, n)
    assert state.norm() == pytest.approx(1.0, abs=1e-10)
