import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from centralspin.hamiltonian import build_exchange_hamiltonian
from centralspin.ladder import build_basis, singlet_amplitudes
from centralspin.singlet import (
    EXACT,
    SIMPLIFIED,
    GateSequence,
    OptimizationError,
    OptimizerConfig,
    analytic_gradient,
    apply_sequence,
    composite_boundaries,
    cost,
    exchange_gate,
    finite_difference_gradient,
    ideal_sequence,
    init_guess,
    ladder_for_k,
    padded_ideal_sequence,
    prepare,
    refocus_check,
    rmsprop_optimize,
    simplified_pi_time,
    z_gate,
)

SIGMA_Z = np.array([[0, 1], [1, 0]], complex)  # x-basis representation


def sequences(K):
    n = 2**K - 1
    return st.lists(st.tuples(st.floats(0, 2 * math.pi), st.floats(0.01, 0.6)), min_size=n,
                    max_size=n).map(GateSequence)


@settings(max_examples=20)
@given(st.floats(-10, 10), st.floats(0, 5), st.integers(1, 3))
def test_gates_unitary(phi, tau, K):
    b = ladder_for_k(K)
    for U in (z_gate(phi, b), exchange_gate(tau, b)):
        np.testing.assert_allclose(U.conj().T @ U, np.eye(len(U)), atol=1e-12)


@pytest.mark.parametrize("I", [0.5, 1.5, 3])
@pytest.mark.parametrize("tau", [0.0, 0.13, 0.9])
def test_exchange_gate_matches_expm(I, tau):
    b = build_basis(I, I)
    H = build_exchange_hamiltonian(b, 0.8)
    np.testing.assert_allclose(exchange_gate(tau, b, g=0.8), scipy.linalg.expm(-1j * tau * H),
                               atol=1e-12)


def test_z_gate_matches_expm():
    b = build_basis(1, 1)
    ref = np.kron(scipy.linalg.expm(-0.5j * 0.7 * SIGMA_Z), np.eye(3))
    np.testing.assert_allclose(z_gate(0.7, b), ref, atol=1e-14)


@pytest.mark.parametrize("K", [1, 2, 3, 4, 5])
def test_ideal_gate_count(K):
    seq = ideal_sequence(K)
    assert seq.gate_count == 2 * (2**K - 1)
    assert composite_boundaries(K)[-1] == len(seq)


def test_k1_is_two_steps():
    assert init_guess(1).gate_count == 2
    assert ideal_sequence(1).steps == [(math.pi / 2, math.pi / 2)]


@pytest.mark.parametrize("K", [1, 2, 3])
def test_ideal_sequence_reaches_uniform_singlet(K):
    b = ladder_for_k(K)
    seq = ideal_sequence(K, basis=b)
    _, diags = apply_sequence(seq, b)
    # the uniform-coupling ladder has no enhancement, so compare against |c_n| = 1/sqrt(d)
    psi = prepare(seq, b)
    d = b.dim_bath
    bath_weights = np.abs(psi.reshape(2, d)) ** 2
    np.testing.assert_allclose(bath_weights.sum(axis=0), np.full(d, 1 / d), atol=1e-12)
    assert diags[-1].trace_dist < 1e-12
    # each composite doubles the number of occupied rungs
    for j, stop in enumerate(composite_boundaries(K), start=1):
        occupied = np.count_nonzero(np.abs(prepare(GateSequence(seq.steps[:stop], SIMPLIFIED), b)) > 1e-9)
        assert occupied == 2**j


def test_diagnostics_recorded_per_gate():
    b = ladder_for_k(2)
    _, diags = apply_sequence(ideal_sequence(2), b)
    assert [dg.gates for dg in diags] == list(range(7))
    assert diags[0].singlet_overlap == pytest.approx(1 / 4)
    assert diags[-1].singlet_overlap == pytest.approx(1)
    assert diags[-1].i_sq == pytest.approx(0, abs=1e-10)


def test_simplified_gate_only_at_pi_time():
    b = ladder_for_k(2)
    exchange_gate(simplified_pi_time(), b, SIMPLIFIED)
    with pytest.raises(ValueError, match="pi-gate"):
        exchange_gate(0.3, b, SIMPLIFIED)
    with pytest.raises(ValueError):
        rmsprop_optimize(ideal_sequence(2), OptimizerConfig(max_epochs=1), b)


def test_init_guess_durations():
    b = ladder_for_k(3)  # I = 7/2
    seq = init_guess(3, b)
    assert seq.taus[0] == pytest.approx(math.pi / (2 * 7))
    assert init_guess(3).model == EXACT
    with pytest.raises(ValueError):
        init_guess(2, b)
    # largest enhancement on the I = 4 ladder: (8 - 3)(3 + 1)
    assert build_exchange_hamiltonian(build_basis(4, 4), 1.0).max() == pytest.approx(20)


@settings(max_examples=15, deadline=None)
@given(sequences(2))
def test_gradient_matches_finite_differences(seq):
    b = ladder_for_k(2)
    c, grad = analytic_gradient(seq, b)
    assert c == pytest.approx(cost(seq, b), abs=1e-14)
    np.testing.assert_allclose(grad, finite_difference_gradient(seq, b), atol=1e-7)


def test_gradient_k3_random():
    rng = np.random.default_rng(5)
    b = ladder_for_k(3)
    seq = GateSequence(list(zip(rng.uniform(0, 2 * math.pi, 7), rng.uniform(0, 0.3, 7))))
    _, grad = analytic_gradient(seq, b)
    np.testing.assert_allclose(grad, finite_difference_gradient(seq, b), atol=1e-7)


def test_zero_learning_rate_keeps_parameters():
    b = ladder_for_k(2)
    seq = init_guess(2, b)
    rep = rmsprop_optimize(seq, OptimizerConfig(zeta=0.0, max_epochs=5), b)
    np.testing.assert_array_equal(rep.final.parameters(), seq.parameters())
    assert len(set(rep.cost_trace)) == 1


def test_optimizer_improves_cost():
    b = ladder_for_k(2)
    rep = rmsprop_optimize(init_guess(2, b), OptimizerConfig(max_epochs=300), b)
    assert rep.final_cost <= rep.cost_trace[0]
    assert rep.final_trace_dist < 0.05
    assert len(rep.cost_trace) == rep.epochs + 1
    assert min(rep.final.taus) >= 0


def test_optimizer_aborts_on_nan():
    b = ladder_for_k(2)
    seq = GateSequence([(math.nan, 0.1)] * 3)
    with pytest.raises(OptimizationError):
        rmsprop_optimize(seq, OptimizerConfig(max_epochs=3), b)


@pytest.mark.parametrize("kw", [dict(beta=1.0), dict(beta=0.0), dict(zeta=-1), dict(xi=0),
                                dict(tau_unit=0)])
def test_optimizer_config_validation(kw):
    with pytest.raises(ValueError):
        OptimizerConfig(**kw)


def test_json_round_trip():
    seq = GateSequence([(7.0, 0.1), (0.5, 0.2)])
    back = GateSequence.from_json(seq.to_json(ladder_for_k(1)))
    assert back.phis[0] == pytest.approx(7.0 - 2 * math.pi)
    np.testing.assert_allclose(back.taus, seq.taus)
    assert back.model == EXACT
    with pytest.raises(ValueError):
        GateSequence([(0.0, -1.0)])
    with pytest.raises(ValueError):
        GateSequence([], model="other")


@pytest.mark.parametrize("I", [1, 2, 1.5, 4])
def test_refocus_full_period(I):
    chi = singlet_amplitudes(build_basis(I, I))
    assert refocus_check(chi, 3.0, 2 * math.pi / 3.0) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("I", [1, 2, 1.5, 2.5, 4])
def test_refocus_half_period(I):
    # the alternating signs cancel: overlap 1/d^2 for odd d, zero for even d
    d = int(2 * I + 1)
    chi = singlet_amplitudes(build_basis(I, I))
    expected = 1 / d**2 if d % 2 else 0.0
    assert refocus_check(chi, 3.0, math.pi / 3.0) == pytest.approx(expected, abs=1e-12)


def test_refocus_full_vector():
    b = ladder_for_k(2)
    psi = prepare(ideal_sequence(2), b)
    assert refocus_check(psi, 1.0, 2 * math.pi, b) == pytest.approx(1)


def test_padded_sequence_length():
    b = build_basis(2, 2)
    assert len(padded_ideal_sequence(b)) == 4
    with pytest.raises(ValueError):
        ladder_for_k(0)
