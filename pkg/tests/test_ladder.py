import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centralspin.ladder import (
    DOWN_X,
    UP_X,
    antipolarized_state,
    bath_state,
    build_basis,
    central_state,
    check_state,
    classical_i_sq,
    ensemble_for_manifold,
    flipflop_same_species,
    i1z,
    i2z,
    impurity,
    ladder_raising,
    ladder_raising_elements,
    manifold_distribution,
    manifold_for_ensemble,
    manifold_probability,
    observables,
    reset_map,
    singlet_amplitudes,
    singlet_state,
    thermal_mixture,
    total_spin_squared,
    trace_distance,
    with_central_down,
)
from conftest import ProductSpace

half_integers = st.integers(1, 12).map(lambda k: k / 2)


def random_state(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_basis_dimensions():
    b = build_basis(4, 4)
    assert (b.dim_bath, b.dim_total) == (9, 18)
    assert build_basis(0.5, 0.5).dim_bath == 2
    b = build_basis(3, 5)
    assert (b.dim_bath, b.M) == (7, 3)


def test_unequal_basis_matches_product_enumeration():
    ps = ProductSpace(3, 5)
    # product states with I1^z + I2^z = 0 form the ladder
    assert ps.P.shape[1] == build_basis(3, 5).dim_bath


@pytest.mark.parametrize("I1,I2", [(0, 1), (-1, 1), (0.3, 1), (1, 1.25)])
def test_basis_rejects_invalid_spins(I1, I2):
    with pytest.raises(ValueError):
        build_basis(I1, I2)


def test_enhancement_examples():
    e = ladder_raising_elements(build_basis(4, 4))
    assert e[0] == 8 and e[3] == 20
    assert np.array_equal(ladder_raising_elements(build_basis(0.5, 0.5)), [1.0])


@pytest.mark.parametrize("I1,I2", [(0.5, 0.5), (1, 1), (1.5, 1.5), (2, 3), (3, 1), (2.5, 0.5), (3, 3)])
def test_restricted_operators_match_product_space(I1, I2):
    ps = ProductSpace(I1, I2)
    b = build_basis(I1, I2)
    np.testing.assert_allclose(ladder_raising(b), ps.project(ps.p1 @ ps.m2), atol=1e-10)
    np.testing.assert_allclose(i1z(b), ps.project(ps.z1), atol=1e-12)
    np.testing.assert_allclose(i2z(b), ps.project(ps.z2), atol=1e-12)
    same = ps.p1 @ ps.m1 + ps.m1 @ ps.p1 + ps.p2 @ ps.m2 + ps.m2 @ ps.p2
    np.testing.assert_allclose(flipflop_same_species(b), ps.project(same), atol=1e-10)
    np.testing.assert_allclose(total_spin_squared(b), ps.project(ps.isq), atol=1e-10)
    # the ladder is closed under every operator used
    for op in (ps.p1 @ ps.m2, ps.z1 @ ps.z2, same):
        leak = op @ ps.P - ps.P @ ps.project(op)
        assert np.max(np.abs(leak)) < 1e-10


@given(half_integers)
def test_equal_spin_enhancement_is_exact(I):
    b = build_basis(I, I)
    n = np.arange(b.dim_bath - 1)
    assert np.array_equal(ladder_raising_elements(b), (2 * I - n) * (n + 1))


@given(half_integers, half_integers)
def test_enhancement_general_formula_symmetric(I1, I2):
    if (I1 - I2) % 1:
        return
    e12 = ladder_raising_elements(build_basis(I1, I2))
    e21 = ladder_raising_elements(build_basis(I2, I1))
    # swapping species reverses the ladder
    np.testing.assert_allclose(e12, e21[::-1], rtol=1e-12)
    assert np.all(e12 > 0)


def test_antipolarized_observables():
    b = build_basis(4, 4)
    o = observables(antipolarized_state(b), b)
    assert (o.i1z, o.i2z, o.sx) == (-4, 4, -0.5)
    assert abs(o.impurity) < 1e-15
    assert o.i_sq == pytest.approx(8, abs=1e-12)
    b = build_basis(3, 5)
    assert observables(antipolarized_state(b), b).i_sq == pytest.approx(24, abs=1e-12)
    assert classical_i_sq(b) == 24
    ps = ProductSpace(3, 5)
    v = ps.P[:, 0]
    assert np.real(v @ ps.isq @ v) == pytest.approx(24)


def test_singlet_amplitudes_and_i_sq():
    b = build_basis(1, 1)
    np.testing.assert_allclose(singlet_amplitudes(b), np.array([1, -1, 1]) / math.sqrt(3))
    b = build_basis(4, 4)
    assert abs(observables(singlet_state(b), b).i_sq) < 1e-12
    with pytest.raises(ValueError, match="no singlet"):
        singlet_state(build_basis(3, 5))


def test_singlet_is_product_space_zero_mode():
    ps = ProductSpace(0.5, 0.5)
    w, v = np.linalg.eigh(ps.isq)
    zero = v[:, np.argmin(np.abs(w))]
    lad = ps.P.T @ zero
    chi = singlet_amplitudes(build_basis(0.5, 0.5))
    assert abs(abs(np.vdot(chi, lad)) - 1) < 1e-12
    # (|up down> - |down up>)/sqrt(2): ladder n=0 is |m1=-1/2, m2=+1/2>
    assert abs(np.vdot(chi, lad)) == pytest.approx(1)


def test_thermal_mixture():
    b = build_basis(4, 4)
    o = observables(thermal_mixture(b), b)
    assert o.impurity == pytest.approx(1 - 1 / 9, abs=1e-15)
    assert abs(o.i1z) < 1e-15
    assert o.i_sq == pytest.approx(np.mean(np.real(np.diag(total_spin_squared(b)))))


def test_trace_distance_against_singlet():
    b = build_basis(4, 4)
    chi = np.outer(singlet_amplitudes(b), singlet_amplitudes(b).conj())
    o = observables(singlet_state(b), b, target=chi)
    assert o.trace_dist < 1e-12
    o = observables(thermal_mixture(b), b, target=chi)
    diff = np.eye(9) / 9 - chi
    assert o.trace_dist == pytest.approx(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())
    # maximally mixed vs a pure state: 1 - 1/d
    assert o.trace_dist == pytest.approx(1 - 1 / 9)


def test_reset_map_examples():
    b = build_basis(1, 1)
    rho_b = random_state(3, np.random.default_rng(1))
    up = np.zeros((2, 2))
    up[UP_X, UP_X] = 1
    np.testing.assert_allclose(reset_map(np.kron(up, rho_b)), with_central_down(rho_b))
    # central spin maximally entangled with two rungs
    psi = np.zeros(6, dtype=complex)
    psi[DOWN_X * 3 + 0] = psi[UP_X * 3 + 1] = 1 / math.sqrt(2)
    out = reset_map(np.outer(psi, psi.conj()))
    assert np.trace(out) == pytest.approx(1)
    assert impurity(bath_state(out)) == pytest.approx(0.5)


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_reset_map_properties(two_i, seed):
    b = build_basis(two_i / 2, two_i / 2)
    rho = random_state(b.dim_total, np.random.default_rng(seed))
    out = reset_map(rho)
    check_state(out)
    np.testing.assert_allclose(reset_map(out), out, atol=1e-14)
    assert impurity(bath_state(out)) == pytest.approx(impurity(bath_state(rho)), abs=1e-12)
    np.testing.assert_allclose(central_state(out), np.diag([1, 0]), atol=1e-14)


@settings(max_examples=30)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_observable_bounds(two_i, seed):
    b = build_basis(two_i / 2, two_i / 2)
    rho = random_state(b.dim_total, np.random.default_rng(seed))
    o = observables(rho, b)
    assert -1e-12 <= o.impurity <= 1 - 1 / b.dim_bath + 1e-12
    assert abs(o.sx) <= 0.5 + 1e-12
    assert abs(o.i1z) <= b.I1 + 1e-12 and abs(o.i2z) <= b.I2 + 1e-12
    assert o.i_sq >= -1e-10


def test_check_state_rejects_bad_matrices():
    with pytest.raises(ValueError, match="trace"):
        check_state(np.eye(2) * 0.7)
    with pytest.raises(ValueError, match="Hermitian"):
        check_state(np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(ValueError, match="negative"):
        check_state(np.diag([1.5, -0.5]))


def test_trace_distance_symmetric():
    rng = np.random.default_rng(3)
    a, b = random_state(4, rng), random_state(4, rng)
    assert trace_distance(a, b) == pytest.approx(trace_distance(b, a))
    assert trace_distance(a, a) == pytest.approx(0, abs=1e-14)


def test_manifold_statistics():
    grid = np.arange(0, 12.5, 0.5)
    p = manifold_distribution(grid, grid, 32)
    assert p.sum() == pytest.approx(1)
    i, j = np.unravel_index(np.argmax(p), p.shape)
    assert abs(grid[i] - 4) <= 0.5 and abs(grid[j] - 4) <= 0.5
    assert manifold_probability(0, 3, 32) == 0
    assert manifold_probability(2, 5, 32) == pytest.approx(manifold_probability(5, 2, 32))
    with pytest.raises(ValueError):
        manifold_probability(1, 1, 0)


def test_ensemble_conversion():
    assert manifold_for_ensemble(32) == 4
    assert ensemble_for_manifold(4) == 32
    assert manifold_for_ensemble(200) == 10
