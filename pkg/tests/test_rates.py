import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from centralspin import checks, rates
from centralspin.lindblad import LiouvillianSpec, steady_state
from centralspin.rates import (
    RateParams,
    analytic_impurity,
    build_lambda,
    closed_form_impurity,
    dephasing_scan,
    detuning_scan,
    drive_strengths,
    recursion_populations,
    relaxation_rate,
    resonance_fwhm,
    scattering_rates,
    steady_populations,
    steady_populations_only,
)

spins = st.integers(1, 60).map(lambda k: k / 2)
kappas = st.floats(0.2, 30)
dephasings = st.floats(0, 5)


def two_level_oracle(alpha, detuning, gamma_op, gamma_d):
    """Reset-rate times excited population of a driven, damped two-level system."""
    H = np.array([[0, alpha / 2], [alpha / 2, detuning]], complex)
    lower = np.array([[0, 1], [0, 0]], complex)
    channels = [(gamma_op, lower)]
    if gamma_d > 0:
        channels.append((gamma_d / 2, np.diag([1, -1]).astype(complex)))
    rho = steady_state(LiouvillianSpec(H, channels))
    return gamma_op * rho[1, 1].real


def test_lowest_rung_has_no_downward_rate():
    p = RateParams.from_kappa(4, 5)
    r_plus, r_minus = scattering_rates(p)
    assert r_minus[0] == 0 and r_plus[-1] == 0


def test_drive_strengths_match_enhancement():
    a_plus, a_minus = drive_strengths(RateParams.from_kappa(4, 1))
    assert a_plus[0] == 8 and a_minus[1] == 8
    np.testing.assert_array_equal(a_plus[:-1], a_minus[1:])


@pytest.mark.parametrize("n", [0, 2, 5])
@pytest.mark.parametrize("nd", [0.0, 0.4])
def test_rates_match_two_level_master_equation(n, nd):
    p = RateParams.from_kappa(3, 0.8, norm_dephasing=nd)
    a_plus, a_minus = drive_strengths(p)
    r_plus, r_minus = scattering_rates(p, n)
    ref_plus = two_level_oracle(a_plus[n], p.drive + p.delta_omega, p.gamma_op, p.gamma_d)
    assert r_plus == pytest.approx(ref_plus, rel=1e-9)
    if n > 0:
        ref_minus = two_level_oracle(a_minus[n], p.drive - p.delta_omega, p.gamma_op, p.gamma_d)
        assert r_minus == pytest.approx(ref_minus, rel=1e-9)


def test_up_down_ratio_identity():
    # on resonance the upward channel is detuned by 2 delta omega, the downward one is not
    p = RateParams.from_kappa(10, 4, norm_dephasing=0.2)
    r_plus, r_minus = scattering_rates(p)
    a, _ = drive_strengths(p)
    gop, gp = p.gamma_op, p.gamma_prime
    s = a[:-1] ** 2 / (gop * gp)
    expected = (1 + s) / (1 + s + (2 * p.delta_omega / gp) ** 2)
    np.testing.assert_allclose(r_plus[:-1] / r_minus[1:], expected, rtol=1e-12)


def test_thermodynamic_contrast():
    p = RateParams.from_kappa(7, 3.3, norm_dephasing=0.6)
    assert 4 * p.delta_omega**2 / p.gamma_prime**2 == pytest.approx(
        64 * p.kappa**2 / (1 + 2 * p.norm_dephasing) ** 2)


@settings(max_examples=40, deadline=None)
@given(spins, kappas, dephasings)
def test_lambda_generator_properties(I, kappa, nd):
    p = RateParams.from_kappa(I, kappa, norm_dephasing=nd)
    lam = build_lambda(p)
    scale = np.abs(lam).max()
    assert np.abs(lam.sum(axis=0)).max() <= 1e-12 * scale
    off = lam - np.diag(np.diag(lam))
    assert off.min() >= 0
    p_ss = steady_populations_only(p)
    assert np.abs(lam @ p_ss).max() <= 1e-10 * scale
    assert p_ss.sum() == pytest.approx(1)
    assert p_ss.min() >= 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20).map(lambda k: k / 2), st.floats(0.2, 3), st.floats(0, 2))
def test_recursion_matches_flux_form(I, kappa, nd):
    p = RateParams.from_kappa(I, kappa, norm_dephasing=nd)
    np.testing.assert_allclose(recursion_populations(p), steady_populations_only(p),
                               rtol=1e-6, atol=1e-13)


def test_populations_match_kernel():
    p = RateParams.from_kappa(5.5, 2.0, norm_dephasing=0.3)
    kernel = scipy.linalg.null_space(build_lambda(p))
    v = kernel[:, 0] / kernel[:, 0].sum()
    np.testing.assert_allclose(steady_populations_only(p), v, atol=1e-12)


def test_simplex_conserved_and_relaxes():
    p = RateParams.from_kappa(3, 1.5)
    lam = build_lambda(p)
    p0 = np.full(p.size, 1 / p.size)
    sol = steady_populations(p)
    for t in (0.1, 1, 10):
        pt = scipy.linalg.expm(lam * t) @ p0
        assert pt.sum() == pytest.approx(1, abs=1e-12)
        assert pt.min() >= -1e-14
    late = scipy.linalg.expm(lam * 20 * sol.t_c) @ p0
    np.testing.assert_allclose(late, sol.populations, atol=1e-10)
    # the slowest mode sets the approach
    w = np.sort(np.linalg.eigvals(lam).real)[::-1]
    assert relaxation_rate(p) == pytest.approx(abs(w[1]), rel=1e-9)


def test_convergence_slows_with_dephasing():
    p = RateParams.from_kappa(20, 10)
    rows = dephasing_scan(p, [0, 0.5 * p.gamma_op, 2 * p.gamma_op, 8 * p.gamma_op])
    t_c = [r.t_c for r in rows]
    assert all(b > a for a, b in zip(t_c, t_c[1:]))
    assert [r.norm_dephasing for r in rows] == [0, 0.5, 2, 8]


def test_two_level_limit():
    # I = 1/2: two rungs, impurity 2 p0 p1 from the single rate ratio
    p = RateParams.from_kappa(0.5, 2.0, norm_dephasing=0.5)
    r_plus, r_minus = scattering_rates(p)
    x = r_plus[0] / r_minus[1]
    p0, p1 = 1 / (1 + x), x / (1 + x)
    assert steady_populations(p).impurity == pytest.approx(1 - p0**2 - p1**2, rel=1e-12)
    two_level, _ = analytic_impurity(p)
    assert 0 < two_level < 1


@pytest.mark.parametrize("kappa,nd", [(3, 0), (10, 0), (10, 1), (5, 3)])
def test_closed_form_at_large_spin(kappa, nd):
    p = RateParams.from_kappa(200, kappa, norm_dephasing=nd)
    ref = float(closed_form_impurity(kappa, nd))
    assert steady_populations(p).impurity == pytest.approx(ref, rel=0.03)
    assert analytic_impurity(p)[1] == pytest.approx(ref)


def test_closed_form_vectorized():
    out = closed_form_impurity([1, 2], [[0], [1]])
    assert out.shape == (2, 2)
    assert out[0, 0] == pytest.approx(2 / 65)


def test_fwhm_of_lorentzian():
    x = np.linspace(-10, 10, 4001)
    y = 1 / (1 / (1 + (x / 1.5) ** 2))
    assert resonance_fwhm(x, y) == pytest.approx(3.0, rel=1e-4)
    with pytest.raises(ValueError, match="not resolved"):
        resonance_fwhm(x[1900:2100], y[1900:2100])


def test_detuning_scan_peaks_on_resonance():
    p = RateParams.from_kappa(20, 5)
    omegas = p.delta_omega * np.linspace(0.5, 1.5, 101)
    rows = detuning_scan(p, omegas, [0.0])
    eps = np.array([r.impurity for r in rows])
    assert omegas[np.argmin(eps)] == pytest.approx(p.delta_omega, rel=0.011)


def test_resonance_check_detects_sign_error(monkeypatch):
    # a sign slip in the downward channel's detuning moves its resonance to
    # Omega = -delta omega; the resilience check must notice
    assert checks.check_dephasing_resilience().passed

    def wrong(params, n=None):
        a_plus, a_minus = drive_strengths(params)
        r_plus = rates._two_level_rate(a_plus, params.drive + params.delta_omega, params)
        r_minus = rates._two_level_rate(a_minus, params.drive + params.delta_omega, params)
        return (r_plus, r_minus) if n is None else (float(r_plus[n]), float(r_minus[n]))

    monkeypatch.setattr(rates, "scattering_rates", wrong)
    assert not checks.check_dephasing_resilience().passed


def test_resonance_check_detects_swapped_detunings(monkeypatch):
    # swapping both detunings mirrors the ladder: the bath is still pure, but in
    # the top rung, so only the target-rung condition of the check can catch it
    def mirrored(params, n=None):
        a_plus, a_minus = drive_strengths(params)
        r_plus = rates._two_level_rate(a_plus, params.drive - params.delta_omega, params)
        r_minus = rates._two_level_rate(a_minus, params.drive + params.delta_omega, params)
        return (r_plus, r_minus) if n is None else (float(r_plus[n]), float(r_minus[n]))

    monkeypatch.setattr(rates, "scattering_rates", mirrored)
    pop = steady_populations_only(RateParams.from_kappa(10, 10))
    assert pop[-1] > 0.99 and pop[0] < 1e-6
    result = checks.check_dephasing_resilience()
    assert result.values["argmin_omega_over_dw"] == 1.0
    assert not result.passed


def test_zero_coupling_rejected():
    p = RateParams(I=2, g=0.0, delta_omega=1, gamma_op=1)
    with pytest.raises(ZeroDivisionError):
        steady_populations(p)


@pytest.mark.parametrize("kw", [dict(I=0), dict(I=1.3), dict(g=-1), dict(gamma_d=-0.1)])
def test_rate_params_validation(kw):
    base = dict(I=2, g=1, delta_omega=1, gamma_op=1)
    with pytest.raises(ValueError):
        RateParams(**{**base, **kw})


def test_kappa_roundtrip():
    p = RateParams.from_kappa(12.5, 7.25, g=0.3, norm_dephasing=0.4)
    assert p.kappa == pytest.approx(7.25)
    assert p.norm_dephasing == pytest.approx(0.4)
    assert replace(p, Omega=1.0).drive == 1.0
    assert math.isclose(p.gamma_op, 4 * 12.5**2 * 0.3)
