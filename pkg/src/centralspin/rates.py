"""
Classical rate-equation model of the purification ladder (I1 = I2 = I).

Population flows from rung n to n +/- 1 at the scattering rate r_n^+/-, the
steady excited population of the two-level system {|down_x, n>, |up_x, n+/-1>}
times the reset rate. All frequencies share one unit; the defaults of
:meth:`RateParams.from_kappa` use g = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class RateParams:
    I: float
    g: float
    delta_omega: float
    gamma_op: float
    gamma_d: float = 0.0
    Omega: Optional[float] = None

    def __post_init__(self):
        if self.I <= 0 or not math.isclose(2 * self.I, round(2 * self.I)):
            raise ValueError("I must be a positive integer or half-integer")
        for name in ("g", "delta_omega", "gamma_op", "gamma_d"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_kappa(cls, I: float, kappa: float, g: float = 1.0, norm_dephasing: float = 0.0,
                   **kw) -> "RateParams":
        """Operating point with N = 2 I^2, Gamma_op = N a^2/(2 omega_c) = 2 N g.

        ``norm_dephasing`` is Gamma_d tau0 / (2 pi) = Gamma_d / Gamma_op.
        """
        N = 2 * I * I
        gamma_op = 2 * N * g
        return cls(I=I, g=g, delta_omega=4 * kappa * N * g, gamma_op=gamma_op,
                   gamma_d=norm_dephasing * gamma_op, **kw)

    @property
    def drive(self) -> float:
        return self.delta_omega if self.Omega is None else self.Omega

    @property
    def gamma_prime(self) -> float:
        return self.gamma_op / 2 + self.gamma_d

    @property
    def size(self) -> int:
        return round(2 * self.I) + 1

    @property
    def kappa(self) -> float:
        return self.delta_omega / (4 * 2 * self.I**2 * self.g)

    @property
    def norm_dephasing(self) -> float:
        return self.gamma_d / self.gamma_op


def drive_strengths(params: RateParams):
    """(alpha_n^+, alpha_n^-) for n = 0 .. 2I."""
    n = np.arange(params.size, dtype=float)
    two_i = 2 * params.I
    return params.g * (two_i - n) * (n + 1), params.g * (two_i - n + 1) * n


def _two_level_rate(alpha, detuning, params: RateParams):
    gop, gp = params.gamma_op, params.gamma_prime
    s = alpha**2 / (gop * gp)
    return gop / 2 * s / (1 + s + (detuning / gp) ** 2)


def scattering_rates(params: RateParams, n=None):
    """Rates (r^+, r^-) out of rung ``n`` (all rungs when ``n`` is None)."""
    a_plus, a_minus = drive_strengths(params)
    r_plus = _two_level_rate(a_plus, params.drive + params.delta_omega, params)
    r_minus = _two_level_rate(a_minus, params.drive - params.delta_omega, params)
    if n is None:
        return r_plus, r_minus
    return float(r_plus[n]), float(r_minus[n])


def build_lambda(params: RateParams) -> np.ndarray:
    """Generator of dp/dt = Lambda p; columns sum to zero."""
    r_plus, r_minus = scattering_rates(params)
    lam = np.diag(-(r_plus + r_minus))
    lam += np.diag(r_plus[:-1], k=-1)   # n -> n+1
    lam += np.diag(r_minus[1:], k=1)    # n -> n-1
    return lam


@dataclass
class RateSolution:
    params: RateParams
    populations: np.ndarray
    rates_up: np.ndarray
    rates_down: np.ndarray
    impurity: float
    lambda_matrix: np.ndarray
    relaxation_rate: float

    @property
    def t_c(self) -> float:
        """Convergence time 2 pi / |Re lambda_1|."""
        return 2 * math.pi / self.relaxation_rate

    @property
    def fidelity_n0(self) -> float:
        return float(self.populations[0])


def _check_rates(r_minus, params):
    if params.g == 0 or params.gamma_prime == 0 or np.any(r_minus[1:] <= 0):
        raise ZeroDivisionError("downward rates vanish (g = 0 or Gamma' = 0); no unique steady state")


def recursion_populations(params: RateParams) -> np.ndarray:
    """Steady populations from the three-term recurrence, compensated sums, float64.

    Loses relative accuracy on strongly suppressed rungs (the recurrence
    subtracts nearly equal terms); kept as a cross-check of
    :func:`steady_populations`.
    """
    r_plus, r_minus = scattering_rates(params)
    _check_rates(r_minus, params)
    size = params.size
    p = np.zeros(size)
    p[0] = 1.0
    if size > 1:
        p[1] = r_plus[0] / r_minus[1] * p[0]
    for n in range(size - 2):
        p[n + 2] = math.fsum([(r_minus[n + 1] + r_plus[n + 1]) * p[n + 1],
                              -r_plus[n] * p[n]]) / r_minus[n + 2]
    return p / math.fsum(p)


def steady_populations_only(params: RateParams) -> np.ndarray:
    r_plus, r_minus = scattering_rates(params)
    _check_rates(r_minus, params)
    # stationary birth-death chain: zero net flux across every edge, which is
    # the first integral of the three-term recurrence
    ratios = r_plus[:-1] / r_minus[1:]
    log_p = np.concatenate([[0.0], np.cumsum(np.log(ratios))])
    p = np.exp(log_p - log_p.max())
    return p / math.fsum(p)


def relaxation_rate(params: RateParams) -> float:
    """|Re lambda_1|, the slowest non-zero decay rate of Lambda."""
    r_plus, r_minus = scattering_rates(params)
    _check_rates(r_minus, params)
    if params.size == 1:
        return math.inf
    # similarity transform to a symmetric tridiagonal matrix (detailed balance)
    diag = -(r_plus + r_minus)
    off = np.sqrt(r_plus[:-1] * r_minus[1:])
    w = scipy.linalg.eigh_tridiagonal(diag, off, eigvals_only=True)
    w = np.sort(w)[::-1]
    return float(abs(w[1]))


def steady_populations(params: RateParams) -> RateSolution:
    p = steady_populations_only(params)
    r_plus, r_minus = scattering_rates(params)
    return RateSolution(
        params=params,
        populations=p,
        rates_up=r_plus,
        rates_down=r_minus,
        impurity=float(1 - math.fsum(p**2)),
        lambda_matrix=build_lambda(params),
        relaxation_rate=relaxation_rate(params),
    )


def analytic_impurity(params: RateParams):
    """(two-level estimate, thermodynamic-limit closed form) at Omega = Delta omega."""
    g, dw, gop, gp, gd = (params.g, params.delta_omega, params.gamma_op, params.gamma_prime,
                          params.gamma_d)
    alpha = g * 2 * params.I
    eps_two_level = 2 / (1 + 4 * dw**2 / (gop * gp + alpha**2) * gop / gp)
    eps_thermo = 2 / (1 + 64 * params.kappa**2 / (1 + 2 * gd / gop) ** 2)
    return eps_two_level, eps_thermo


def closed_form_impurity(kappa, norm_dephasing=0.0):
    """2 / (1 + 64 kappa^2 (1 + 2 Gamma_d tau0/2pi)^-2), vectorized."""
    kappa = np.asarray(kappa, dtype=float)
    nd = np.asarray(norm_dephasing, dtype=float)
    return 2 / (1 + 64 * kappa**2 / (1 + 2 * nd) ** 2)


@dataclass(frozen=True)
class DetuningRow:
    omega: float
    gamma_d: float
    impurity: float


def detuning_scan(params: RateParams, omega_grid: Sequence[float],
                  gamma_d_list: Sequence[float]) -> List[DetuningRow]:
    rows = []
    for gd in gamma_d_list:
        for om in omega_grid:
            sol = steady_populations_only(replace(params, Omega=float(om), gamma_d=float(gd)))
            rows.append(DetuningRow(float(om), float(gd), float(1 - math.fsum(sol**2))))
    return rows


def resonance_fwhm(omega, impurity) -> float:
    """Full width at half maximum of 1/impurity around its peak, linear interpolation."""
    omega = np.asarray(omega, float)
    y = 1 / np.asarray(impurity, float)
    k = int(np.argmax(y))
    half = y[k] / 2

    def crossing(idx):
        for i, j in zip(idx[:-1], idx[1:]):
            if y[j] <= half:
                return omega[i] + (half - y[i]) * (omega[j] - omega[i]) / (y[j] - y[i])
        raise ValueError("resonance not resolved within the scan range")

    left = crossing(list(range(k, -1, -1)))
    right = crossing(list(range(k, len(y))))
    return float(right - left)


@dataclass(frozen=True)
class DephasingRow:
    norm_dephasing: float
    impurity: float
    t_c: float


def dephasing_scan(params: RateParams, gamma_d_grid: Sequence[float]) -> List[DephasingRow]:
    rows = []
    for gd in gamma_d_grid:
        sol = steady_populations(replace(params, gamma_d=float(gd)))
        rows.append(DephasingRow(float(gd) / params.gamma_op, sol.impurity, sol.t_c))
    return rows
