"""
Pulsed purification: coherent three-body evolution for tau0, then an
instantaneous central-spin reset, repeated.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import curve_fit

from .hamiltonian import DerivedScales, PhysicalParams, build_rotating_hamiltonian, derive_scales
from .ladder import (
    LadderBasis,
    ObservableSet,
    classical_i_sq,
    observables,
    reset_map,
    thermal_mixture,
)

log = logging.getLogger(__name__)

UNITARITY_TOL = 1e-10
SUBSTEPS = 100
STEADY_WINDOW = 0.1


class PropagatorError(RuntimeError):
    pass


class ConvergenceFitError(ValueError):
    pass


@dataclass
class ProtocolRun:
    basis: LadderBasis
    params: PhysicalParams
    scales: DerivedScales
    n_iterations: int
    series: List[ObservableSet]
    substeps: Optional[np.ndarray] = None
    converged_at: Optional[float] = None
    final_state: Optional[np.ndarray] = field(default=None, repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(o, name) for o in self.series])

    @property
    def impurity(self) -> np.ndarray:
        return self.column("impurity")

    def steady_impurity(self, window: float = STEADY_WINDOW):
        """Mean and peak-to-peak impurity over the trailing ``window`` fraction."""
        eps = self.impurity
        k = max(1, int(round(window * len(eps))))
        tail = eps[-k:]
        return float(tail.mean()), float(np.ptp(tail))

    def steady(self, name: str, window: float = STEADY_WINDOW) -> float:
        values = self.column(name)
        k = max(1, int(round(window * len(values))))
        return float(values[-k:].mean())

    def table(self):
        """Rows of (iter, t/tau0, sx, i1z, i2z, var_i1z, var_i2z, i_sq/i_sq_cl, impurity)."""
        norm = classical_i_sq(self.basis)
        return [
            (k, float(k), o.sx, o.i1z, o.i2z, o.var_i1z, o.var_i2z, o.i_sq / norm, o.impurity)
            for k, o in enumerate(self.series)
        ]


TABLE_COLUMNS = ["iter", "t_over_tau0", "sx", "i1z", "i2z", "var_i1z", "var_i2z",
                 "i_sq_norm", "impurity"]


def propagator(H: np.ndarray, t: float) -> np.ndarray:
    U = scipy.linalg.expm(-1j * H * t)
    if not np.all(np.isfinite(U)):
        raise PropagatorError(f"matrix exponential diverged (|H t| = {np.linalg.norm(H) * t:.3e})")
    err = np.max(np.abs(U.conj().T @ U - np.eye(len(U))))
    if err > UNITARITY_TOL:
        raise PropagatorError(
            f"propagator not unitary (deviation {err:.2e}, |H t| = {np.linalg.norm(H) * t:.3e})")
    return U


def run_stage2(basis: LadderBasis, params: PhysicalParams, n_iterations: int,
               record_substeps: bool = False, initial: Optional[np.ndarray] = None) -> ProtocolRun:
    """Repeat evolution for tau0 followed by a reset, starting from the thermal ladder mixture.

    Each entry of ``series`` holds the observables just before the reset
    (entry 0 is the initial state). The bath part is unaffected by the reset,
    so bath observables coincide before and after it.
    """
    scales = derive_scales(params, basis)
    if params.Omega is not None and not np.isclose(params.Omega, scales.delta_omega):
        log.warning("drive Omega=%g is off the three-body resonance %g", params.Omega,
                    scales.delta_omega)
    H = build_rotating_hamiltonian(basis, params)
    U = propagator(H, scales.tau0)
    Ud = U.conj().T

    rho = thermal_mixture(basis) if initial is None else np.array(initial, dtype=complex)
    series = [observables(rho, basis)]
    substeps = None
    if record_substeps:
        # one iteration from the initial state, sampled uniformly
        ts = np.linspace(0, scales.tau0, SUBSTEPS)
        w, V = np.linalg.eigh(H)
        rho_eig = V.conj().T @ rho @ V
        sx = []
        for t in ts:
            phase = np.exp(-1j * w * t)
            r = V @ (phase[:, None] * rho_eig * phase.conj()[None, :]) @ V.conj().T
            sx.append(observables(r, basis).sx)
        substeps = np.column_stack([ts / scales.tau0, sx])

    for _ in range(n_iterations):
        rho = U @ rho @ Ud
        series.append(observables(rho, basis))
        rho = reset_map(rho)

    run = ProtocolRun(basis, params, scales, n_iterations, series, substeps, final_state=rho)
    try:
        run.converged_at = detect_convergence(run.impurity)
    except ConvergenceFitError as exc:
        log.info("no convergence estimate: %s", exc)
    return run


def _decay(k, eps_ss, c, k0):
    return eps_ss + c * np.exp(-k / k0)


def detect_convergence(impurity: Sequence[float], window: float = STEADY_WINDOW) -> float:
    """Three times the 1/e iteration count of the impurity's approach to its settled value.

    The settled value is the mean over the trailing ``window`` fraction. The
    decaying segment starts at the maximum and ends where the excess over
    the settled value drops below ten times the tail's peak-to-peak spread.
    """
    eps = np.asarray(impurity, dtype=float)
    if len(eps) < 5:
        raise ConvergenceFitError("series too short")
    k_tail = max(2, int(round(window * len(eps))))
    tail = eps[-k_tail:]
    eps_ss = tail.mean()
    floor = max(10 * np.ptp(tail), 1e-12 * max(abs(eps_ss), 1e-300))
    start = int(np.argmax(eps))
    excess = eps[start:] - eps_ss
    if excess[0] <= floor:
        raise ConvergenceFitError("impurity series does not decay")
    below = np.nonzero(excess <= floor)[0]
    stop = start + (int(below[0]) if len(below) else len(excess))
    k = np.arange(start, stop, dtype=float)
    y = eps[start:stop] - eps_ss
    if len(k) < 2:
        raise ConvergenceFitError("decaying segment too short")
    if len(k) == 2:
        k0 = (k[1] - k[0]) / np.log(y[0] / y[1])
    else:
        slope, _ = np.polyfit(k - k[0], np.log(y), 1)
        k0 = -1 / slope if slope < 0 else np.inf
        if len(k) >= 4 and np.isfinite(k0):
            try:
                popt, _ = curve_fit(_decay, k - k[0], eps[start:stop], p0=(eps_ss, y[0], k0),
                                    maxfev=10000)
                if popt[2] > 0:
                    k0 = popt[2]
            except RuntimeError:
                pass
    if not np.isfinite(k0) or k0 <= 0:
        raise ConvergenceFitError("impurity series does not decay")
    return 3 * float(k0)


@dataclass(frozen=True)
class KappaPoint:
    kappa: float
    eps_ss: float
    eps_pp: float
    iterations: Optional[float]
    t_c: Optional[float]


def sweep_kappa(basis: LadderBasis, params: PhysicalParams, kappa_grid: Sequence[float],
                n_iterations: int, threads: int = 1) -> List[KappaPoint]:
    """Pulsed steady impurity and convergence time over kappa (Delta omega varied)."""

    def one(kappa):
        run = run_stage2(basis, params.with_kappa(kappa), n_iterations)
        eps, pp = run.steady_impurity()
        it = run.converged_at
        return KappaPoint(float(kappa), eps, pp, it, None if it is None else it * run.scales.tau0)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, kappa_grid))
    return [one(k) for k in kappa_grid]
