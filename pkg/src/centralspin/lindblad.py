"""
Continuous-reset model: Lindblad generator, time evolution and steady state.

Density matrices are vectorized column-major (``rho.reshape(-1, order="F")``),
so ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .hamiltonian import PhysicalParams, build_rotating_hamiltonian, derive_scales
from .ladder import (
    POSITIVITY_TOL,
    SX_CENTRAL,
    LadderBasis,
    bath_state,
    i1z,
    i2z,
    impurity,
    on_bath,
    on_central,
)

log = logging.getLogger(__name__)

DENSE_LIMIT = 40_000


class SteadyStateError(RuntimeError):
    pass


@dataclass
class LiouvillianSpec:
    """Hamiltonian plus ``(rate, operator)`` dissipation channels.

    Each channel contributes the collapse operator ``sqrt(rate) * operator``.
    """

    H: np.ndarray
    collapse_ops: List[Tuple[float, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        d = self.H.shape[0]
        if self.H.shape != (d, d):
            raise ValueError("Hamiltonian must be square")
        for rate, op in self.collapse_ops:
            if rate < 0:
                raise ValueError(f"negative channel rate {rate}")
            if op.shape != (d, d):
                raise ValueError(f"collapse operator shape {op.shape} does not match H {(d, d)}")

    @property
    def dim(self) -> int:
        return self.H.shape[0]


def continuous_protocol(basis: LadderBasis, params: PhysicalParams) -> LiouvillianSpec:
    """Resonant drive with continuous reset and both dephasing channels."""
    scales = derive_scales(params, basis)
    reset = np.zeros((2, 2), dtype=complex)
    reset[0, 1] = 1  # |down_x><up_x|
    channels = [
        (scales.gamma_op, on_central(reset, basis)),
        (params.gamma_c, on_central(SX_CENTRAL, basis)),
        (params.gamma_b / 2, on_bath(i1z(basis))),
        (params.gamma_b / 2, on_bath(i2z(basis))),
    ]
    return LiouvillianSpec(build_rotating_hamiltonian(basis, params),
                           [(r, op) for r, op in channels if r > 0])


def build_liouvillian(spec: LiouvillianSpec) -> sp.csr_matrix:
    d = spec.dim
    eye = sp.identity(d, dtype=complex, format="csr")
    H = sp.csr_matrix(spec.H)
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for rate, op in spec.collapse_ops:
        if rate == 0:
            continue
        C = sp.csr_matrix(np.sqrt(rate) * op)
        CdC = (C.conj().T @ C).tocsr()
        L = L + sp.kron(C.conj(), C) - 0.5 * sp.kron(eye, CdC) - 0.5 * sp.kron(CdC.T, eye)
    return sp.csr_matrix(L)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


def evolve(spec: LiouvillianSpec, rho0: np.ndarray, t_grid: Sequence[float],
           rtol: float = 1e-10, atol: float = 1e-12) -> List[np.ndarray]:
    """Integrate the master equation with an adaptive Runge-Kutta scheme."""
    L = build_liouvillian(spec)
    d = spec.dim
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be non-decreasing")
    t0 = 0.0 if len(t_grid) == 0 else min(0.0, t_grid[0])
    t_end = t_grid[-1] if len(t_grid) else 0.0
    if t_end == t0:
        return [np.array(rho0, dtype=complex) for _ in t_grid]
    sol = solve_ivp(lambda t, y: L @ y, (t0, t_end), vec(np.asarray(rho0, dtype=complex)),
                    method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise RuntimeError(f"master-equation integration failed: {sol.message}")
    out = []
    for t, y in zip(t_grid, sol.y.T):
        out.append(np.array(rho0, dtype=complex) if t == 0 else unvec(y, d))
    return out


def _repair(rho: np.ndarray) -> np.ndarray:
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    w, V = np.linalg.eigh(rho)
    if w.min() < -POSITIVITY_TOL:
        log.warning("steady state has negative eigenvalue %.3e; clipping", w.min())
        w = np.clip(w, 0, None)
        rho = (V * w) @ V.conj().T
        rho = rho / np.trace(rho).real
    return rho


def steady_state(spec: LiouvillianSpec, dense_limit: int = DENSE_LIMIT,
                 return_solver: bool = False):
    """Solve L vec(rho) = 0 with Tr rho = 1 replacing the first equation."""
    if not any(rate > 0 for rate, _ in spec.collapse_ops):
        raise SteadyStateError("at least one dissipative channel is required")
    d = spec.dim
    L = build_liouvillian(spec).tolil()
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[np.arange(d) * (d + 1)] = 1
    L[0, :] = trace_row
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1
    L = L.tocsc()
    if d * d <= dense_limit:
        solver = "dense"
        A = L.toarray()
        with warnings.catch_warnings():
            # singularity is detected from the pivots below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if pivots.min() <= 1e-12 * pivots.max():
            raise SteadyStateError("steady state is not unique (degenerate null space)")
        x = scipy.linalg.lu_solve((lu, piv), b)
    else:
        solver = "sparse"
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            try:
                x = spla.spsolve(L, b)
            except spla.MatrixRankWarning as exc:
                raise SteadyStateError("steady state is not unique (singular system)") from exc
    if not np.all(np.isfinite(x)):
        raise SteadyStateError("steady-state solve produced non-finite values")
    rho = _repair(unvec(x, d))
    return (rho, solver) if return_solver else rho


def residual_norm(spec: LiouvillianSpec, rho: np.ndarray) -> float:
    L = build_liouvillian(spec)
    return float(np.linalg.norm(L @ vec(rho)))


@dataclass(frozen=True)
class SteadyPoint:
    kappa: float
    impurity: float
    fidelity_n0: float
    solver: str
    wall_time_s: float


def steady_impurity_sweep(basis: LadderBasis, params: PhysicalParams,
                          kappa_grid: Sequence[float], threads: int = 1) -> List[SteadyPoint]:
    """Continuous-protocol steady impurity over kappa (Delta omega varied)."""

    def one(kappa):
        t = time.perf_counter()
        rho, solver = steady_state(continuous_protocol(basis, params.with_kappa(kappa)),
                                   return_solver=True)
        rho_b = bath_state(rho)
        return SteadyPoint(float(kappa), impurity(rho_b), float(rho_b[0, 0].real), solver,
                           time.perf_counter() - t)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, kappa_grid))
    return [one(k) for k in kappa_grid]
