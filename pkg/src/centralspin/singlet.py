"""
Gate-based compilation of the many-body singlet from the anti-polarized state.

A sequence is a list of steps ``(phi_j, tau_j)``; step j applies the
central-spin z-gate ``exp(-i phi_j sigma_z / 2)`` and then the three-body
exchange for a time ``tau_j`` (units of 1/g). Pure states are propagated as
vectors on central spin (x) ladder.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .ladder import (
    DOWN_X,
    SIGMA_Z_CENTRAL,
    LadderBasis,
    build_basis,
    ladder_raising_elements,
    singlet_amplitudes,
    total_spin_squared,
    trace_distance,
)

EXACT = "exact"
SIMPLIFIED = "simplified"
PI_GATE_TOL = 1e-9


@dataclass
class GateSequence:
    steps: List[Tuple[float, float]]
    model: str = EXACT

    def __post_init__(self):
        if self.model not in (EXACT, SIMPLIFIED):
            raise ValueError(f"unknown gate model {self.model!r}")
        self.steps = [(float(p), float(t)) for p, t in self.steps]
        if any(t < 0 for _, t in self.steps):
            raise ValueError("exchange durations must be non-negative")

    def __len__(self):
        return len(self.steps)

    @property
    def gate_count(self) -> int:
        return 2 * len(self.steps)

    @property
    def phis(self) -> np.ndarray:
        return np.array([p for p, _ in self.steps])

    @property
    def taus(self) -> np.ndarray:
        return np.array([t for _, t in self.steps])

    def parameters(self) -> np.ndarray:
        """Flat vector (phi_0, tau_0, phi_1, tau_1, ...)."""
        return np.array(self.steps, dtype=float).reshape(-1)

    @classmethod
    def from_parameters(cls, v, model: str = EXACT) -> "GateSequence":
        v = np.asarray(v, dtype=float).reshape(-1, 2)
        return cls([tuple(x) for x in v], model)

    def to_json(self, basis: Optional[LadderBasis] = None) -> str:
        payload = {
            "model": self.model,
            "steps": [{"phi": p % (2 * math.pi), "tau": t} for p, t in self.steps],
        }
        if basis is not None:
            payload["basis"] = {"I1": basis.I1, "I2": basis.I2}
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GateSequence":
        data = json.loads(text)
        return cls([(s["phi"], s["tau"]) for s in data["steps"]], data.get("model", EXACT))


def ladder_for_k(K: int) -> LadderBasis:
    """Equal-spin manifold with 2^K rungs."""
    if K < 1:
        raise ValueError("K must be at least 1")
    I = (2**K - 1) / 2
    return build_basis(I, I)


def _k_of(basis: LadderBasis) -> int:
    d = basis.dim_bath
    K = d.bit_length() - 1
    if 2**K != d or K < 1:
        raise ValueError(f"ladder has {d} rungs; a power of two (2^K, K >= 1) is required")
    return K


# -- gates --------------------------------------------------------------------

def z_gate(phi: float, basis: LadderBasis) -> np.ndarray:
    """exp(-i phi sigma_z / 2) on the central spin; sigma_z flips the x-basis states."""
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    u = c * np.eye(2) - 1j * s * SIGMA_Z_CENTRAL
    return np.kron(u, np.eye(basis.dim_bath))


def _couplings(basis: LadderBasis, model: str) -> np.ndarray:
    if model == SIMPLIFIED:
        return np.ones(basis.dim_bath - 1)
    return ladder_raising_elements(basis)


def simplified_pi_time(g: float = 1.0) -> float:
    """Full-transfer time of the uniform-coupling exchange (e_n = 1)."""
    return math.pi / (2 * g)


def exchange_gate(tau: float, basis: LadderBasis, model: str = EXACT, g: float = 1.0) -> np.ndarray:
    """exp(-i tau H_exc) built from the independent two-level rungs.

    Rung n couples |up_x, n> and |down_x, n+1> with strength g e_n;
    |down_x, 0> and |up_x, 2M> are untouched. The simplified model has
    e_n = 1 and is only defined at its pi-gate time.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if model == SIMPLIFIED and tau != 0 and not math.isclose(tau, simplified_pi_time(g),
                                                            rel_tol=PI_GATE_TOL):
        raise ValueError("the simplified exchange gate is only defined at the pi-gate time")
    d = basis.dim_bath
    theta = g * _couplings(basis, model) * tau
    c, s = np.cos(theta), np.sin(theta)
    U = np.zeros((2 * d, 2 * d), dtype=complex)
    up = d + np.arange(d - 1)       # |up_x, n>
    down = 1 + np.arange(d - 1)     # |down_x, n+1>
    U[up, up] = c
    U[down, down] = c
    U[up, down] = -1j * s
    U[down, up] = -1j * s
    U[0, 0] = 1
    U[2 * d - 1, 2 * d - 1] = 1
    return U


def _apply_z(psi: np.ndarray, phi: float, d: int) -> np.ndarray:
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    lo, hi = psi[:d], psi[d:]
    return np.concatenate([c * lo - 1j * s * hi, c * hi - 1j * s * lo])


def _apply_exchange(psi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    d = len(theta) + 1
    out = psi.copy()
    up = psi[d:2 * d - 1]
    down = psi[1:d]
    c, s = np.cos(theta), np.sin(theta)
    out[d:2 * d - 1] = c * up - 1j * s * down
    out[1:d] = c * down - 1j * s * up
    return out


def _apply_exchange_generator(psi: np.ndarray, coupling: np.ndarray) -> np.ndarray:
    """H_exc |psi> for rung couplings g e_n."""
    d = len(coupling) + 1
    out = np.zeros_like(psi)
    out[d:2 * d - 1] = coupling * psi[1:d]
    out[1:d] = coupling * psi[d:2 * d - 1]
    return out


def _apply_sigma_z_half(psi: np.ndarray, d: int) -> np.ndarray:
    return 0.5 * np.concatenate([psi[d:], psi[:d]])


# -- sequences ----------------------------------------------------------------

def ideal_sequence(K: int, g: float = 1.0, basis: Optional[LadderBasis] = None) -> GateSequence:
    """S_1 S_2 ... S_K for the uniform-coupling ladder with 2^K rungs.

    S_j = (pi/2)_z U_pi followed by 2^(j-1) - 1 repetitions of (pi)_z U_pi,
    giving 2 (2^K - 1) gates in total.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if basis is not None and basis.dim_bath != 2**K:
        raise ValueError(f"ladder with {basis.dim_bath} rungs does not match K={K}")
    t = simplified_pi_time(g)
    steps = []
    for j in range(1, K + 1):
        steps.append((math.pi / 2, t))
        steps.extend([(math.pi, t)] * (2 ** (j - 1) - 1))
    return GateSequence(steps, SIMPLIFIED)


def composite_boundaries(K: int) -> List[int]:
    """Step counts after which S_1, ..., S_K are complete."""
    return [2**j - 1 for j in range(1, K + 1)]


def padded_ideal_sequence(basis: LadderBasis, g: float = 1.0) -> GateSequence:
    """Experimental: ideal structure for ladders whose length is not a power of two.

    Uses the smallest K with 2^K >= 2M + 1 and keeps only the 2M steps that
    bring rungs 1 .. 2M into the superposition.
    """
    d = basis.dim_bath
    K = max(1, math.ceil(math.log2(d)))
    seq = ideal_sequence(K, g)
    return GateSequence(seq.steps[: d - 1], SIMPLIFIED)


def init_guess(K: int, basis: Optional[LadderBasis] = None, g: float = 1.0) -> GateSequence:
    """Ideal phases with tau_j = pi / (2 g e_j) on the exact ladder."""
    basis = ladder_for_k(K) if basis is None else basis
    if _k_of(basis) != K:
        raise ValueError(f"ladder with {basis.dim_bath} rungs does not match K={K}")
    e = ladder_raising_elements(basis)
    phis = ideal_sequence(K).phis
    return GateSequence([(phi, math.pi / (2 * g * e[j])) for j, phi in enumerate(phis)], EXACT)


def initial_vector(basis: LadderBasis) -> np.ndarray:
    psi = np.zeros(basis.dim_total, dtype=complex)
    psi[DOWN_X * basis.dim_bath] = 1
    return psi


def _thetas(seq: GateSequence, basis: LadderBasis, g: float):
    e = _couplings(basis, seq.model)
    return [g * e * tau for tau in seq.taus]


def prepare(seq: GateSequence, basis: LadderBasis, initial: Optional[np.ndarray] = None,
            g: float = 1.0) -> np.ndarray:
    """Final pure state of the sequence applied to ``initial`` (default |down_x, n=0>)."""
    if seq.model == SIMPLIFIED:
        for _, tau in seq.steps:
            exchange_gate(tau, basis, SIMPLIFIED, g)  # validates the pi-gate time
    d = basis.dim_bath
    psi = initial_vector(basis) if initial is None else np.array(initial, dtype=complex)
    for (phi, _), theta in zip(seq.steps, _thetas(seq, basis, g)):
        psi = _apply_exchange(_apply_z(psi, phi, d), theta)
    return psi


def bath_of(psi: np.ndarray, d: int) -> np.ndarray:
    m = psi.reshape(2, d)
    return m.T @ m.conj()


@dataclass(frozen=True)
class GateDiagnostic:
    gates: int
    trace_dist: float
    hs_cost: float
    i_sq: float
    singlet_overlap: float


def apply_sequence(seq: GateSequence, basis: LadderBasis, initial: Optional[np.ndarray] = None,
                   g: float = 1.0):
    """Apply gates one at a time; return (final state vector, per-gate diagnostics).

    Diagnostics start with the initial state (``gates == 0``). The singlet
    overlap is |<down_x, singlet|psi>|^2.
    """
    d = basis.dim_bath
    chi_vec = singlet_amplitudes(basis)
    chi = np.outer(chi_vec, chi_vec.conj())
    isq_op = total_spin_squared(basis)
    target = np.concatenate([chi_vec, np.zeros(d)])
    psi = initial_vector(basis) if initial is None else np.array(initial, dtype=complex)

    def record(n):
        rho_b = bath_of(psi, d)
        return GateDiagnostic(n, trace_distance(rho_b, chi), hs_cost(rho_b, chi),
                              float(np.real(np.trace(rho_b @ isq_op))),
                              float(abs(np.vdot(target, psi)) ** 2))

    diags = [record(0)]
    for k, (phi, tau) in enumerate(seq.steps):
        psi = z_gate(phi, basis) @ psi
        diags.append(record(2 * k + 1))
        psi = exchange_gate(tau, basis, seq.model, g) @ psi
        diags.append(record(2 * k + 2))
    return psi, diags


def hs_cost(rho_b: np.ndarray, target: np.ndarray) -> float:
    """Hilbert-Schmidt distance Tr[(rho - chi)^dag (rho - chi)]."""
    if rho_b.shape != target.shape:
        raise ValueError("dimension mismatch")
    diff = rho_b - target
    return float(np.real(np.vdot(diff, diff)))


def _target(basis: LadderBasis, target: Optional[np.ndarray]) -> np.ndarray:
    if target is None:
        chi = singlet_amplitudes(basis)
        return np.outer(chi, chi.conj())
    return target


def cost(seq: GateSequence, basis: LadderBasis, target: Optional[np.ndarray] = None,
         g: float = 1.0) -> float:
    psi = prepare(seq, basis, g=g)
    return hs_cost(bath_of(psi, basis.dim_bath), _target(basis, target))


def analytic_gradient(seq: GateSequence, basis: LadderBasis, target: Optional[np.ndarray] = None,
                      g: float = 1.0):
    """Cost and its gradient in the layout of :meth:`GateSequence.parameters`.

    One forward sweep stores the state after every gate; a backward sweep
    carries the co-state lambda = U_{>k}^dag (1 (x) (rho_b - chi)) psi. With
    d psi / dv = U_{>k} (-i X_k) psi_k the derivative is
    dC/dv = 4 Re <lambda_k| -i X_k |psi_k>.
    """
    d = basis.dim_bath
    chi = _target(basis, target)
    coupling = g * _couplings(basis, seq.model)
    thetas = [coupling * tau for tau in seq.taus]
    psi = initial_vector(basis)
    after = []
    for (phi, _), theta in zip(seq.steps, thetas):
        psi = _apply_z(psi, phi, d)
        after.append(psi)
        psi = _apply_exchange(psi, theta)
        after.append(psi)
    rho_b = bath_of(psi, d)
    diff = rho_b - chi
    c = float(np.real(np.vdot(diff, diff)))
    # (1 (x) D) psi with psi laid out as (central, rung)
    lam = (psi.reshape(2, d) @ diff.T).reshape(-1)
    grad = np.zeros(2 * len(seq.steps))
    for k in range(len(seq.steps) - 1, -1, -1):
        phi, _ = seq.steps[k]
        psi_x = after[2 * k + 1]
        grad[2 * k + 1] = 4 * np.real(np.vdot(lam, -1j * _apply_exchange_generator(psi_x, coupling)))
        lam = _apply_exchange(lam, -thetas[k])
        psi_z = after[2 * k]
        grad[2 * k] = 4 * np.real(np.vdot(lam, -1j * _apply_sigma_z_half(psi_z, d)))
        lam = _apply_z(lam, -phi, d)
    return c, grad


def finite_difference_gradient(seq: GateSequence, basis: LadderBasis,
                               target: Optional[np.ndarray] = None, step: float = 1e-6,
                               g: float = 1.0) -> np.ndarray:
    v = seq.parameters()
    out = np.zeros_like(v)
    for i in range(len(v)):
        hi, lo = v.copy(), v.copy()
        hi[i] += step
        lo[i] -= step
        out[i] = (cost(GateSequence.from_parameters(hi, seq.model), basis, target, g)
                  - cost(GateSequence.from_parameters(lo, seq.model), basis, target, g)) / (2 * step)
    return out


# -- optimizer ----------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    zeta: float = 0.015
    xi: float = 1e-8
    beta: float = 0.85
    max_epochs: int = 1000
    tol: float = 0.0
    tau_unit: Optional[float] = None  # None: 1 / (g max_n e_n)

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.zeta < 0 or self.xi <= 0:
            raise ValueError("zeta must be non-negative and xi positive")
        if self.tau_unit is not None and self.tau_unit <= 0:
            raise ValueError("tau_unit must be positive")


class OptimizationError(FloatingPointError):
    pass


@dataclass
class CostReport:
    cost_trace: List[float]
    trace_dist_trace: List[float]
    i_sq_trace: List[float]
    final: GateSequence
    initial: GateSequence
    epochs: int = 0
    best_cost: float = field(default=math.inf)

    @property
    def final_cost(self) -> float:
        return self.cost_trace[-1]

    @property
    def final_trace_dist(self) -> float:
        return self.trace_dist_trace[-1]


def rmsprop_optimize(seq0: GateSequence, config: OptimizerConfig, basis: LadderBasis,
                     target: Optional[np.ndarray] = None, g: float = 1.0) -> CostReport:
    """Minimize the Hilbert-Schmidt cost over all (phi_j, tau_j) with RMSprop.

    v <- v - zeta / sqrt(xi + E[grad^2]) * grad, E <- beta E + (1 - beta) grad^2.
    Traces hold the value at the start of each epoch plus the final value.
    Durations are clipped at zero.

    Durations enter the update in units of ``config.tau_unit``. The default,
    the inverse of the fastest rung coupling, makes the step a rotation angle
    on every rung and keeps ``zeta`` meaningful as the ladder grows.
    """
    if seq0.model != EXACT:
        raise ValueError("variational optimization needs the exact gate model")
    d = basis.dim_bath
    chi = _target(basis, target)
    isq_op = total_spin_squared(basis)
    unit = config.tau_unit
    if unit is None:
        unit = 1 / (g * float(np.max(_couplings(basis, EXACT))))
    scale = np.ones(2 * len(seq0))
    scale[1::2] = unit
    v = seq0.parameters() / scale
    mean_sq = np.zeros_like(v)
    costs, dists, isqs = [], [], []

    def track(seq):
        rho_b = bath_of(prepare(seq, basis, g=g), d)
        dists.append(trace_distance(rho_b, chi))
        isqs.append(float(np.real(np.trace(rho_b @ isq_op))))

    epoch = 0
    for epoch in range(config.max_epochs):
        seq = GateSequence.from_parameters(v * scale, EXACT)
        c, grad = analytic_gradient(seq, basis, chi, g)
        grad = grad * scale
        if not np.all(np.isfinite(grad)) or not math.isfinite(c):
            raise OptimizationError(f"non-finite gradient at epoch {epoch} (cost {c!r}, params {v})")
        costs.append(c)
        track(seq)
        if c <= config.tol:
            break
        mean_sq = config.beta * mean_sq + (1 - config.beta) * grad**2
        v = v - config.zeta / np.sqrt(config.xi + mean_sq) * grad
        v[1::2] = np.maximum(v[1::2], 0.0)
    else:
        epoch = config.max_epochs
    final = GateSequence.from_parameters(v * scale, EXACT)
    costs.append(cost(final, basis, chi, g))
    track(final)
    return CostReport(costs, dists, isqs, final, seq0, epochs=epoch, best_cost=min(costs))


def refocus_check(state: np.ndarray, delta_omega: float, t: float,
                  basis: Optional[LadderBasis] = None) -> float:
    """|<singlet|psi(t)>|^2 after free evolution in the non-rotating frame.

    ``state`` is a ladder vector or a full (central (x) ladder) vector; rung n
    picks up the phase exp(i t n delta_omega). The overlap is taken with the
    bath singlet, summed over the central-spin components. Without ``basis``
    the state is read as a ladder vector of an equal-spin manifold.
    """
    state = np.asarray(state, dtype=complex)
    if basis is None:
        I = (state.size - 1) / 2
        basis = build_basis(I, I)
    d = basis.dim_bath
    chi = singlet_amplitudes(basis)
    phase = np.exp(1j * t * np.arange(d) * delta_omega)
    rows = state.reshape(-1, d) * phase
    return float(np.sum(np.abs(rows @ chi.conj()) ** 2))
