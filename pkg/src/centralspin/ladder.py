"""
Restricted Hilbert space of two collective spins on the zero-polarization ladder.

The bath is described by two collective spins of fixed magnitude ``I1`` and
``I2``. With the total polarization locked to zero, only the ladder states

    |n> = |I1^z = -M + n, I2^z = M - n>,    n = 0 .. 2M,   M = min(I1, I2)

are accessible. The central spin is stored in its S_x eigenbasis with the
ordering ``(|down_x>, |up_x>)``; composite indices are ``c * dim_bath + n``.
In that basis S_x is diagonal and S_z is the flip operator.

Density matrices are plain complex ``ndarray`` objects of shape
``(dim_total, dim_total)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

POSITIVITY_TOL = 1e-10
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12

DOWN_X = 0
UP_X = 1

SX_CENTRAL = np.diag([-0.5, 0.5]).astype(complex)
SZ_CENTRAL = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z_CENTRAL = 2 * SZ_CENTRAL


def _half_integer(value: float, name: str) -> float:
    twice = 2 * value
    if value <= 0 or not math.isclose(twice, round(twice), abs_tol=1e-12):
        raise ValueError(f"{name} must be a positive integer or half-integer, got {value!r}")
    return round(twice) / 2


@dataclass(frozen=True)
class LadderBasis:
    """Ladder of zero-polarization states for the ``(I1, I2)`` manifold."""

    I1: float
    I2: float

    def __post_init__(self):
        object.__setattr__(self, "I1", _half_integer(self.I1, "I1"))
        object.__setattr__(self, "I2", _half_integer(self.I2, "I2"))

    @property
    def M(self) -> float:
        return min(self.I1, self.I2)

    @property
    def dim_bath(self) -> int:
        return round(2 * self.M) + 1

    @property
    def dim_total(self) -> int:
        return 2 * self.dim_bath

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.dim_bath)

    @property
    def m1(self) -> np.ndarray:
        """I1^z eigenvalue of every rung."""
        return -self.M + self.n

    @property
    def m2(self) -> np.ndarray:
        """I2^z eigenvalue of every rung."""
        return self.M - self.n

    @property
    def equal_spins(self) -> bool:
        return self.I1 == self.I2

    @property
    def ensemble_size(self) -> float:
        """Ensemble size N implied by the convention I1 * I2 = N / 2."""
        return 2 * self.I1 * self.I2

    def __repr__(self):
        return f"LadderBasis(I1={self.I1:g}, I2={self.I2:g})"


def build_basis(I1: float, I2: float) -> LadderBasis:
    return LadderBasis(I1, I2)


def manifold_for_ensemble(N: float) -> float:
    """Collective spin closest to sqrt(N/2), rounded to a half-integer."""
    if N <= 0:
        raise ValueError("N must be positive")
    return max(0.5, round(2 * math.sqrt(N / 2)) / 2)


def ensemble_for_manifold(I: float) -> float:
    return 2 * I * I


# -- bath operators -----------------------------------------------------------

def ladder_raising_elements(basis: LadderBasis) -> np.ndarray:
    """Matrix elements <n+1| I1^+ I2^- |n> for n = 0 .. 2M-1.

    For I1 = I2 = I these are the collective enhancement factors
    ``(2I - n)(n + 1)``.
    """
    I1, I2 = basis.I1, basis.I2
    m1 = basis.m1[:-1]
    m2 = basis.m2[:-1]
    raise1 = I1 * (I1 + 1) - m1 * (m1 + 1)
    lower2 = I2 * (I2 + 1) - m2 * (m2 - 1)
    if basis.equal_spins:
        # exact product form, avoids sqrt rounding
        n = basis.n[:-1]
        return ((2 * I1 - n) * (n + 1)).astype(float)
    return np.sqrt(raise1 * lower2)


def ladder_raising(basis: LadderBasis) -> np.ndarray:
    """I1^+ I2^- on the ladder: maps |n> to e_n |n+1>."""
    return np.diag(ladder_raising_elements(basis), k=-1).astype(complex)


def i1z(basis: LadderBasis) -> np.ndarray:
    return np.diag(basis.m1).astype(complex)


def i2z(basis: LadderBasis) -> np.ndarray:
    return np.diag(basis.m2).astype(complex)


def flipflop_same_species(basis: LadderBasis) -> np.ndarray:
    """Sum over species of I_i^+ I_i^- + I_i^- I_i^+ (diagonal on the ladder)."""
    d = (2 * (basis.I1 * (basis.I1 + 1) - basis.m1**2)
         + 2 * (basis.I2 * (basis.I2 + 1) - basis.m2**2))
    return np.diag(d).astype(complex)


def total_spin_squared(basis: LadderBasis) -> np.ndarray:
    """(I1 + I2)^2 restricted to the ladder."""
    up = ladder_raising(basis)
    const = basis.I1 * (basis.I1 + 1) + basis.I2 * (basis.I2 + 1)
    return (const * np.eye(basis.dim_bath) + 2 * np.diag(basis.m1 * basis.m2)
            + up + up.conj().T).astype(complex)


# -- composite helpers --------------------------------------------------------

def on_bath(op: np.ndarray) -> np.ndarray:
    """Lift a bath operator to the composite space."""
    return np.kron(np.eye(2), op)


def on_central(op: np.ndarray, basis: LadderBasis) -> np.ndarray:
    return np.kron(op, np.eye(basis.dim_bath))


def central_projector(c: int) -> np.ndarray:
    p = np.zeros((2, 2), dtype=complex)
    p[c, c] = 1
    return p


def bath_state(rho: np.ndarray) -> np.ndarray:
    """Partial trace over the central spin."""
    d = rho.shape[0] // 2
    return np.einsum("ajak->jk", rho.reshape(2, d, 2, d))


def central_state(rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0] // 2
    return np.einsum("ajbj->ab", rho.reshape(2, d, 2, d))


def bath_pure_state(basis: LadderBasis, amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    return np.outer(psi, psi.conj())


def with_central_down(rho_b: np.ndarray) -> np.ndarray:
    return np.kron(central_projector(DOWN_X), rho_b)


def impurity(rho_b: np.ndarray) -> float:
    return float(1 - np.real(np.trace(rho_b @ rho_b)))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def check_state(rho: np.ndarray, tol: float = POSITIVITY_TOL) -> None:
    """Raise ``ValueError`` if ``rho`` is not a density matrix."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > max(HERMITICITY_TOL, tol):
        raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > max(TRACE_TOL, tol):
        raise ValueError(f"density matrix trace {tr.real:.15g} != 1")
    low = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if low < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {low:.3e}")


# -- canonical states ---------------------------------------------------------

def antipolarized_amplitudes(basis: LadderBasis) -> np.ndarray:
    psi = np.zeros(basis.dim_bath, dtype=complex)
    psi[0] = 1
    return psi


def singlet_amplitudes(basis: LadderBasis) -> np.ndarray:
    if not basis.equal_spins:
        raise ValueError(f"no singlet in this manifold (I1={basis.I1:g} != I2={basis.I2:g})")
    d = basis.dim_bath
    return ((-1.0) ** np.arange(d) / math.sqrt(d)).astype(complex)


def antipolarized_state(basis: LadderBasis) -> np.ndarray:
    """|down_x><down_x| (x) |n=0><n=0|."""
    return with_central_down(bath_pure_state(basis, antipolarized_amplitudes(basis)))


def singlet_state(basis: LadderBasis) -> np.ndarray:
    return with_central_down(bath_pure_state(basis, singlet_amplitudes(basis)))


def thermal_mixture(basis: LadderBasis) -> np.ndarray:
    """Central spin in |down_x>, bath maximally mixed on the ladder."""
    d = basis.dim_bath
    return with_central_down(np.eye(d, dtype=complex) / d)


def reset_map(rho: np.ndarray) -> np.ndarray:
    """rho -> |down_x><down_x| (x) Tr_c rho."""
    return with_central_down(bath_state(rho))


# -- observables --------------------------------------------------------------

@dataclass(frozen=True)
class ObservableSet:
    sx: float
    i1z: float
    i2z: float
    var_i1z: float
    var_i2z: float
    i_sq: float
    var_i_sq: float
    impurity: float
    trace_dist: Optional[float] = None

    def normalized_i_sq(self, basis: LadderBasis) -> float:
        return self.i_sq / classical_i_sq(basis)


def classical_i_sq(basis: LadderBasis) -> float:
    """<I^2> of the anti-polarized state, (I1 + I2)(|I1 - I2| + 1)."""
    return (basis.I1 + basis.I2) * (abs(basis.I1 - basis.I2) + 1)


def observables(rho: np.ndarray, basis: LadderBasis,
                target: Optional[np.ndarray] = None) -> ObservableSet:
    """Central-spin and bath expectation values of a composite state.

    ``target`` is an optional bath density matrix; when given the trace
    distance between it and the reduced bath state is included.
    """
    rho_b = bath_state(rho)
    pops = np.real(np.diag(rho_b))
    m1, m2 = basis.m1, basis.m2
    e1 = float(pops @ m1)
    e2 = float(pops @ m2)
    isq_op = total_spin_squared(basis)
    isq = float(np.real(np.trace(rho_b @ isq_op)))
    isq2 = float(np.real(np.trace(rho_b @ isq_op @ isq_op)))
    sx = float(np.real(np.trace(central_state(rho) @ SX_CENTRAL)))
    return ObservableSet(
        sx=sx,
        i1z=e1,
        i2z=e2,
        var_i1z=float(pops @ m1**2 - e1**2),
        var_i2z=float(pops @ m2**2 - e2**2),
        i_sq=isq,
        var_i_sq=max(isq2 - isq**2, 0.0),
        impurity=impurity(rho_b),
        trace_dist=None if target is None else trace_distance(rho_b, target),
    )


# -- manifold statistics ------------------------------------------------------

def manifold_probability(I1, I2, N: float):
    """Unnormalized weight of the (I1, I2) manifold in an infinite-temperature ensemble."""
    if N <= 0:
        raise ValueError("N must be positive")
    I1 = np.asarray(I1, dtype=float)
    I2 = np.asarray(I2, dtype=float)
    return I1 * (I1 + 1) * I2 * (I2 + 1) * np.exp(-2 * (I1**2 + I2**2) / N)


def manifold_distribution(I1_grid, I2_grid, N: float) -> np.ndarray:
    """Normalized probabilities on the outer-product grid ``I1_grid x I2_grid``."""
    a, b = np.meshgrid(np.asarray(I1_grid, float), np.asarray(I2_grid, float), indexing="ij")
    w = manifold_probability(a, b, N)
    total = w.sum()
    if total <= 0:
        raise ValueError("grid carries no probability weight")
    return w / total
