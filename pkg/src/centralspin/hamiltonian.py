"""
Physical parameters, derived scales and Hamiltonians on the restricted space.

All frequencies are angular (rad/s) unless a function says otherwise. Any
consistent unit works; :meth:`PhysicalParams.dimensionless` builds parameter
sets in which the three-body unit ``g = a^2 / (4 omega_c)`` equals one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from .ladder import (
    LadderBasis,
    SX_CENTRAL,
    SZ_CENTRAL,
    flipflop_same_species,
    ladder_raising,
    on_bath,
    on_central,
)
from .spin import spin_operators


@dataclass(frozen=True)
class PhysicalParams:
    """Parameters of the driven two-species central-spin system.

    ``Omega=None`` means resonant driving (Omega = omega_1 - omega_2),
    ``gamma_op=None`` means the reset rate 2 pi / tau0 and ``tau0=None``
    means the default reset interval 2 pi omega_c / (a^2 I1 I2).
    """

    omega_c: float
    omega_1: float
    omega_2: float
    a: float
    N: float
    Omega: Optional[float] = None
    delta: float = 0.0
    nu_1: float = 0.0
    nu_2: float = 0.0
    gamma_c: float = 0.0
    gamma_b: float = 0.0
    gamma_op: Optional[float] = None
    tau0: Optional[float] = None

    def __post_init__(self):
        if self.omega_c <= 0 or self.a <= 0 or self.N <= 0:
            raise ValueError("omega_c, a and N must be positive")
        if self.omega_1 < self.omega_2:
            raise ValueError("species are ordered so that omega_1 >= omega_2")
        for name in ("gamma_c", "gamma_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.gamma_op is not None and self.gamma_op < 0:
            raise ValueError("gamma_op must be non-negative")
        if self.tau0 is not None and self.tau0 <= 0:
            raise ValueError("tau0 must be positive")

    @classmethod
    def dimensionless(cls, kappa: float, N: float, **kwargs) -> "PhysicalParams":
        """Parameter set in units of g = a^2/(4 omega_c) = 1 with the given kappa."""
        omega_c, a = 100.0, 20.0
        delta_omega = kappa * N * a**2 / omega_c
        omega_2 = kwargs.pop("omega_2", 1e4)
        return cls(omega_c=omega_c, omega_1=omega_2 + delta_omega, omega_2=omega_2,
                   a=a, N=N, **kwargs)

    @property
    def delta_omega(self) -> float:
        return self.omega_1 - self.omega_2

    @property
    def g(self) -> float:
        return self.a**2 / (4 * self.omega_c)

    @property
    def drive(self) -> float:
        return self.delta_omega if self.Omega is None else self.Omega

    def with_kappa(self, kappa: float) -> "PhysicalParams":
        """Same system with Delta omega rescaled to reach ``kappa`` (omega_2 fixed)."""
        dw = kappa * self.N * self.a**2 / self.omega_c
        return replace(self, omega_1=self.omega_2 + dw)

    def hierarchy_ok(self) -> bool:
        """True when a < omega_2 and a << omega_c, as the perturbative model assumes."""
        return self.a < self.omega_2 and self.a < self.omega_c

    def scaled(self, c: float) -> "PhysicalParams":
        """Every rate multiplied by ``c`` (tau0 divided by ``c``)."""
        kw = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "N" or v is None:
                kw[f.name] = v
            elif f.name == "tau0":
                kw[f.name] = v / c
            else:
                kw[f.name] = v * c
        return PhysicalParams(**kw)


@dataclass(frozen=True)
class DerivedScales:
    g: float
    delta_omega: float
    kappa: float
    tau0: float
    gamma_op: float
    gamma_d: float
    gamma_prime: float
    norm_dephasing: float


def default_tau0(params: PhysicalParams, basis: LadderBasis) -> float:
    return 2 * math.pi * params.omega_c / (params.a**2 * basis.I1 * basis.I2)


def derive_scales(params: PhysicalParams, basis: LadderBasis) -> DerivedScales:
    g = params.g
    dw = params.delta_omega
    tau0 = params.tau0 if params.tau0 is not None else default_tau0(params, basis)
    gamma_op = params.gamma_op if params.gamma_op is not None else 2 * math.pi / tau0
    gamma_d = params.gamma_c + params.gamma_b
    return DerivedScales(
        g=g,
        delta_omega=dw,
        kappa=params.omega_c * dw / (params.N * params.a**2),
        tau0=tau0,
        gamma_op=gamma_op,
        gamma_d=gamma_d,
        gamma_prime=gamma_op / 2 + gamma_d,
        norm_dephasing=gamma_d * tau0 / (2 * math.pi),
    )


def zeeman_ladder(basis: LadderBasis, params: PhysicalParams) -> np.ndarray:
    """sum_i (omega_i - g) I_i^z on the ladder (bath operator)."""
    g = params.g
    d = (params.omega_1 - g) * basis.m1 + (params.omega_2 - g) * basis.m2
    return np.diag(d).astype(complex)


def build_rotating_hamiltonian(basis: LadderBasis, params: PhysicalParams) -> np.ndarray:
    """Rotating-frame Hamiltonian restricted to central spin (x) ladder.

    H = Omega S_x + delta S_z + sum_i (omega_i - g) I_i^z + a S_z (I1^z + I2^z)
        + g S_z sum_{i,j} (I_i^+ I_j^- + I_i^- I_j^+)

    The non-collinear term leaves the ladder and is not included here; see
    :func:`noncollinear_term`.
    """
    g = params.g
    up = ladder_raising(basis)
    # sum over i != j counts the inter-species flip-flop twice
    three_body = 2 * (up + up.conj().T) + flipflop_same_species(basis)
    collinear = params.a * np.diag(basis.m1 + basis.m2).astype(complex)
    H = (params.drive * on_central(SX_CENTRAL, basis)
         + params.delta * on_central(SZ_CENTRAL, basis)
         + on_bath(zeeman_ladder(basis, params))
         + np.kron(SZ_CENTRAL, collinear + g * three_body))
    return (H + H.conj().T) / 2


def build_exchange_hamiltonian(basis: LadderBasis, g: float = 1.0,
                               enhancement: Optional[np.ndarray] = None) -> np.ndarray:
    """Resonant three-body exchange g (|up_x><down_x| I_- + |down_x><up_x| I_+).

    ``enhancement`` overrides the rung couplings e_n (the simplified model
    uses a constant).
    """
    if enhancement is None:
        up = ladder_raising(basis)
    else:
        e = np.broadcast_to(np.asarray(enhancement, dtype=float), (basis.dim_bath - 1,))
        up = np.diag(e, k=-1).astype(complex)
    flip_up = np.zeros((2, 2), dtype=complex)
    flip_up[1, 0] = 1
    H = g * (np.kron(flip_up, up.conj().T) + np.kron(flip_up.T, up))
    return H


def noncollinear_term(basis: LadderBasis, params: PhysicalParams) -> np.ndarray:
    """sum_i (a nu_i / 2 omega_i) S_z I_i^x on the full (2I1+1)(2I2+1) product space.

    Ordering is central (x-basis) (x) I1 (x) I2 with magnetic quantum numbers
    descending. This term does not conserve I1^z + I2^z, so it is never
    added to ladder dynamics.
    """
    j1x = spin_operators(basis.I1)[0]
    j2x = spin_operators(basis.I2)[0]
    term = (params.a * params.nu_1 / (2 * params.omega_1) * np.kron(j1x, np.eye(j2x.shape[0]))
            + params.a * params.nu_2 / (2 * params.omega_2) * np.kron(np.eye(j1x.shape[0]), j2x))
    return np.kron(SZ_CENTRAL, term)
