"""
Candidate material platforms mapped onto the dimensionless operating point
(kappa, Gamma_d tau0 / 2 pi), with rate-model impurities and convergence times.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .rates import RateParams, closed_form_impurity, steady_populations

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
FINITE_I = 100


@dataclass(frozen=True)
class PlatformParams:
    """Platform table in angular units (rad/s, rad/s/T).

    Field-scaled platforms set ``delta_omega_per_T`` and ``omega_c_per_T``;
    direct platforms (``g_direct`` set) give the three-body strength and a
    fixed ``delta_omega_range`` and ignore the field.
    """

    name: str
    A_total: Optional[float] = None
    delta_omega_per_T: Optional[float] = None
    omega_c_per_T: Optional[float] = None
    N_eff: float = 1.0
    gamma_d_nuclear: float = 0.0
    B_range: Optional[Tuple[float, float]] = None
    so_exponent: Optional[float] = None
    so_reference: Optional[Tuple[float, float]] = None
    g_direct: Optional[float] = None
    delta_omega_range: Optional[Tuple[float, float]] = None
    ladder_I: Optional[float] = None

    def __post_init__(self):
        if self.gamma_d_nuclear < 0:
            raise ValueError(f"{self.name}: gamma_d_nuclear must be non-negative")
        if self.N_eff <= 0:
            raise ValueError(f"{self.name}: N_eff must be positive")
        if self.direct:
            if self.g_direct <= 0:
                raise ValueError(f"{self.name}: g_direct must be positive")
            if self.delta_omega_range is None or not 0 < self.delta_omega_range[0] <= self.delta_omega_range[1]:
                raise ValueError(f"{self.name}: delta_omega_range must be positive and ordered")
            return
        for name in ("A_total", "delta_omega_per_T", "omega_c_per_T"):
            v = getattr(self, name)
            if v is None or v <= 0:
                raise ValueError(f"{self.name}: {name} must be positive")
        if self.B_range is None or not 0 < self.B_range[0] <= self.B_range[1]:
            raise ValueError(f"{self.name}: B_range must be positive and ordered")
        if self.so_reference is not None:
            rate, b_ref = self.so_reference
            if rate < 0 or b_ref <= 0 or self.so_exponent is None:
                raise ValueError(f"{self.name}: so_reference needs a non-negative rate, a positive "
                                 "field and so_exponent")

    @property
    def direct(self) -> bool:
        return self.g_direct is not None


@dataclass(frozen=True)
class BenchPoint:
    B: Optional[float]
    kappa: float
    norm_dephasing: float
    epsilon: float
    t_c: float
    delta_omega: float
    tau0: float


def builtin_platforms() -> List[PlatformParams]:
    GHz, MHz, kHz = 1e9 * TWO_PI, 1e6 * TWO_PI, 1e3 * TWO_PI
    return [
        PlatformParams("GaAs-AlGaAs", A_total=11 * GHz, delta_omega_per_T=5.76 * MHz,
                       omega_c_per_T=1.3 * GHz, N_eff=1e5, gamma_d_nuclear=10 * kHz,
                       B_range=(1.0, 10.0), so_exponent=5),
        PlatformParams("InGaAs", A_total=11 * GHz, delta_omega_per_T=5.76 * MHz,
                       omega_c_per_T=6 * GHz, N_eff=1e5, gamma_d_nuclear=10 * MHz,
                       B_range=(0.1, 10.0), so_exponent=5),
        PlatformParams("Gate-Defined", A_total=11 * GHz, delta_omega_per_T=5.76 * MHz,
                       omega_c_per_T=8 * GHz, N_eff=1e6, gamma_d_nuclear=10 * kHz,
                       B_range=(0.1, 10.0), so_exponent=3),
        PlatformParams("REI", N_eff=4, gamma_d_nuclear=1.25 * kHz, g_direct=0.1 * kHz,
                       delta_omega_range=(10 * kHz, 100 * kHz), ladder_I=1.0),
    ]


_ANGULAR_KEYS = ("A_total", "delta_omega_per_T", "omega_c_per_T", "gamma_d_nuclear", "g_direct")
_PAIR_KEYS = ("B_range", "so_reference", "delta_omega_range")


def platform_from_mapping(data: Dict, units: str = "rad/s") -> PlatformParams:
    """Build a platform from a flat mapping, converting from Hz when ``units == "Hz"``."""
    if units not in ("rad/s", "Hz"):
        raise ValueError(f"unknown units {units!r}")
    known = {f for f in PlatformParams.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown platform keys: {sorted(unknown)}")
    if "name" not in data:
        raise ValueError("platform entry needs a name")
    kw = dict(data)
    for key in _PAIR_KEYS:
        if kw.get(key) is not None:
            pair = tuple(float(x) for x in kw[key])
            if len(pair) != 2:
                raise ValueError(f"{data['name']}: {key} must have two entries")
            kw[key] = pair
    if units == "Hz":
        for key in _ANGULAR_KEYS:
            if kw.get(key) is not None:
                kw[key] = float(kw[key]) * TWO_PI
        if kw.get("delta_omega_range") is not None:
            kw["delta_omega_range"] = tuple(TWO_PI * x for x in kw["delta_omega_range"])
        if kw.get("so_reference") is not None:
            rate, b = kw["so_reference"]
            kw["so_reference"] = (TWO_PI * rate, b)
    return PlatformParams(**kw)


def load_platforms(source=None) -> List[PlatformParams]:
    """Builtin tables, or entries from a mapping ``{"units": ..., "platforms": [...]}``.

    ``source`` may also be a path to a YAML or JSON file with that layout.
    Entries naming a builtin platform override only the keys they give.
    """
    if source is None:
        return builtin_platforms()
    if not isinstance(source, dict):
        from .io import load_mapping
        source = load_mapping(source)
    units = source.get("units", "rad/s")
    builtin = {p.name: p for p in builtin_platforms()}
    out = []
    for entry in source.get("platforms", []):
        name = entry.get("name")
        if name in builtin:
            entry = {**_as_mapping(builtin[name], units), **entry}
        out.append(platform_from_mapping(entry, units))
    if not out:
        raise ValueError("config lists no platforms")
    return out


def _as_mapping(p: PlatformParams, units: str) -> Dict:
    d = {k: getattr(p, k) for k in PlatformParams.__dataclass_fields__}
    if units == "Hz":
        for key in _ANGULAR_KEYS:
            if d[key] is not None:
                d[key] = d[key] / TWO_PI
        if d["delta_omega_range"] is not None:
            d["delta_omega_range"] = tuple(x / TWO_PI for x in d["delta_omega_range"])
        if d["so_reference"] is not None:
            d["so_reference"] = (d["so_reference"][0] / TWO_PI, d["so_reference"][1])
    return d


def _half_integer(x: float) -> float:
    return max(0.5, round(2 * x) / 2)


def spin_orbit_rate(platform: PlatformParams, B: float) -> float:
    """Gamma_so(B) = Gamma_ref (B / B_ref)^p, or 0 without a configured reference."""
    if platform.so_reference is None:
        return 0.0
    rate, b_ref = platform.so_reference
    return rate * (B / b_ref) ** platform.so_exponent


def operating_point(platform: PlatformParams, B: Optional[float] = None,
                    delta_omega: Optional[float] = None) -> RateParams:
    """Rate-model parameters at field ``B`` (or at ``delta_omega`` for direct platforms)."""
    if platform.direct:
        lo, hi = platform.delta_omega_range
        dw = lo if delta_omega is None else delta_omega
        if not lo * (1 - 1e-12) <= dw <= hi * (1 + 1e-12):
            raise ValueError(f"{platform.name}: delta_omega {dw:g} outside [{lo:g}, {hi:g}]")
        I = platform.ladder_I
        g = platform.g_direct
        tau0 = math.pi / (2 * g * I * I)
        return RateParams(I=I, g=g, delta_omega=dw, gamma_op=TWO_PI / tau0,
                          gamma_d=platform.gamma_d_nuclear)
    if B is None:
        raise ValueError(f"{platform.name}: a magnetic field is required")
    lo, hi = platform.B_range
    if not lo * (1 - 1e-12) <= B <= hi * (1 + 1e-12):
        raise ValueError(f"{platform.name}: B = {B:g} T outside [{lo:g}, {hi:g}] T")
    N = platform.N_eff
    a = platform.A_total / N
    omega_c = platform.omega_c_per_T * B
    I = _half_integer(math.sqrt(N / 2))
    tau0 = TWO_PI * omega_c / (a * a * I * I)
    return RateParams(I=I, g=a * a / (4 * omega_c), delta_omega=platform.delta_omega_per_T * B,
                      gamma_op=TWO_PI / tau0,
                      gamma_d=platform.gamma_d_nuclear + spin_orbit_rate(platform, B))


def evaluate(platform: PlatformParams, B: Optional[float] = None,
             delta_omega: Optional[float] = None) -> BenchPoint:
    params = operating_point(platform, B, delta_omega)
    sol = steady_populations(params)
    tau0 = TWO_PI / params.gamma_op
    if platform.direct:
        kappa = params.kappa
    else:
        a = platform.A_total / platform.N_eff
        kappa = platform.omega_c_per_T * B * params.delta_omega / (platform.N_eff * a * a)
    return BenchPoint(B=B, kappa=kappa, norm_dephasing=params.gamma_d * tau0 / TWO_PI,
                      epsilon=sol.impurity, t_c=sol.t_c, delta_omega=params.delta_omega,
                      tau0=tau0)


@dataclass
class SweepSummary:
    platform: str
    best: BenchPoint
    points: List[BenchPoint] = field(repr=False, default_factory=list)

    def as_dict(self) -> Dict:
        b = self.best
        return {"platform": self.platform, "B": b.B, "kappa": b.kappa,
                "norm_dephasing": b.norm_dephasing, "epsilon": b.epsilon, "t_c": b.t_c}


def field_sweep(platform: PlatformParams, n_points: int = 41, threads: int = 1) -> SweepSummary:
    """Log-spaced sweep over the field range (or the Delta omega range); best = min epsilon."""
    if n_points < 1:
        raise ValueError("n_points must be positive")
    if platform.so_reference is None and not platform.direct:
        log.info("%s: no spin-orbit reference configured; sweep uses nuclear dephasing only",
                 platform.name)
    if platform.direct:
        grid = np.geomspace(*platform.delta_omega_range, n_points)
        one = lambda x: evaluate(platform, delta_omega=float(x))
    else:
        grid = np.geomspace(*platform.B_range, n_points)
        one = lambda x: evaluate(platform, B=float(x))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            points = list(pool.map(one, grid))
    else:
        points = [one(x) for x in grid]
    best = min(points, key=lambda p: p.epsilon)
    return SweepSummary(platform.name, best, points)


def impurity_map(kappa_grid: Sequence[float], dephasing_grid: Sequence[float]) -> np.ndarray:
    """Thermodynamic-limit impurity, rows over ``dephasing_grid``, columns over ``kappa_grid``."""
    k = np.asarray(kappa_grid, dtype=float)
    d = np.asarray(dephasing_grid, dtype=float)
    if np.any(k <= 0) or np.any(d < 0):
        raise ValueError("kappa must be positive and dephasing non-negative")
    return closed_form_impurity(k[None, :], d[:, None])


def finite_i_impurity(kappa: float, norm_dephasing: float, I: float = FINITE_I) -> float:
    """Rate-model impurity at finite I for a map cell (cross-check of :func:`impurity_map`)."""
    return steady_populations(RateParams.from_kappa(I, kappa, norm_dephasing=norm_dephasing)).impurity
