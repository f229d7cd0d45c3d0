"""How the steady impurity and the convergence time scale.

The classical rate picture treats each rung pair as a driven, damped two-level
system. Its steady impurity falls as kappa^-2, its convergence time does not
depend on the ensemble size, and dephasing only rescales kappa.
"""

import math

import numpy as np

from centralspin.rates import RateParams, closed_form_impurity, detuning_scan, resonance_fwhm, steady_populations

print("kappa   impurity (I=100)  closed form")
for kappa in (1, 3, 10, 30):
    sol = steady_populations(RateParams.from_kappa(100, kappa))
    print(f"{kappa:5g}   {sol.impurity:.4e}        {float(closed_form_impurity(kappa)):.4e}")

omega_c, a, kappa = 100.0, 20.0, 10.0
g = a * a / (4 * omega_c)
print(f"\nconvergence time at kappa={kappa:g} in units of 16 pi omega_c / a^2")
for N in (32, 128, 512, 2048):
    t_c = steady_populations(RateParams.from_kappa(math.sqrt(N / 2), kappa, g=g)).t_c
    print(f"  N = {N:5d}: {t_c / (16 * math.pi * omega_c / a**2):.3f}")

base = RateParams.from_kappa(100, 10)
x = np.linspace(0.5, 1.5, 401)
print("\nresonance width versus dephasing (Gamma_d tau0 / 2 pi)")
for nd in (0.0, 0.3, 1.0, 3.0):
    rows = detuning_scan(base, x * base.delta_omega, [nd * base.gamma_op])
    width = resonance_fwhm(x, [r.impurity for r in rows])
    eps = steady_populations(RateParams.from_kappa(100, 10, norm_dephasing=nd)).impurity
    print(f"  {nd:3.1f}: FWHM {width:.3f} delta omega, on-resonance impurity {eps:.2e}")
