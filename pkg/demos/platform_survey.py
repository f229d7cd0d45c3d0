"""Where the protocol works: a survey of candidate hardware.

Each quantum-dot platform maps a magnetic field onto kappa (which grows as
B^2) and onto the dimensionless dephasing; the rare-earth platform has a
direct three-body coupling instead. The sweep reports the best achievable
impurity and its convergence time.
"""

from centralspin.platforms import builtin_platforms, field_sweep, impurity_map

print(f"{'platform':14s} {'B [T]':>7s} {'kappa':>9s} {'dephasing':>10s} {'impurity':>10s} {'T_c [s]':>10s}")
for platform in builtin_platforms():
    best = field_sweep(platform, n_points=41).best
    B = "-" if best.B is None else f"{best.B:.2f}"
    print(f"{platform.name:14s} {B:>7s} {best.kappa:9.3g} {best.norm_dephasing:10.3g} "
          f"{best.epsilon:10.2e} {best.t_c:10.3g}")

kappas, dephasing = [1, 10, 100, 1000], [0.01, 1, 100]
grid = impurity_map(kappas, dephasing)
print("\nlarge-I impurity map (rows: dephasing, columns: kappa)")
print("          " + "".join(f"{k:>10g}" for k in kappas))
for nd, row in zip(dephasing, grid):
    print(f"{nd:>10g}" + "".join(f"{v:10.1e}" for v in row))
