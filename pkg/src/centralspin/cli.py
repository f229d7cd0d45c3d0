"""
Command-line runner: figure data, parameter sweeps, singlet optimization and validation.

Every command writes its data files plus ``manifest.json`` into ``--outdir``.
Settings resolve as command-line flags over ``--config`` over built-in
defaults, and the resolved set is echoed into the manifest.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import replace
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import yaml

from . import checks, lindblad, platforms, pulsed, rates, singlet
from .hamiltonian import PhysicalParams, derive_scales
from .io import (
    load_mapping,
    params_from_config,
    write_csv,
    write_json,
    write_matrix_csv,
)
from .ladder import build_basis, classical_i_sq, manifold_for_ensemble

log = logging.getLogger("centralspin")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")

DEFAULTS: Dict[str, Dict] = {
    "fig2": {"kappa": 5.0, "N": 32, "n_iterations": 200},
    "fig3": {"kappa_min": 0.3, "kappa_max": 30.0, "n_kappa": 25, "N_list": [32, 128, 512, 2048, 10000],
             "pulsed_N": 32, "pulsed_iterations": 200, "tc_kappa": 10.0},
    "fig4": {"kappa": 10.0, "I": 100, "n_omega": 801, "norm_dephasing_list": [0.0, 0.3, 1.0, 3.0],
             "kappa_list": [3.0, 10.0, 30.0], "nd_min": 1e-3, "nd_max": 10.0, "n_nd": 25},
    "fig5": {"kappa_min": 0.1, "kappa_max": 1e4, "n_kappa": 81, "nd_min": 1e-3, "nd_max": 1e3,
             "n_nd": 61, "n_points": 41, "platforms": None},
    "fig6": {"K": 4, "epochs": 7000},
    "sweep": {"model": "rate", "kappa": [1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0], "N": 32,
              "norm_dephasing": 0.0, "n_iterations": 200},
    "optimize": {"K": 2, "epochs": 1000, "zeta": 0.015, "xi": 1e-8, "beta": 0.85, "tol": 0.0},
}


class UsageError(ValueError):
    pass


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def resolve(command: str, config: Dict, overrides: Dict) -> Dict:
    cfg = dict(DEFAULTS.get(command, {}))
    cfg.update(config)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def manifold(cfg: Dict):
    """(I1, I2, N) from the config, rejecting inconsistent combinations."""
    I1, I2, N = cfg.get("I1"), cfg.get("I2"), cfg.get("N")
    if (I1 is None) != (I2 is None):
        raise UsageError("give both I1 and I2, or neither")
    if I1 is None:
        if N is None:
            raise UsageError("need N or I1/I2")
        I = manifold_for_ensemble(float(N))
        return I, I, float(N)
    I1, I2 = float(I1), float(I2)
    implied = 2 * I1 * I2
    if N is not None and not math.isclose(float(N), implied, rel_tol=1e-9):
        raise UsageError(f"N={N} is inconsistent with I1={I1}, I2={I2} (2 I1 I2 = {implied:g})")
    return I1, I2, implied if N is None else float(N)


def physical(cfg: Dict, N: float, kappa: Optional[float] = None) -> PhysicalParams:
    """Params from explicit physical keys (Hz), else the dimensionless set at ``kappa``."""
    if any(k in cfg for k in ("omega_c", "omega_1", "omega_2", "a")):
        try:
            return params_from_config({**cfg, "N": N})
        except ValueError as exc:
            raise UsageError(f"config: {exc}") from exc
    extra = {k: cfg[k] for k in ("delta",) if k in cfg}
    kappa = float(cfg.get("kappa", 5.0)) if kappa is None else kappa
    return PhysicalParams.dimensionless(kappa, N, **extra)


# -- figures ------------------------------------------------------------------

def fig2(cfg: Dict, outdir: Path, threads: int) -> List[Path]:
    I1, I2, N = manifold(cfg)
    basis = build_basis(I1, I2)
    params = physical(cfg, N)
    run = pulsed.run_stage2(basis, params, int(cfg["n_iterations"]), record_substeps=True)
    k = np.arange(len(run.series))
    col = run.column
    norm = classical_i_sq(basis)
    files = [
        write_csv(outdir / "fig2_sx.csv", ["iteration", "sx"], zip(k, col("sx")), ["1", "hbar"]),
        write_csv(outdir / "fig2_isq.csv", ["iteration", "i_sq", "i_sq_over_classical"],
                  zip(k, col("i_sq"), col("i_sq") / norm), ["1", "hbar^2", "1"]),
        write_csv(outdir / "fig2_polarizations.csv",
                  ["iteration", "i1z", "i2z", "var_i1z", "var_i2z"],
                  zip(k, col("i1z"), col("i2z"), col("var_i1z"), col("var_i2z")),
                  ["1", "hbar", "hbar", "hbar^2", "hbar^2"]),
        write_csv(outdir / "fig2_impurity.csv", ["iteration", "impurity"], zip(k, col("impurity"))),
        write_csv(outdir / "fig2_sx_substeps.csv", ["t_over_tau0", "sx"], run.substeps,
                  ["1", "hbar"], comment="first iteration, sampled within one reset interval"),
    ]
    eps, pp = run.steady_impurity()
    files.append(write_json(outdir / "fig2_summary.json", {
        "steady_impurity": eps, "steady_impurity_ptp": pp, "converged_at": run.converged_at,
        "tau0": run.scales.tau0, "kappa": run.scales.kappa}))
    return files


def fig3(cfg: Dict, outdir: Path, threads: int) -> List[Path]:
    kappas = np.geomspace(cfg["kappa_min"], cfg["kappa_max"], int(cfg["n_kappa"]))
    rows = []
    for N in cfg["N_list"]:
        I = manifold_for_ensemble(float(N))
        for kappa in kappas:
            sol = rates.steady_populations(rates.RateParams.from_kappa(I, float(kappa)))
            rows.append(("rate", float(N), float(kappa), sol.impurity, sol.t_c))
    N = float(cfg["pulsed_N"])
    I = manifold_for_ensemble(N)
    basis = build_basis(I, I)
    base = PhysicalParams.dimensionless(1.0, N)
    for p in pulsed.sweep_kappa(basis, base, kappas, int(cfg["pulsed_iterations"]), threads):
        rows.append(("pulsed", N, p.kappa, p.eps_ss, math.nan if p.t_c is None else p.t_c))
    for p in lindblad.steady_impurity_sweep(basis, base, kappas, threads):
        rows.append(("lindblad", N, p.kappa, p.impurity, math.nan))
    files = [write_csv(outdir / "fig3_impurity_vs_kappa.csv",
                       ["model", "N", "kappa", "impurity", "t_c"], rows, ["-", "1", "1", "1", "1/g"],
                       comment="dimensionless units, g = a^2/(4 omega_c) = 1")]
    tc_rows = []
    for N in cfg["N_list"]:
        I = manifold_for_ensemble(float(N))
        sol = rates.steady_populations(rates.RateParams.from_kappa(I, float(cfg["tc_kappa"])))
        tc_rows.append((float(N), sol.t_c, sol.t_c / (4 * math.pi)))
    files.append(write_csv(outdir / "fig3_tc_vs_N.csv", ["N", "t_c", "t_c_over_16pi_omega_c_a2"],
                           tc_rows, ["1", "1/g", "1"]))
    return files


def fig4(cfg: Dict, outdir: Path, threads: int) -> List[Path]:
    base = rates.RateParams.from_kappa(float(cfg["I"]), float(cfg["kappa"]))
    x = np.linspace(0.0, 2.0, int(cfg["n_omega"]))
    levels = [float(v) for v in cfg["norm_dephasing_list"]]
    scan = rates.detuning_scan(base, x * base.delta_omega, [nd * base.gamma_op for nd in levels])
    rows = [(r.omega / base.delta_omega, r.gamma_d / base.gamma_op, r.impurity) for r in scan]
    files = [write_csv(outdir / "fig4_detuning.csv", ["omega_over_delta_omega", "norm_dephasing",
                                                      "impurity"], rows)]
    nds = np.geomspace(cfg["nd_min"], cfg["nd_max"], int(cfg["n_nd"]))
    rows = []
    for kappa in cfg["kappa_list"]:
        p = rates.RateParams.from_kappa(float(cfg["I"]), float(kappa))
        for r in rates.dephasing_scan(p, nds * p.gamma_op):
            rows.append((float(kappa), r.norm_dephasing, r.impurity,
                         float(rates.closed_form_impurity(kappa, r.norm_dephasing)), r.t_c))
    files.append(write_csv(outdir / "fig4_dephasing.csv",
                           ["kappa", "norm_dephasing", "impurity", "closed_form", "t_c"], rows,
                           ["1", "1", "1", "1", "1/g"]))
    return files


def fig5(cfg: Dict, outdir: Path, threads: int) -> List[Path]:
    kappas = np.geomspace(cfg["kappa_min"], cfg["kappa_max"], int(cfg["n_kappa"]))
    nds = np.geomspace(cfg["nd_min"], cfg["nd_max"], int(cfg["n_nd"]))
    files = [write_matrix_csv(outdir / "fig5_map.csv", platforms.impurity_map(kappas, nds), nds,
                              kappas, "norm_dephasing", "kappa", "impurity (thermodynamic limit)")]
    rows, summary = [], []
    for plat in platforms.load_platforms(cfg.get("platforms")):
        sweep = platforms.field_sweep(plat, int(cfg["n_points"]), threads)
        for p in sweep.points:
            rows.append((plat.name, math.nan if p.B is None else p.B, p.delta_omega / (2 * math.pi),
                         p.kappa, p.norm_dephasing, p.epsilon, p.t_c))
        summary.append(sweep.as_dict())
    files.append(write_csv(outdir / "fig5_platforms.csv",
                           ["platform", "B", "delta_omega", "kappa", "norm_dephasing", "impurity", "t_c"],
                           rows, ["-", "T", "Hz", "1", "1", "1", "s"]))
    files.append(write_json(outdir / "fig5_summary.json", {"platforms": summary}))
    return files


def _trace_rows(label, diags):
    return [(label, d.gates, d.trace_dist, d.hs_cost, d.i_sq, d.singlet_overlap) for d in diags]


def fig6(cfg: Dict, outdir: Path, threads: int) -> List[Path]:
    K = int(cfg["K"])
    basis = singlet.ladder_for_k(K)
    ideal = singlet.ideal_sequence(K)
    _, d_ideal = singlet.apply_sequence(ideal, basis)
    report = singlet.rmsprop_optimize(singlet.init_guess(K, basis),
                                      singlet.OptimizerConfig(max_epochs=int(cfg["epochs"])), basis)
    _, d_opt = singlet.apply_sequence(report.final, basis)
    _, d_init = singlet.apply_sequence(report.initial, basis)
    cols = ["protocol", "gates", "trace_distance", "hs_cost", "i_sq", "singlet_overlap"]
    rows = _trace_rows("simplified", d_ideal) + _trace_rows("initial", d_init) + _trace_rows("optimized", d_opt)
    return [
        write_csv(outdir / "fig6_trace_distance.csv", cols, rows, ["-", "1", "1", "1", "hbar^2", "1"]),
        _cost_trace(outdir / "fig6_cost_trace.csv", report),
        _write_text(outdir / "fig6_sequence_optimized.json", report.final.to_json(basis)),
        _write_text(outdir / "fig6_sequence_simplified.json", ideal.to_json(basis)),
    ]


def _cost_trace(path, report) -> Path:
    return write_csv(path, ["epoch", "cost", "trace_dist"],
                     zip(range(len(report.cost_trace)), report.cost_trace, report.trace_dist_trace))


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n")
    return path


FIGURE_RUNNERS = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}


# -- sweep / optimize / validate ---------------------------------------------

def sweep(cfg: Dict, outdir: Path, threads: int) -> List[Path]:
    model = cfg["model"]
    kappas = [float(k) for k in np.atleast_1d(cfg["kappa"])]
    if not kappas or min(kappas) <= 0:
        raise UsageError("kappa values must be positive")
    I1, I2, N = manifold(cfg)
    nd = float(cfg["norm_dephasing"])
    if model == "rate":
        if I1 != I2:
            raise UsageError("the rate model needs I1 == I2")
        rows = []
        for k in kappas:
            sol = rates.steady_populations(rates.RateParams.from_kappa(I1, k, norm_dephasing=nd))
            rows.append((k, sol.impurity, sol.fidelity_n0, sol.t_c))
        cols, units = ["kappa", "impurity", "fidelity_n0", "t_c"], ["1", "1", "1", "1/g"]
    elif model == "pulsed":
        basis = build_basis(I1, I2)
        pts = pulsed.sweep_kappa(basis, physical(cfg, N, kappas[0]), kappas, int(cfg["n_iterations"]), threads)
        rows = [(p.kappa, p.eps_ss, p.eps_pp, p.iterations, p.t_c) for p in pts]
        cols = ["kappa", "impurity", "impurity_ptp", "iterations", "t_c"]
        units = ["1", "1", "1", "1", "s (1/g without physical keys)"]
    elif model == "lindblad":
        basis = build_basis(I1, I2)
        params = physical(cfg, N, kappas[0])
        if nd:
            params = replace(params, gamma_b=nd * derive_scales(params, basis).gamma_op)
        pts = lindblad.steady_impurity_sweep(basis, params, kappas, threads)
        rows = [(p.kappa, p.impurity, p.fidelity_n0, p.solver) for p in pts]
        cols, units = ["kappa", "impurity", "fidelity_n0", "solver"], ["1", "1", "1", "-"]
    else:
        raise UsageError(f"unknown model {model!r} (rate, pulsed, lindblad)")
    return [write_csv(outdir / f"sweep_{model}.csv", cols, rows, units)]


def optimize(cfg: Dict, outdir: Path, threads: int) -> List[Path]:
    K = int(cfg["K"])
    basis = singlet.ladder_for_k(K)
    conf = singlet.OptimizerConfig(zeta=float(cfg["zeta"]), xi=float(cfg["xi"]), beta=float(cfg["beta"]),
                                   max_epochs=int(cfg["epochs"]), tol=float(cfg["tol"]))
    report = singlet.rmsprop_optimize(singlet.init_guess(K, basis), conf, basis)
    log.info("K=%d: trace distance %.4g after %d epochs", K, report.final_trace_dist, report.epochs)
    return [
        _cost_trace(outdir / f"optimize_K{K}_cost.csv", report),
        _write_text(outdir / f"optimize_K{K}_sequence.json", report.final.to_json(basis)),
        write_json(outdir / f"optimize_K{K}_report.json", {
            "K": K, "epochs": report.epochs, "final_cost": report.final_cost,
            "final_trace_distance": report.final_trace_dist, "initial_cost": report.cost_trace[0]}),
    ]


def validate(level: str, outdir: Path):
    results = checks.run_checks(level)
    for r in results:
        print(r.line())
    path = write_json(outdir / f"validate_{level}.json", {"level": level,
                                                          "checks": [r.as_dict() for r in results]})
    return [path], all(r.passed for r in results)


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML/JSON file of flat settings (frequencies in Hz)")
    common.add_argument("--outdir", type=Path, default=Path("out"))
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="centralspin", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("figure", parents=[common], help="write a named data set (fig2 .. fig6)")
    p.add_argument("id", choices=FIGURES)
    p = sub.add_parser("sweep", parents=[common], help="impurity over kappa")
    p.add_argument("--model", choices=("rate", "pulsed", "lindblad"))
    p.add_argument("--kappa", type=lambda s: [float(x) for x in s.split(",")],
                   help="comma-separated kappa values")
    p.add_argument("--N", type=float)
    p.add_argument("--I1", type=float)
    p.add_argument("--I2", type=float)
    p.add_argument("--norm-dephasing", dest="norm_dephasing", type=float)
    p = sub.add_parser("optimize", parents=[common], help="variational singlet compilation")
    p.add_argument("--K", type=int)
    p.add_argument("--epochs", type=int)
    p = sub.add_parser("validate", parents=[common], help="run the validation suite")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    return parser


_NON_CONFIG = {"command", "config", "outdir", "threads", "verbose", "id", "level"}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    outdir: Path = args.outdir
    try:
        config = load_mapping(args.config) if args.config else {}
        overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
        ok = True
        if args.command == "figure":
            cfg = resolve(args.id, config, overrides)
            files = FIGURE_RUNNERS[args.id](cfg, outdir, args.threads)
            name = f"figure {args.id}"
        elif args.command == "validate":
            cfg = {"level": args.level}
            files, ok = validate(args.level, outdir)
            name = "validate"
        else:
            cfg = resolve(args.command, config, overrides)
            runner = sweep if args.command == "sweep" else optimize
            files = runner(cfg, outdir, args.threads)
            name = args.command
    except (ValueError, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = {
        "command": name,
        "config": cfg,
        "version": tool_version(),
        "wall_time_s": time.perf_counter() - t0,
        "outputs": [str(f) for f in files],
        "deterministic": {"rng": "none"},
    }
    write_json(outdir / "manifest.json", manifest)
    return EXIT_OK if ok else EXIT_FAILED
