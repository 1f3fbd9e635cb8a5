"""Batch front door: parse a config, run one subcommand, write CSV artifacts.

Every run writes, into the output directory: the subcommand's CSV files, one
plot-description text file per CSV (column mapping and axis labels, no
plotting dependency), a canonical config echo, and manifest.txt with the
version tag, seeds, wall time, and the pass/fail state of every embedded
check.  Exit status: 0 when all checks pass, 1 when some check fails,
2 on configuration or runtime errors.  CSV cells use 17 significant digits
and '\n' line ends, so identical configs give byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    McConfig,
    asymptotics_experiment,
    limit_law_statistics,
    mc_lp_bound,
    mc_mean_mass,
    path_clock,
    reference_table,
    support_experiment,
    sweep_paths,
)
from .config import RunConfig, apply_overrides, parse_config, serialize_config
from .errors import ConfigError, SpmeError
from .exact import (
    BarenblattParams,
    LinearPressureParams,
    QuadraticPressureParams,
    barenblatt,
    linear_pressure_base,
    quadratic_pressure,
)
from .noise import CoefficientPair, TimeGrid, interp_H, interp_h
from .solver import (
    FieldState,
    SchemeConfig,
    SpatialGrid,
    barenblatt_state,
    box_state,
    eval_on_centers,
    evolve,
)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_plot_note(csv_path: Path, x: str, y: str, xlabel: str, ylabel: str, title: str) -> None:
    note = csv_path.with_suffix(csv_path.suffix + ".plot.txt")
    with open(note, "w", encoding="utf-8", newline="") as fh:
        fh.write(
            f"data: {csv_path.name}\n"
            f"x-column: {x}\n"
            f"y-column: {y}\n"
            f"x-label: {xlabel}\n"
            f"y-label: {ylabel}\n"
            f"title: {title}\n"
        )


def _spatial_grid(cfg: RunConfig) -> SpatialGrid:
    return SpatialGrid(
        kind=cfg.grid_kind, lo=cfg.grid_lo, hi=cfg.grid_hi, cells=cfg.cells, dim=cfg.dim
    )


def _initial_state(cfg: RunConfig):
    grid = _spatial_grid(cfg)
    if cfg.initial == "box":
        return box_state(grid, cfg.height, cfg.half_width)
    if cfg.initial == "barenblatt":
        params = BarenblattParams(m=cfg.m, d=cfg.dim, b=cfg.b)
        return barenblatt_state(grid, params, cfg.t0)
    if cfg.initial.startswith("csv:"):
        table = np.loadtxt(cfg.initial[4:], delimiter=",", skiprows=1, ndmin=2)
        profile = np.interp(grid.centers, table[:, 0], table[:, 1], left=0.0, right=0.0)
        return FieldState(grid=grid, time=0.0, values=np.clip(profile, 0.0, None))
    raise ConfigError("initial must be box, barenblatt, or csv:PATH", key="initial")


def _mc_config(cfg: RunConfig, with_initial: bool = True) -> McConfig:
    return McConfig(
        n_paths=cfg.n_paths,
        master_seed=cfg.seed,
        grid=TimeGrid.uniform(cfg.horizon, cfg.steps),
        coeffs=CoefficientPair.from_pieces(cfg.f, cfg.g),
        m=cfg.m,
        initial=_initial_state(cfg) if with_initial else None,
        scheme=SchemeConfig(cfl_safety=cfg.cfl_safety),
        threads=cfg.threads,
    )


def _report_rows(report) -> list:
    return [
        (
            report.estimate,
            report.stderr,
            report.n,
            report.target,
            report.passed,
        )
    ]


_SUMMARY_HEADER = ("estimate", "stderr", "n_paths", "target", "passed")


def _run_exact(cfg: RunConfig, outdir: Path) -> dict:
    xs = np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.cells + 1)
    rows = []
    if cfg.solution == "barenblatt":
        params = BarenblattParams(m=cfg.m, d=cfg.dim, b=cfg.b)
        for t in cfg.times:
            rows.extend((t, x, barenblatt(params, t, x)) for x in xs)
    elif cfg.solution == "quadratic_pressure":
        params = QuadraticPressureParams(m=cfg.m, d=cfg.dim, q=cfg.q)
        for t in cfg.times:
            rows.extend((t, x, quadratic_pressure(params, t, x)) for x in xs)
    else:
        base = linear_pressure_base(cfg.m)
        for t in cfg.times:
            rows.extend((t, x, float(base.evaluate(t, x))) for x in xs)
    csv_path = outdir / f"{cfg.solution}.csv"
    _write_csv(csv_path, ("t", "x", "value"), rows)
    _write_plot_note(
        csv_path, "x", "value", "position", "solution value",
        f"{cfg.solution} profile at the configured times",
    )
    return {}


def _run_path(cfg: RunConfig, outdir: Path) -> dict:
    mc = _mc_config(cfg, with_initial=False)
    for i in range(cfg.n_paths):
        clock = path_clock(mc, i)
        rows = zip(clock.grid.nodes, clock.path.w, clock.h, clock.H)
        csv_path = outdir / f"path_{i:03d}.csv"
        _write_csv(csv_path, ("t", "w", "h", "H"), rows)
        _write_plot_note(
            csv_path, "t", "H", "time", "random clock",
            "multiplier and clock along one noise path",
        )
    return {}


def _run_evolve(cfg: RunConfig, outdir: Path) -> dict:
    initial = _initial_state(cfg)
    horizon = cfg.horizon if cfg.horizon > initial.time else initial.time + cfg.horizon
    snaps = tuple(t for t in cfg.times if initial.time < t < horizon)
    table = evolve(initial, cfg.m, horizon, SchemeConfig(cfg.cfl_safety, snaps))
    for k, state in enumerate(table.states):
        csv_path = outdir / f"snapshot_{k:03d}.csv"
        _write_csv(
            csv_path, ("x", "value"),
            zip(state.grid.centers, state.values),
        )
        _write_plot_note(
            csv_path, "x", "value", "position", "field value",
            f"solution snapshot at t = {state.time:.6g}",
        )
    mass_path = outdir / "mass_log.csv"
    _write_csv(mass_path, ("t", "mass"), zip(table.times, table.masses))
    _write_plot_note(
        mass_path, "t", "mass", "time", "discrete mass", "mass conservation log",
    )
    drift = float(np.max(np.abs(table.masses - table.masses[0])))
    return {"mass_conserved": drift <= 1e-8 * max(1.0, table.masses[0])}


def _run_transform(cfg: RunConfig, outdir: Path) -> dict:
    mc = _mc_config(cfg)
    probe_times = [t for t in cfg.times if t > 0.0] or [cfg.horizon]
    samples = sweep_paths(
        mc, lambda c: [(interp_h(c, t), interp_H(c, t)) for t in probe_times]
    )
    max_clock = max(s for row in samples for _, s in row)
    table = reference_table(mc, 1.05 * max_clock)
    t_off = mc.initial.time
    rows = []
    for i, row in enumerate(samples):
        for t, (h, s) in zip(probe_times, row):
            for x in cfg.points:
                rows.append((i, t, x, h * float(eval_on_centers(table, t_off + s, x))))
    csv_path = outdir / "samples.csv"
    _write_csv(csv_path, ("path", "t", "x", "value"), rows)
    _write_plot_note(
        csv_path, "t", "value", "time", "stochastic field",
        "transformed field sampled on the probe schedule",
    )
    return {}


def _run_mc(cfg: RunConfig, outdir: Path) -> dict:
    mc = _mc_config(cfg)
    if cfg.mode == "mean_mass":
        report = mc_mean_mass(mc, cfg.t)
        per_path = report.extras["per_path"]
        per_header, ylabel = ("path", "mass"), "path mass estimate"
    elif cfg.mode == "lp_bound":
        report = mc_lp_bound(mc, cfg.p, cfg.t)
        per_path = report.extras["per_path"]
        per_header, ylabel = ("path", "power_sum"), "path Lp power sum"
    else:
        report = limit_law_statistics(mc)
        per_path = report.extras["xis"]
        per_header, ylabel = ("path", "log_multiplier"), "log h at the horizon"
    per_csv = outdir / "per_path.csv"
    _write_csv(per_csv, per_header, list(enumerate(per_path)))
    _write_plot_note(per_csv, "path", per_header[1], "path index", ylabel,
                     f"per-path results for mc {cfg.mode}")
    summary_csv = outdir / "summary.csv"
    _write_csv(summary_csv, _SUMMARY_HEADER, _report_rows(report))
    _write_plot_note(summary_csv, "estimate", "target", "estimate", "target",
                     f"summary for mc {cfg.mode}")
    _echo_report(report)
    return {"passed": report.passed}


def _run_asymptotics(cfg: RunConfig, outdir: Path) -> dict:
    mc = _mc_config(cfg)
    probe_times = [t for t in cfg.times if t > 0.0]
    report = asymptotics_experiment(mc, probe_times, x0=cfg.points[0])
    schedules = report.extras["schedules"]
    flags = report.extras["pass_flags"]
    header = ("path",) + tuple(f"err_t{k}" for k in range(len(probe_times))) + ("decreasing",)
    rows = [(i, *sched, flag) for i, (sched, flag) in enumerate(zip(schedules, flags))]
    per_csv = outdir / "per_path.csv"
    _write_csv(per_csv, header, rows)
    _write_plot_note(per_csv, "path", "err_t0", "path index", "scaled profile error",
                     "clock-scaled error schedules per path")
    summary_csv = outdir / "summary.csv"
    _write_csv(summary_csv, _SUMMARY_HEADER, _report_rows(report))
    _write_plot_note(summary_csv, "estimate", "target", "passing fraction", "target",
                     "asymptotics experiment summary")
    _echo_report(report)
    return {"passed": report.passed}


def _run_support(cfg: RunConfig, outdir: Path) -> dict:
    mc = _mc_config(cfg)
    report = support_experiment(
        mc, plateau_tol=cfg.plateau_tol, mass_check_time=cfg.mass_check_time
    )
    per_csv = outdir / "per_path.csv"
    _write_csv(
        per_csv, ("path", "support_radius", "support_bound"),
        [(i, r, bnd) for i, (r, bnd) in enumerate(zip(report.support_radii, report.support_bounds))],
    )
    _write_plot_note(per_csv, "path", "support_radius", "path index", "support radius",
                     "per-path support radii against the dominating bound")
    summary_csv = outdir / "summary.csv"
    _write_csv(
        summary_csv,
        (
            "plateau_median", "plateau_ok", "eta_hat", "bound_ok",
            "mass_estimate", "mass_target", "mass_ok",
            "center_initial", "center_median", "decay_ok",
        ),
        [(
            report.plateau_median, report.plateau_ok, report.eta_hat, report.bound_ok,
            report.mass_report.estimate, report.mass_report.target, report.mass_report.passed,
            report.center_initial, report.center_median, report.decay_ok,
        )],
    )
    _write_plot_note(summary_csv, "plateau_median", "eta_hat", "plateau", "support bound",
                     "bounded-support experiment summary")
    decay_csv = outdir / "decay_table.csv"
    _write_csv(decay_csv, ("t", "median_center_value"),
               zip(report.decay_times, report.decay_medians))
    _write_plot_note(decay_csv, "t", "median_center_value", "time", "median u(t, 0)",
                     "pointwise decay at the origin")
    print(f"provenance: {report.provenance}")
    return {
        "plateau": report.plateau_ok,
        "support_bound": report.bound_ok,
        "mean_mass": report.mass_report.passed,
        "decay": report.decay_ok,
    }


def _echo_report(report) -> None:
    print(
        f"estimate={report.estimate:.6g} stderr={report.stderr:.3g} "
        f"target={report.target:.6g} passed={report.passed}"
    )
    print(f"rule: {report.rule}")
    print(f"provenance: {report.provenance}")


_RUNNERS = {
    "exact": _run_exact,
    "path": _run_path,
    "evolve": _run_evolve,
    "transform": _run_transform,
    "mc": _run_mc,
    "asymptotics": _run_asymptotics,
    "support": _run_support,
}


def dispatch(cfg: RunConfig) -> int:
    """Run one subcommand; returns the exit status."""
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    checks = _RUNNERS[cfg.command](cfg, outdir)
    elapsed = time.perf_counter() - started
    with open(outdir / "config.echo.ini", "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_config(cfg))
    with open(outdir / "manifest.txt", "w", encoding="utf-8", newline="") as fh:
        fh.write(f"spmelab {__version__}\n")
        fh.write(f"command: {cfg.command}\n")
        fh.write("config: config.echo.ini\n")
        fh.write(f"master seed: {cfg.seed}\n")
        fh.write(f"threads: {cfg.threads}\n")
        fh.write(f"wall time: {elapsed:.3f} s\n")
        if checks:
            for name, ok in checks.items():
                fh.write(f"check {name}: {'pass' if ok else 'FAIL'}\n")
        else:
            fh.write("checks: none embedded\n")
    all_ok = all(checks.values()) if checks else True
    return 0 if all_ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spmelab",
        description="Numerical studies of the porous medium equation with multiplicative noise.",
    )
    parser.add_argument("--config", required=True, help="path to the run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("--threads", type=int, default=None, help="override the thread count")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        cfg = apply_overrides(cfg, seed=args.seed, out=args.out, threads=args.threads)
        return dispatch(cfg)
    except ConfigError as exc:
        where = f" (line {exc.line})" if exc.line else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return 2
    except SpmeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
