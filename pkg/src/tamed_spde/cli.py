"""Command-line entry point: ``spde run <config> [--workers n] [--seed s] [--csv path] [--svg path]``.

Exit status: 0 success, 2 configuration rejected, 3 divergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .config import ConfigError, ConfigFile, parse_config
from .experiments import ErrorTable, single_run_norms, spatial_study, stability_sweep, temporal_study
from .plot import loglog_svg
from .stepper import DivergenceError

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO = 0, 2, 3, 4

COLUMNS = ("axis_kind", "axis_value", "K", "rms_error", "std_error")

log = logging.getLogger("tamed_spde")


def _fmt(x) -> str:
    return format(float(x), ".17g") if not isinstance(x, (int, str)) else str(x)


def data_rows(cfg: ConfigFile, workers: int | None):
    """(rows, metadata lines, table or None) for the configured study."""
    run, study = cfg.run, cfg.study
    meta: list[str] = []
    if study.kind == "single":
        rows = [("time", t, 1, norm, 0.0) for t, norm in single_run_norms(run)]
        meta.append("rms_error column holds the L2 norm of the single trajectory")
        return rows, meta, None
    if study.kind == "stability":
        result = stability_sweep(run, study.axis, study.K, master_seed=cfg.seed, workers=workers)
        rows = []
        for r in result:
            rows.append(("tau", r.tau, study.K, r.max_mean_norm_sq, 0.0))
            meta.append(f"tau={_fmt(r.tau)} bound={_fmt(r.bound)} finite={r.finite} holds={r.holds}")
        meta.append("rms_error column holds max_k of the sample mean of ||u^k||^2")
        return rows, meta, None
    if study.kind == "spatial":
        table = spatial_study(run, study.axis, study.K, study.N_ref, master_seed=cfg.seed, workers=workers)
    else:
        table = temporal_study(run, study.axis, study.K, study.M_ref, master_seed=cfg.seed, workers=workers)
    rows = [(table.axis_kind, int(r.axis_value), r.K, r.rms_error, r.standard_error) for r in table.rows]
    meta.append(f"reference: {table.reference}")
    meta.append(f"fitted_slope: {_fmt(table.fitted_slope)}")
    meta.append(f"fit_residual: {_fmt(table.residual)}")
    meta.append(f"reliable: {table.reliable}")
    meta.extend(f"note: {n}" for n in table.notes)
    return rows, meta, table


def format_csv(cfg: ConfigFile, rows, meta, wall: float) -> str:
    lines = ["# tamed_spde run"]
    lines += [f"# config: {line}" for line in cfg.text.strip().splitlines()]
    lines.append(f"# seed: {cfg.seed}")
    lines.append(f"# wall_time_s: {wall:.3f}")
    lines += [f"# {m}" for m in meta]
    lines.append(",".join(COLUMNS))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def expected_slope(cfg: ConfigFile) -> float | None:
    run = cfg.run
    gamma = run.gamma
    if cfg.study.kind == "spatial":
        return round(gamma, 3)
    if cfg.study.kind == "temporal":
        if run.diffusion.kind == "constant_identity":
            return min(round(gamma, 3) / 2.0, 1.0)
        return 0.5
    return None


def plot_table(cfg: ConfigFile, table: ErrorTable) -> str:
    if table.axis_kind == "spatial_N":
        x = table.axis()
        fit = (-table.fitted_slope, table.intercept)
        guide = expected_slope(cfg)
        guide = None if guide is None else -guide
        xlabel = "N"
    else:
        x = cfg.run.T / table.axis()
        fit = (table.fitted_slope, table.intercept)
        guide = expected_slope(cfg)
        xlabel = "tau"
    return loglog_svg(
        x, table.errors(), title=f"{table.axis_kind} ({table.reference})", xlabel=xlabel,
        ylabel="RMS L2 error", fit=fit, guide_slope=guide,
    )


def run(cfg: ConfigFile, *, workers: int | None = None, csv_path=None, svg_path=None) -> int:
    start = time.perf_counter()
    try:
        rows, meta, table = data_rows(cfg, workers)
    except DivergenceError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    wall = time.perf_counter() - start
    text = format_csv(cfg, rows, meta, wall)
    csv_path = csv_path or cfg.csv
    svg_path = svg_path or cfg.svg
    try:
        if csv_path:
            Path(csv_path).write_text(text)
        else:
            sys.stdout.write(text)
        if svg_path and table is not None and table.reliable:
            Path(svg_path).write_text(plot_table(cfg, table))
        elif svg_path and table is None:
            log.info("SVG plots exist only for spatial and temporal studies")
        elif svg_path:
            log.warning("no reliable convergence table; SVG not written")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="spde", description="Tamed spectral-Galerkin SPDE simulations")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a single simulation or a convergence study")
    p.add_argument("config", help="path to a sectioned key=value config file")
    p.add_argument("--workers", type=int, default=None, help="worker threads (default: available cores)")
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides SPDE_SEED and the config)")
    p.add_argument("--csv", default=None, help="CSV output path (default: config, else stdout)")
    p.add_argument("--svg", default=None, help="SVG plot path for spatial/temporal studies")
    p.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    seed = cfg.seed
    env = os.environ.get("SPDE_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            print(f"error: SPDE_SEED={env!r} is not an integer", file=sys.stderr)
            return EXIT_CONFIG
    if args.seed is not None:
        seed = args.seed
    if seed != cfg.seed:
        cfg.seed = seed
        cfg.run = cfg.run.with_(master_seed=seed)

    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    return run(cfg, workers=workers, csv_path=args.csv, svg_path=args.svg)


if __name__ == "__main__":
    sys.exit(main())
