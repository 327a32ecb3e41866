"""Command line entry point: ``stablema <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .conditions import check_schedule
from .config import load_config
from .errors import ConfigError, DegenerateError, ResourceError
from .estimate import estimate_f, estimate_g, estimate_g_2d, smoothed_periodogram_on
from .io import read_path_csv, write_path_csv, write_table
from .kernels import kernel_eval, l2_norm
from .montecarlo import ReplicationError, export_report, run_monte_carlo
from .rng import RngStream
from .simulate import SampledField, simulate_ma_1d, simulate_ma_2d
from .spectral import make_filter, self_normalized_periodogram

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_IO = 0, 2, 3, 4


def _global_options(parser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="INI configuration file")
    parser.add_argument("--seed", type=int, default=default, help="base seed (overrides config)")
    parser.add_argument("--workers", type=int, default=argparse.SUPPRESS if suppress else 1)
    parser.add_argument("--out", default=argparse.SUPPRESS if suppress else ".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stablema", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate one path or field")
    s.add_argument("--stream-id", type=int, default=0)
    s.add_argument("--plot", action="store_true")

    s = sub.add_parser("periodogram", parents=[common], help="raw and smoothed periodogram of a path")
    s.add_argument("input", help="path CSV written by 'simulate'")

    s = sub.add_parser("estimate", parents=[common], help="estimate the kernel from a path or field")
    s.add_argument("input")
    s.add_argument("--plot", action="store_true")

    s = sub.add_parser("montecarlo", parents=[common], help="replicated simulate/estimate study")
    s.add_argument("--name", default="report", help="stem of the report files")
    s.add_argument("--plot", action="store_true", help="also render <name>.png")

    sub.add_parser("check", parents=[common], help="audit a tuning schedule")
    return p


def _seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg.get("experiment", "base_seed", 0))


def cmd_simulate(args, cfg) -> int:
    spec = cfg.kernel()
    stream = RngStream(_seed(args, cfg), args.stream_id)
    sim = simulate_ma_2d if spec.dimension == 2 else simulate_ma_1d
    obj = sim(spec, cfg.integrator(), cfg.n, cfg.delta, cfg.truncation_radius, stream)
    name = "field.csv" if spec.dimension == 2 else "path.csv"
    out = write_path_csv(obj, Path(args.out) / name)
    print(out)
    if args.plot:
        from .plotting import plot_estimate, plot_field

        png = out.with_suffix(".png")
        if isinstance(obj, SampledField):
            plot_field(obj.values, png)
        else:
            plot_estimate(obj.times, obj.values, png, label="X")
    return EXIT_OK


def cmd_periodogram(args, cfg) -> int:
    path = read_path_csv(args.input)
    if isinstance(path, SampledField):
        raise ConfigError("periodogram subcommand handles one-dimensional paths")
    est = cfg.estimator()
    lam = np.linspace(0.0, est.a_n, est.lambda_points // 2 + 1)
    filt = make_filter(cfg.filter_kind, cfg.half_width)
    raw = self_normalized_periodogram(path, lam)
    smooth = smoothed_periodogram_on(path, lam, filt)
    meta = [f"n={path.n} delta={path.delta!r} a_n={est.a_n} filter={filt_label(cfg)}"]
    print(write_table(Path(args.out) / "periodogram.csv", {"lambda": lam, "I_raw": raw, "I_smoothed": smooth}, meta))
    return EXIT_OK


def filt_label(cfg) -> str:
    return f"{cfg.filter_kind}:{cfg.half_width}"


def cmd_estimate(args, cfg) -> int:
    path = read_path_csv(args.input)
    est_cfg = cfg.estimator()
    filt = make_filter(cfg.filter_kind, cfg.half_width)
    meta = [" ".join(f"{k}={str(v).replace(' ', '')}" for k, v in est_cfg.describe().items())]
    meta.append(f"filter={filt_label(cfg)} input={Path(args.input).name}")
    out = Path(args.out) / "estimate.csv"
    if isinstance(path, SampledField):
        res = estimate_g_2d(path, filt, est_cfg)
        t1, t2 = np.meshgrid(res.t_grid, res.t_grid2, indexing="ij")
        print(write_table(out, {"t1": t1, "t2": t2, "g_tilde": res.values}, meta))
        return EXIT_OK
    g = estimate_g(path, filt, est_cfg)
    cols = {"t": g.t_grid, "g_tilde": g.values}
    if cfg.target == "f":
        f = estimate_f(path, filt, est_cfg)
        cols["f_tilde"] = f.values
        meta.append(f"norm2={f.norm2!r}")
    print(write_table(out, cols, meta))
    if args.plot:
        from .plotting import plot_estimate

        spec = cfg.kernel()
        truth = kernel_eval(spec, g.t_grid) / l2_norm(spec)
        plot_estimate(g.t_grid, g.values, out.with_suffix(".png"), truth=truth, label="g_tilde")
    return EXIT_OK


def cmd_montecarlo(args, cfg) -> int:
    exp = cfg.experiment()
    if args.seed is not None:
        exp.base_seed = args.seed
    report = run_monte_carlo(exp, workers=args.workers)
    out = export_report(report, Path(args.out) / f"{args.name}.csv", exp)
    print(out)
    print(f"median L2 error {report.median_error:.4g}; envelope coverage {report.coverage():.3f}")
    if args.plot:
        from .plotting import plot_report

        plot_report(report, out.with_suffix(".png"), title=f"{exp.kernel}, {exp.integrator.label()}")
    return EXIT_OK


def cmd_check(args, cfg) -> int:
    report = check_schedule(cfg.schedule(), cfg.kernel(), cfg.alpha, cfg.a_decay)
    print(report.table())
    n_range = cfg.schedule().n_range
    out = Path(args.out) / "conditions.csv"
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["condition", "verdict", "n", "ratio"])
            for v in report.verdicts:
                for n, r in zip(n_range, v.ratios):
                    w.writerow([v.id, v.verdict, n, format(r, ".17g")])
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "periodogram": cmd_periodogram,
    "estimate": cmd_estimate,
    "montecarlo": cmd_montecarlo,
    "check": cmd_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ReplicationError, DegenerateError, ConfigError, ValueError, KeyError, ResourceError, OSError) as exc:
        code = exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


def exit_code(exc: BaseException) -> int:
    """Map an exception (unwrapping replication failures) to an exit code."""
    root = exc.__cause__ if isinstance(exc, ReplicationError) and exc.__cause__ else exc
    if isinstance(root, DegenerateError):
        return EXIT_DEGENERATE
    if isinstance(root, OSError):
        return EXIT_IO
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
