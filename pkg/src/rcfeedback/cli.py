"""Command-line front end: ``rcfeedback {run,sweep,eval,gen-task}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, tasks
from .config import ConfigError, load_config
from .evaluation import (
    EmptyBitSequenceError,
    bitize_lorenz,
    estimate_lyapunov,
    power_spectrum,
    prediction_horizon,
    randomness_report,
    spectrum_similarity,
    write_spectrum_csv,
)
from .experiment import LYAPUNOV_PRESETS, ExperimentSpec, Seeds, run_experiment
from .sweep import SUMMARY_COLUMNS, SweepSpec, averaged_curves, run_sweep, success_counts

log = logging.getLogger("rcfeedback")


def _with_seed(spec: ExperimentSpec, seed: int | None) -> ExperimentSpec:
    return spec if seed is None else spec.replace(seeds=Seeds(seed, seed, seed))


def cmd_run(args) -> int:
    spec = load_config(args.config)
    if isinstance(spec, SweepSpec):
        log.error("%s contains a [sweep] section; use the sweep command", args.config)
        return 2
    spec = _with_seed(spec, args.seed)
    out = io.output_dir(args.out)
    report = run_experiment(spec)
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    if report.output is not None:
        io.write_series_csv(out / "output.csv", report.output, "autonomous output")
        io.write_series_csv(out / "target.csv", report.target, "target")
    if report.mse_curve is not None:
        io.write_series_csv(out / "mse_curve.csv", report.mse_curve, f"squared error window={spec.horizon_window}")
    if "spectrum" in spec.metrics and report.output is not None and len(report.output) >= 100:
        write_spectrum_csv(out / "spectrum_output.csv", power_spectrum(report.output, 50))
        n = len(report.output)
        write_spectrum_csv(out / "spectrum_target.csv", power_spectrum(report.target[:n], 50))
    if report.status != "ok":
        log.error("run failed: %s", report.error)
        return 1
    h = report.horizons
    print(
        f"train_mse={report.train_mse:.3e} horizon={report.prediction_horizon} "
        f"horizon_mean={h.mean():.1f} successes={report.success_count}/{len(h)} -> {out}"
    )
    return 0


def cmd_sweep(args) -> int:
    sweep = load_config(args.config)
    if not isinstance(sweep, SweepSpec):
        log.error("%s has no [sweep] section", args.config)
        return 2
    if args.seed is not None:
        sweep = dataclasses.replace(sweep, base=_with_seed(sweep.base, args.seed))
    out = io.output_dir(args.out)
    log.info("sweep: %d runs", sweep.total_runs)

    def progress(done, total):
        if done % max(1, total // 20) == 0 or done == total:
            log.info("  %d/%d", done, total)

    rows = run_sweep(sweep, workers=args.workers, progress=progress)
    threshold = sweep.base.mse_threshold
    columns = ["run_id", "repetition", *sweep.axes, *SUMMARY_COLUMNS[2:]]
    io.write_table_csv(out / "summary.csv", [r.as_row(threshold) for r in rows], columns)
    counts = success_counts(sweep, rows)
    io.write_table_csv(out / "success_counts.csv", counts)
    labels, curves = averaged_curves(sweep, rows)
    header = ["step"] + [" ".join(f"{k}={v}" for k, v in lab.items()) or "all" for lab in labels]
    data = np.column_stack([np.arange(curves.shape[1]), curves.T]) if curves.size else np.empty((0, 1))
    np.savetxt(out / "mean_curves.csv", data, delimiter=",", header=",".join(header), comments="", fmt="%.6g")
    for c in counts:
        print(", ".join(f"{k}={v}" for k, v in c.items()))
    failed = sum(r.report.status != "ok" for r in rows)
    if failed:
        log.error("%d of %d runs failed (see summary.csv)", failed, len(rows))
        return 1
    return 0


def cmd_eval(args) -> int:
    dt = args.dt
    series = io.read_series_csv(args.series, dt=dt)
    target = io.read_series_csv(args.target, dt=dt) if args.target else None
    result: dict = {"n_samples": len(series)}
    metrics = set(args.metrics)
    try:
        if "horizon" in metrics:
            if target is None:
                raise ValueError("horizon needs --target")
            n = min(len(series), len(target))
            h, curve = prediction_horizon(series[:n], target[:n], args.threshold, args.window)
            result["horizon"] = {"horizon": h, "mse": float(np.mean((series.values[:n] - target.values[:n]) ** 2))}
        if "spectrum" in metrics:
            sp = power_spectrum(series, args.smoothing)
            result["spectrum"] = {"peak": sp.peak_frequency((1e-3, 0.5))}
            if target is not None:
                n = min(len(series), len(target))
                a, b = power_spectrum(series[:n], args.smoothing), power_spectrum(target[:n], args.smoothing)
                result["spectrum"]["similarity_0_0.2"] = spectrum_similarity(a, b, (0.0, 0.2))
        if "lyapunov" in metrics:
            est = estimate_lyapunov(series, dt=dt, **LYAPUNOV_PRESETS[args.preset])
            result["lyapunov"] = {"per_step": est.per_step, "per_time_unit": est.per_time_unit}
        if "randomness" in metrics:
            bits = bitize_lorenz(series, args.bit_threshold)
            result["randomness"] = {"n_bits": len(bits), **randomness_report(bits).as_dict()}
    except (ValueError, EmptyBitSequenceError) as exc:
        log.error("%s", exc)
        return 1
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_gen_task(args) -> int:
    kind, n = args.kind, args.length
    if kind == "sine":
        series = tasks.gen_sine(args.nu, n)
        header = f"sine nu={args.nu}"
    elif kind == "pattern":
        series = tasks.gen_pattern(args.pattern_len, n, np.random.default_rng(args.seed))
        header = f"pattern L={args.pattern_len} seed={args.seed}"
    elif kind == "mackey_glass":
        series = tasks.mackey_glass_series(n, seed=args.seed)
        header = f"mackey-glass beta=0.2 gamma=0.1 tau=17 n=10 step=1.0 seed={args.seed}"
    else:
        series = tasks.lorenz_series(n, seed=args.seed).teacher
        header = f"lorenz x*0.01 sigma=10 r=28 b=8/3 dt=0.02 seed={args.seed}"
    path = Path(args.out) if args.out else io.output_dir() / f"{kind}.csv"
    io.write_series_csv(path, series, header)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rcfeedback", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a config file")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override mask, noise and task seeds")
    r.add_argument("--out", help=f"output directory (default ${io.OUTPUT_DIR_ENV} or ./{io.DEFAULT_OUTPUT_DIR})")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a parameter grid")
    s.add_argument("config")
    s.add_argument("--seed", type=int, help="override the base seeds")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", help="metrics for a series file")
    e.add_argument("series")
    e.add_argument("--target")
    e.add_argument(
        "--metrics", nargs="+", default=["spectrum"], choices=["horizon", "spectrum", "lyapunov", "randomness"]
    )
    e.add_argument("--dt", type=float, default=1.0, help="native time per sample")
    e.add_argument("--threshold", type=float, default=1e-3)
    e.add_argument("--window", type=int, default=1)
    e.add_argument("--smoothing", type=int, default=50)
    e.add_argument("--preset", choices=sorted(LYAPUNOV_PRESETS), default="mackey_glass")
    e.add_argument("--bit-threshold", type=float, default=0.02)
    e.add_argument("--out", help="also write the JSON here")
    e.set_defaults(func=cmd_eval)

    g = sub.add_parser("gen-task", help="write an oracle task series")
    g.add_argument("kind", choices=["sine", "pattern", "mackey_glass", "lorenz"])
    g.add_argument("--length", type=int, default=10_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--nu", type=float, default=0.1)
    g.add_argument("--pattern-len", type=int, default=10)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_task)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        log.error("error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
