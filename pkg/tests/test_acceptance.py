"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest -v -s tests/test_acceptance.py`` or directly with
``python tests/test_acceptance.py``. Checks that are known to be out of reach
for this model are left failing rather than loosened.
"""

from __future__ import annotations

import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from rcfeedback import tasks
from rcfeedback.cli import main as cli_main
from rcfeedback.config import load_config
from rcfeedback.evaluation import (
    bitize_lorenz,
    estimate_lyapunov,
    power_spectrum,
    randomness_report,
    spectrum_similarity,
)
from rcfeedback.experiment import LYAPUNOV_PRESETS, ExperimentSpec, ReservoirSpec, Seeds, TaskSpec, run_experiment
from rcfeedback.sweep import SweepSpec, run_sweep, success_counts
from rcfeedback.training import ridge_solve

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
TIME_LIMIT_S = 300


def _sweep_counts(sweep: SweepSpec) -> dict:
    rows = run_sweep(sweep)
    key = sweep.group_keys()[0]
    return {c[key]: c["successes"] for c in success_counts(sweep, rows)}


def criterion_1():
    spec = load_config(CONFIGS / "sine_idealized.ini")
    mses = []
    for m in range(10):
        rep = run_experiment(spec.replace(seeds=Seeds(m, 0, 0)))
        mses.append(rep.runs[0].autonomous_mse)
    ok_runs = sum(v is not None and v < 1e-3 for v in mses)
    worst = max(v if v is not None else math.inf for v in mses)
    return ok_runs >= 9, f"{ok_runs}/10 masks with 10k-step MSE < 1e-3 (worst {worst:.2e})"


def criterion_2():
    sweep = load_config(CONFIGS / "bandwidth_sweep.ini")
    # noise seed follows the mask so each mask sees its own noise realisation
    base = sweep.base
    rows = []
    for nu in sweep.axes["task.nu"]:
        n_ok = 0
        for m in sweep.axes["run.mask_seed"]:
            spec = base.replace(task=TaskSpec("sine", nu=nu), seeds=Seeds(m, m, 0))
            n_ok += run_experiment(spec).runs[0].success(base.mse_threshold)
        rows.append((nu, n_ok))
    counts = dict(rows)
    rho = spearmanr([r[0] for r in rows], [r[1] for r in rows]).statistic
    ok = counts[0.08] >= 8 and counts[0.04] <= 3 and rho >= 0.8
    listing = " ".join(f"{nu:g}:{c}" for nu, c in rows)
    return ok, f"successes {listing}; spearman {rho:.2f}"


def criterion_3():
    base = ExperimentSpec(
        task=TaskSpec("pattern", pattern_len=51),
        reservoir=ReservoirSpec(51, 0.9, 0.03),
        regularization=1e-12,
        autonomous_len=10_000,
    )
    n_ok = sum(run_experiment(base.replace(seeds=Seeds(s, s, s))).success_count for s in range(10))
    return n_ok >= 6, f"{n_ok}/10 seeds reproduce an L=51 pattern (majority needed)"


def criterion_4():
    sweep = load_config(CONFIGS / "pattern_sweep.ini")
    # the boundary lengths of each clause; the full 10..16 grid is in the config
    sweep.axes["task.pattern_len"] = [10, 12, 15]
    counts = _sweep_counts(sweep)
    total = len(sweep.axes["run.mask_seed"]) * len(sweep.axes["run.task_seed"])
    ok = all(counts[L] > total / 2 for L in (10, 12)) and counts[15] < total / 2
    return ok, "successes " + " ".join(f"L={L}:{c}/{total}" for L, c in counts.items())


def criterion_5():
    noisy = run_experiment(load_config(CONFIGS / "mackey_glass_noisy.ini"))
    h = noisy.horizons
    mean, std = float(h.mean()), float(h.std())
    ideal_spec = load_config(CONFIGS / "mackey_glass_noisy.ini")
    ideal_spec = ideal_spec.replace(reservoir=ReservoirSpec(600, 0.9, 1.0, tier="idealized"), autonomous_len=1500)
    median = float(np.median(run_experiment(ideal_spec).horizons))
    ok = 30 <= mean <= 150 and 0.3 <= std / mean <= 3 and median > 300
    return ok, f"noisy mean {mean:.1f} std {std:.1f} over {h.size} runs; idealized median {median:.0f}"


def criterion_6():
    rep = run_experiment(load_config(CONFIGS / "mackey_glass_spectrum.ini"))
    n = len(rep.output)
    so, st = power_spectrum(rep.output, 50), power_spectrum(rep.target[:n], 50)
    peak = so.peak_frequency((1e-3, 0.5))
    sim = spectrum_similarity(so, st, (0.0, 0.2))
    ok = abs(peak - 0.0588) <= 0.1 * 0.0588 and sim >= 0.9 and n == 10_000
    return ok, (
        f"output peak {peak:.4f} (target's own peak {st.peak_frequency((1e-3, 0.5)):.4f}, "
        f"required 0.0588+-10%); similarity {sim:.4f} over {n} steps"
    )


def criterion_7():
    mg = estimate_lyapunov(tasks.mackey_glass_series(50_000, seed=0), **LYAPUNOV_PRESETS["mackey_glass"])
    lz = estimate_lyapunov(tasks.lorenz_series(50_000, seed=0).teacher, dt=0.02, **LYAPUNOV_PRESETS["lorenz"])
    ok = abs(mg.per_time_unit - 0.006) <= 0.003 and abs(lz.per_time_unit - 0.906) <= 0.2
    return ok, f"Mackey-Glass {mg.per_time_unit:.4f}/unit, Lorenz {lz.per_time_unit:.3f}/unit"


def criterion_8():
    rep = run_experiment(load_config(CONFIGS / "lorenz_noisy.ini"))
    h = rep.horizons
    best = max(rep.runs, key=lambda r: r.horizon)
    ok = 20 <= h.mean() <= 100 and (best.wing_transitions or 0) >= 1
    return ok, (
        f"mean horizon {h.mean():.1f} (std {h.std():.1f}); "
        f"best run {best.horizon} steps, {best.wing_transitions} wing switches"
    )


RC_RANDOMNESS_SEEDS = (0, 1, 2, 3, 4)


def criterion_9():
    bits = bitize_lorenz(tasks.lorenz_series(95_000, seed=0).teacher)
    r = randomness_report(bits)
    oracle_ok = (
        abs(len(bits) - 2400) <= 360
        and r.entropy_per_byte >= 6.5
        and 110 <= r.mean_byte <= 145
        and 2.6 <= r.monte_carlo_pi <= 3.6
        and r.serial_correlation is not None
        and abs(r.serial_correlation) <= 0.1
    )
    spec = load_config(CONFIGS / "lorenz_noisy.ini").replace(n_runs=1, autonomous_len=95_000)
    entropies = []
    for s in RC_RANDOMNESS_SEEDS:
        rep = run_experiment(spec.replace(seeds=Seeds(s, s, s), metrics=("randomness",)))
        entropies.append(rep.metrics.get("randomness", {}).get("entropy_per_byte", 0.0))
    rc = float(np.median(entropies))
    ok = oracle_ok and rc >= 6.0
    return ok, (
        f"oracle {len(bits)} bits entropy {r.entropy_per_byte:.2f} mean {r.mean_byte:.1f} "
        f"pi {r.monte_carlo_pi:.2f} corr {r.serial_correlation:.3f}; "
        f"RC median entropy {rc:.2f} ({', '.join(f'{e:.2f}' for e in entropies)})"
    )


def criterion_10():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(20):
        cols = int(rng.integers(2, 12))
        rows = int(rng.integers(cols + 5, 60))  # overdetermined, as in readout training
        X, d = rng.normal(size=(rows, cols)), rng.normal(size=rows)
        reg = 10.0 ** rng.uniform(-6, 0)
        oracle = np.linalg.inv(X.T @ X + reg * np.eye(cols)) @ X.T @ d
        w = ridge_solve(X, d, reg)
        worst = max(worst, np.linalg.norm(w - oracle) / np.linalg.norm(oracle))
    mg = tasks.integrate_mackey_glass(tasks.MackeyGlassParams(), 10_000, history=1.0).values
    mg_err = float(np.max(np.abs(mg - 1.0)))
    p = tasks.LorenzParams(discard_prefix=0)
    c = math.sqrt(p.b * (p.r - 1))
    lz_err = 0.0
    for eq in [(0.0, 0.0, 0.0), (c, c, p.r - 1), (-c, -c, p.r - 1)]:
        tr = tasks.integrate_lorenz(p, 10_000, init=eq)
        got = np.column_stack([tr.x.values, tr.y.values, tr.z.values])
        lz_err = max(lz_err, float(np.max(np.abs(got - np.array(eq)))))
    ok = worst <= 1e-9 and mg_err <= 1e-9 and lz_err <= 1e-9
    return ok, f"ridge rel err {worst:.1e}; MG fixed point {mg_err:.1e}; Lorenz equilibria {lz_err:.1e}"


def criterion_11():
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        reports = []
        for name in ("a", "b"):
            if cli_main(["run", str(CONFIGS / "mackey_glass_noisy.ini"), "--out", str(d / name)]) != 0:
                return False, "run exited non-zero"
            rep = json.loads((d / name / "report.json").read_text())
            rep.pop("timestamp")
            reports.append(rep)
        same_series = all((d / "a" / f).read_bytes() == (d / "b" / f).read_bytes() for f in ("output.csv", "mse_curve.csv"))
    ok = reports[0] == reports[1] and same_series
    return ok, f"noisy Mackey-Glass run twice: reports {'identical' if ok else 'differ'}"


CRITERIA = [globals()[f"criterion_{i}"] for i in range(1, 12)]


def _check(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    n = fn.__name__.split("_")[1]
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} [{elapsed:.0f}s]"
    return ok, elapsed, line


@pytest.mark.acceptance
@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 12)])
def test_criterion(fn, capsys):
    ok, elapsed, line = _check(fn)
    with capsys.disabled():
        print("\n" + line)
    assert elapsed <= TIME_LIMIT_S, f"took {elapsed:.0f}s"
    assert ok, line


if __name__ == "__main__":
    results = []
    for fn in CRITERIA:
        ok, _, line = _check(fn)
        print(line, flush=True)
        results.append(ok)
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
