"""Parameter grids over :class:`ExperimentSpec`, run serially or in worker processes."""

from __future__ import annotations

import dataclasses
import itertools
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .evaluation import mse_curve
from .experiment import ExperimentSpec, RunReport, run_experiment

_SECTIONS = {"task": "task", "reservoir": "reservoir", "fidelity": "reservoir", "seeds": "seeds"}
_RUN_SEEDS = {"mask_seed": "mask", "noise_seed": "noise", "task_seed": "task"}
SEED_AXES = frozenset({"run.mask_seed", "run.noise_seed", "run.task_seed", "seeds.mask", "seeds.noise", "seeds.task"})

SUMMARY_COLUMNS = (
    "run_id",
    "repetition",
    "status",
    "train_mse",
    "regularization",
    "horizon",
    "horizon_mean",
    "autonomous_mse",
    "phase_mse",
    "success",
    "diverged",
    "error",
)


def apply_override(spec: ExperimentSpec, key: str, value) -> ExperimentSpec:
    """Return ``spec`` with ``section.name`` set to ``value``.

    ``run.mask_seed``/``noise_seed``/``task_seed`` address the seeds; other
    ``run.*`` keys address top-level fields.
    """
    section, _, name = key.partition(".")
    if section == "run":
        if name in _RUN_SEEDS:
            return spec.replace(seeds=dataclasses.replace(spec.seeds, **{_RUN_SEEDS[name]: value}))
        if name not in {f.name for f in dataclasses.fields(spec)}:
            raise KeyError(key)
        return spec.replace(**{name: value})
    attr = _SECTIONS.get(section)
    if attr is None:
        raise KeyError(key)
    sub = getattr(spec, attr)
    if name not in {f.name for f in dataclasses.fields(sub)}:
        raise KeyError(key)
    return spec.replace(**{attr: dataclasses.replace(sub, **{name: value})})


@dataclass
class SweepSpec:
    """Cartesian grid over ``axes``; each point runs ``repetitions`` times.

    Repetition ``k`` offsets the noise seed by ``k`` (masks and tasks are
    varied through explicit seed axes).
    """

    base: ExperimentSpec
    axes: dict[str, list] = field(default_factory=dict)
    repetitions: int = 1
    curve_window: int = 100

    def __post_init__(self):
        if not self.axes or any(len(v) == 0 for v in self.axes.values()):
            raise ValueError("sweep grid must be non-empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @property
    def total_runs(self) -> int:
        return int(np.prod([len(v) for v in self.axes.values()])) * self.repetitions

    def points(self) -> list[dict]:
        keys = list(self.axes)
        return [dict(zip(keys, combo)) for combo in itertools.product(*self.axes.values())]

    def spec_for(self, point: dict, repetition: int = 0) -> ExperimentSpec:
        spec = self.base
        for key, value in point.items():
            spec = apply_override(spec, key, value)
        if repetition:
            spec = spec.replace(seeds=dataclasses.replace(spec.seeds, noise=spec.seeds.noise + repetition))
        return spec

    def plan(self) -> list[tuple[int, dict, int, ExperimentSpec]]:
        out = []
        for point in self.points():
            for rep in range(self.repetitions):
                out.append((len(out), point, rep, self.spec_for(point, rep)))
        return out

    def group_keys(self) -> list[str]:
        return [k for k in self.axes if k not in SEED_AXES]


@dataclass
class SweepRow:
    run_id: int
    point: dict
    repetition: int
    report: RunReport
    curve: np.ndarray  # squared error averaged over curve_window, first run

    def as_row(self, threshold: float) -> dict:
        rep = self.report
        first = rep.runs[0] if rep.runs else None
        h = rep.horizons
        row = {"run_id": self.run_id, "repetition": self.repetition, **self.point}
        row.update(
            status=rep.status,
            train_mse=rep.train_mse,
            regularization=rep.regularization,
            horizon=first.horizon if first else None,
            horizon_mean=float(h.mean()) if h.size else None,
            autonomous_mse=first.autonomous_mse if first else None,
            phase_mse=first.phase_mse if first else None,
            success=int(first.success(threshold)) if first else 0,
            diverged=int(first.diverged) if first else None,
            error=rep.error,
        )
        return row


def _execute(args) -> SweepRow:
    run_id, point, rep, spec, window = args
    report = run_experiment(spec)
    curve = np.empty(0)
    if report.output is not None and len(report.output):
        n = len(report.output)
        curve = mse_curve(report.output.values, report.target.values[:n], window)
    # keep worker payloads small
    report.output = report.target = None
    report.mse_curve = None
    return SweepRow(run_id, point, rep, report, curve)


def run_sweep(sweep: SweepSpec, workers: int = 1, progress=None) -> list[SweepRow]:
    """Run every planned experiment; results are in plan order whatever ``workers`` is."""
    jobs = [(i, p, r, s, sweep.curve_window) for i, p, r, s in sweep.plan()]
    rows: list[SweepRow] = []
    if workers <= 1:
        for job in jobs:
            rows.append(_execute(job))
            if progress:
                progress(len(rows), len(jobs))
        return rows
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for row in pool.map(_execute, jobs, chunksize=1):
            rows.append(row)
            if progress:
                progress(len(rows), len(jobs))
    return rows


def success_counts(sweep: SweepSpec, rows: list[SweepRow]) -> list[dict]:
    """Runs and successes per grid point, seed axes and repetitions pooled."""
    keys = sweep.group_keys()
    groups: dict[tuple, list[int]] = defaultdict(lambda: [0, 0, 0])
    threshold = sweep.base.mse_threshold
    for row in rows:
        g = groups[tuple(row.point[k] for k in keys)]
        g[0] += 1
        g[1] += int(row.report.runs[0].success(threshold)) if row.report.runs else 0
        g[2] += int(row.report.status != "ok")
    return [
        {**dict(zip(keys, gk)), "runs": n, "successes": s, "failed": f}
        for gk, (n, s, f) in sorted(groups.items(), key=lambda kv: kv[0])
    ]


def averaged_curves(sweep: SweepSpec, rows: list[SweepRow]) -> tuple[list[dict], np.ndarray]:
    """Mean windowed squared-error curve per grid point (NaN-padded past divergence).

    Returns the group labels and a matrix with one row per group.
    """
    keys = sweep.group_keys()
    length = sweep.base.autonomous_len
    buckets: dict[tuple, list[np.ndarray]] = defaultdict(list)
    for row in rows:
        padded = np.full(length, np.nan)
        padded[: row.curve.size] = row.curve
        buckets[tuple(row.point[k] for k in keys)].append(padded)
    labels, curves = [], []
    for gk in sorted(buckets):
        labels.append(dict(zip(keys, gk)))
        stack = np.vstack(buckets[gk])
        with np.errstate(all="ignore"):
            valid = ~np.isnan(stack)
            counts = valid.sum(axis=0)
            sums = np.where(valid, stack, 0.0).sum(axis=0)
            curves.append(np.where(counts > 0, sums / np.maximum(counts, 1), np.nan))
    return labels, np.vstack(curves) if curves else np.empty((0, length))
