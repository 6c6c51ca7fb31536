"""INI experiment/sweep documents.

One experiment per file. Sections ``task``, ``reservoir``, ``fidelity`` and
``run`` map onto :class:`ExperimentSpec`; an optional ``sweep`` section turns
the file into a :class:`SweepSpec`. In ``sweep`` every key except
``repetitions`` and ``curve_window`` is an axis named ``section.key`` whose
value is a comma-separated list or an inclusive integer range ``a..b``::

    [task]
    kind = sine
    nu = 0.1

    [reservoir]
    n_nodes = 100

    [sweep]
    task.nu = 0.01, 0.02, 0.03
    run.mask_seed = 0..9
"""

from __future__ import annotations

import configparser
from dataclasses import fields

from .experiment import METRICS, ExperimentSpec, ReservoirSpec, Seeds, TaskSpec
from .sweep import SweepSpec


class ConfigError(ValueError):
    """Bad configuration; ``key`` is ``section.name`` of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _nullable(conv):
    def parse(text: str):
        t = text.strip()
        if t.lower() in ("", "none", "auto", "default"):
            return None
        return conv(t)

    return parse


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _metrics(text: str) -> tuple[str, ...]:
    return tuple(m.strip() for m in text.split(",") if m.strip())


_TASK = {
    "kind": str,
    "nu": float,
    "pattern_len": int,
    "mg_beta": float,
    "mg_gamma": float,
    "mg_tau": float,
    "mg_n": float,
    "mg_step": float,
    "lorenz_dt": float,
    "lorenz_scale": float,
    "lorenz_discard": int,
    "balance_wings": _bool,
    "offset": float,
}
_RESERVOIR = {
    "n_nodes": int,
    "feedback_gain": float,
    "input_gain": float,
    "n_zeroed_leading": _nullable(int),
}
_FIDELITY = {
    "tier": str,
    "noise_std": _nullable(float),
    "highpass_cutoff": _nullable(float),
}
_RUN = {
    "train_len": int,
    "warmup_len": int,
    "autonomous_len": int,
    "mse_threshold": float,
    "horizon_window": int,
    "washout": _nullable(int),
    "regularization": _nullable(float),
    "n_runs": int,
    "checkpoint_interval": _nullable(int),
    "metrics": _metrics,
    "mask_seed": int,
    "noise_seed": int,
    "task_seed": int,
}
SCHEMA = {"task": _TASK, "reservoir": _RESERVOIR, "fidelity": _FIDELITY, "run": _RUN}
_SEED_KEYS = {"mask_seed": "mask", "noise_seed": "noise", "task_seed": "task"}


def _convert(section: str, key: str, text: str):
    table = SCHEMA.get(section)
    if table is None:
        raise ConfigError(section, "unknown section")
    if key not in table:
        raise ConfigError(f"{section}.{key}", "unknown key")
    try:
        value = table[key](text)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}", str(exc)) from None
    if key == "metrics":
        bad = [m for m in value if m not in METRICS]
        if bad:
            raise ConfigError(f"{section}.{key}", f"unknown metric(s) {bad}; choose from {METRICS}")
    return value


def build_spec(values: dict[str, dict]) -> ExperimentSpec:
    """Assemble a spec from ``{section: {key: converted value}}``; range
    checks are re-raised as :class:`ConfigError` naming the key."""
    task = dict(values.get("task", {}))
    res = dict(values.get("reservoir", {}))
    res.update(values.get("fidelity", {}))
    run = dict(values.get("run", {}))
    seeds = {_SEED_KEYS[k]: run.pop(k) for k in list(run) if k in _SEED_KEYS}
    checks = [
        ("task", lambda: TaskSpec(**task)),
        ("reservoir", lambda: ReservoirSpec(**res)),
        ("run", lambda: Seeds(**seeds)),
    ]
    built = {}
    for section, make in checks:
        try:
            built[section] = make()
        except ValueError as exc:
            raise ConfigError(_guess_key(section, str(exc), values), str(exc)) from None
    try:
        return ExperimentSpec(task=built["task"], reservoir=built["reservoir"], seeds=built["run"], **run)
    except ValueError as exc:
        raise ConfigError(_guess_key("run", str(exc), values), str(exc)) from None


def _guess_key(section: str, message: str, values: dict) -> str:
    """Name the key a validation message is about (first key mentioned)."""
    sections = [section] + (["fidelity"] if section == "reservoir" else [])
    for sec in sections:
        for key in SCHEMA[sec]:
            if key in message:
                return f"{sec}.{key}"
    if "gain" in message:
        return "reservoir.feedback_gain"
    if "tier" in message or "Tier" in message:
        return "fidelity.tier"
    return section


def _parse_axis(key: str, text: str) -> list:
    section, _, name = key.partition(".")
    if not name:
        raise ConfigError(f"sweep.{key}", "axis names must look like section.key")
    text = text.strip()
    if ".." in text and "," not in text:
        lo, _, hi = text.partition("..")
        try:
            a, b = int(lo), int(hi)
        except ValueError:
            raise ConfigError(f"sweep.{key}", f"bad integer range {text!r}") from None
        if b < a:
            raise ConfigError(f"sweep.{key}", "empty range")
        return list(range(a, b + 1))
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    if not items:
        raise ConfigError(f"sweep.{key}", "empty axis")
    return [_convert(section, name, t) for t in items]


def parse_config(text: str) -> ExperimentSpec | SweepSpec:
    """Parse an INI document into a fully defaulted spec (or sweep)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("document", str(exc).splitlines()[0]) from None
    values: dict[str, dict] = {}
    for section in cp.sections():
        if section == "sweep":
            continue
        if section not in SCHEMA:
            raise ConfigError(section, "unknown section")
        values[section] = {key: _convert(section, key, raw) for key, raw in cp.items(section)}
    if "task" not in values or "kind" not in values["task"]:
        raise ConfigError("task.kind", "missing required key")
    base = build_spec(values)
    if not cp.has_section("sweep"):
        return base
    axes: dict[str, list] = {}
    repetitions, curve_window = 1, 100
    for key, raw in cp.items("sweep"):
        if key == "repetitions":
            repetitions = _convert_plain("sweep.repetitions", raw, int, minimum=1)
        elif key == "curve_window":
            curve_window = _convert_plain("sweep.curve_window", raw, int, minimum=1)
        else:
            axes[key] = _parse_axis(key, raw)
    if not axes:
        raise ConfigError("sweep", "a sweep needs at least one axis")
    sweep = SweepSpec(base, axes, repetitions, curve_window)
    for point in sweep.points():  # validate every grid point up front
        try:
            sweep.spec_for(point)
        except ValueError as exc:
            where = ", ".join(f"{k}={v}" for k, v in point.items())
            raise ConfigError("sweep", f"grid point {where}: {exc}") from None
    return sweep


def _convert_plain(key: str, raw: str, conv, minimum=None):
    try:
        v = conv(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    if minimum is not None and v < minimum:
        raise ConfigError(key, f"must be >= {minimum}")
    return v


def spec_to_config(spec: ExperimentSpec) -> str:
    """Inverse of :func:`parse_config` for a single experiment."""

    def fmt(v):
        if v is None:
            return "auto"
        if isinstance(v, (list, tuple)):
            return ", ".join(map(str, v))
        return repr(v) if isinstance(v, float) else str(v)

    lines = ["[task]"]
    lines += [f"{f.name} = {fmt(getattr(spec.task, f.name))}" for f in fields(spec.task)]
    lines += ["", "[reservoir]"]
    lines += [f"{k} = {fmt(getattr(spec.reservoir, k))}" for k in _RESERVOIR]
    lines += ["", "[fidelity]"]
    lines += [f"{k} = {fmt(getattr(spec.reservoir, k))}" for k in _FIDELITY]
    lines += ["", "[run]"]
    for k in _RUN:
        v = getattr(spec.seeds, _SEED_KEYS[k]) if k in _SEED_KEYS else getattr(spec, k)
        lines.append(f"{k} = {fmt(v)}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentSpec | SweepSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
