"""Experiment configuration files (YAML, or JSON as a subset).

Example::

    task: stqm
    N: 5
    M: 1
    tau: [0, 1, 2]
    realizations: 10
    de: {patience: 50}

Integer task parameters (``N``, ``M``, ``tau``, ``advance``, ``spatial``,
``temporal``, ``C``) accept a list, which turns them into a sweep; the
experiment runs the Cartesian product of all swept values. ``dt`` is either
``scan`` (the task's default grid, or its fixed value for ``qce``), a
positive number, or a list of positive numbers to scan over.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import yaml

from .de import DEConfig
from .engine import PhasePlan
from .errors import ConfigError, QRCError
from .network import G_MAX, OMEGA0, RHO_LIMIT
from .tasks.common import RHO_POLICIES
from .tasks.entropy import ENTROPY_PLAN, INPUT_G_MAX, TOPOLOGIES

TASKS = ("stqm", "qce", "entangler", "preparation", "entropy")
SWEEP_FIELDS = ("N", "M", "tau", "advance", "spatial", "temporal", "C")

# Defaults per task; ``None`` marks a field the file must provide.
TASK_FIELDS: dict[str, dict[str, Any]] = {
    "stqm": {"N": None, "M": None, "tau": None},
    "qce": {"N": 3, "M": 1, "C": 2, "spatial": 1, "temporal": 1},
    "entangler": {"N": None, "tau": None},
    "preparation": {"N": None, "advance": None},
    "entropy": {"N": 20, "M": 10, "tau": [0, 1, 2, 3, 4, 5]},
}

ENTROPY_KEYS = ("ridge", "topology", "input_g_max")
COMMON_KEYS = (
    "task",
    "dt",
    "omega0",
    "g_max",
    "rho_limit",
    "rho_policy",
    "phases",
    "realizations",
    "seed",
    "out",
    "de",
    "dataset",
) + ENTROPY_KEYS + SWEEP_FIELDS

DtPolicy = Union[str, tuple[float, ...]]


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    sweep: dict[str, tuple[int, ...]]
    dt: DtPolicy = "scan"
    omega0: float = OMEGA0
    g_max: float = G_MAX
    rho_limit: float = RHO_LIMIT
    rho_policy: str = "strict"
    phases: tuple[int, int, int] = (40, 80, 40)
    realizations: int = 10
    seed: int = 0
    out: str = "results"
    de: dict = field(default_factory=dict)
    dataset: str | None = None
    ridge: float = 1e-8
    topology: str = "connected"
    input_g_max: float = INPUT_G_MAX

    @property
    def plan(self) -> PhasePlan:
        return PhasePlan(*self.phases)

    @property
    def de_config(self) -> DEConfig:
        return DEConfig(**self.de)

    def points(self) -> list[dict[str, int]]:
        """Parameter points of the sweep. ``entropy`` keeps all delays in one point."""
        names = [k for k in self.sweep if not (self.task == "entropy" and k == "tau")]
        return [dict(zip(names, values)) for values in itertools.product(*(self.sweep[k] for k in names))]

    def swept(self) -> list[str]:
        return [k for k, v in self.sweep.items() if len(v) > 1]

    def canonical(self) -> dict:
        """Every setting that changes results. ``out`` and ``realizations`` do not."""
        data = dataclasses.asdict(self)
        data.pop("out")
        data.pop("realizations")
        data["sweep"] = {k: list(v) for k, v in sorted(self.sweep.items())}
        data["phases"] = list(self.phases)
        data["dt"] = self.dt if isinstance(self.dt, str) else list(self.dt)
        if self.task != "entropy":
            for key in ENTROPY_KEYS:
                data.pop(key)
        return data

    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        data = self.canonical()
        data["realizations"] = self.realizations
        data["out"] = self.out
        return data

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _ints(name: str, value, minimum: int) -> tuple[int, ...]:
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ConfigError(f"field '{name}': empty list")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            raise ConfigError(f"field '{name}': expected integers >= {minimum}, got {v!r}")
    return tuple(values)


def _number(name: str, value, positive: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{name}': expected a number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"field '{name}': must be positive, got {value!r}")
    return float(value)


def _count(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, list):
        raise ConfigError(f"field '{name}': expected a single integer, got {value!r}")
    return _ints(name, value, minimum)[0]


def _dt(value) -> DtPolicy:
    if value == "scan":
        return "scan"
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ConfigError("field 'dt': empty list")
    return tuple(_number("dt", v) for v in values)


def _phases(value) -> tuple[int, int, int]:
    names = ("preparation", "training", "test")
    if isinstance(value, dict):
        unknown = sorted(set(value) - set(names))
        if unknown:
            raise ConfigError(f"field 'phases': unknown keys {unknown}")
        missing = [k for k in names if k not in value]
        if missing:
            raise ConfigError(f"field 'phases': missing {missing}")
        value = [value[k] for k in names]
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError("field 'phases': expected {preparation, training, test} or a list of three")
    prep, train, test = (_ints("phases", v, 0)[0] for v in value)
    if train < 1 or test < 1:
        raise ConfigError("field 'phases': training and test need at least one step")
    return prep, train, test


def _de(value) -> dict:
    if not isinstance(value, dict):
        raise ConfigError("field 'de': expected a mapping")
    known = {f.name for f in dataclasses.fields(DEConfig)}
    unknown = sorted(set(value) - known)
    if unknown:
        raise ConfigError(f"field 'de': unknown keys {unknown}")
    try:
        DEConfig(**value)
    except (QRCError, TypeError) as exc:
        raise ConfigError(f"field 'de': {exc}") from None
    return dict(sorted(value.items()))


def from_mapping(data: dict) -> ExperimentConfig:
    """Validate a parsed file and fill in defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of keys to values")
    unknown = sorted(set(data) - set(COMMON_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    task = data.get("task")
    if task not in TASKS:
        raise ConfigError(f"field 'task': expected one of {TASKS}, got {task!r}")
    defaults = TASK_FIELDS[task]
    extra = sorted(k for k in SWEEP_FIELDS if k in data and k not in defaults)
    if extra:
        raise ConfigError(f"keys not used by task {task}: {', '.join(extra)}")
    if task != "entropy":
        extra = sorted(k for k in ENTROPY_KEYS if k in data)
        if extra:
            raise ConfigError(f"keys only used by task entropy: {', '.join(extra)}")

    sweep = {}
    for name, default in defaults.items():
        if name not in data and default is None:
            raise ConfigError(f"field '{name}': required for task {task}")
        minimum = 0 if name in ("tau", "advance") else 1
        sweep[name] = _ints(name, data.get(name, default), minimum)

    kwargs: dict[str, Any] = {"task": task, "sweep": sweep}
    if "dt" in data:
        kwargs["dt"] = _dt(data["dt"])
        if task == "qce" and kwargs["dt"] != "scan" and len(kwargs["dt"]) > 1:
            raise ConfigError("field 'dt': qce runs at a single fixed dt")
    for name in ("omega0", "g_max", "rho_limit", "input_g_max", "ridge"):
        if name in data:
            kwargs[name] = _number(name, data[name])
    if "rho_policy" in data:
        if data["rho_policy"] not in RHO_POLICIES:
            raise ConfigError(f"field 'rho_policy': expected one of {RHO_POLICIES}, got {data['rho_policy']!r}")
        kwargs["rho_policy"] = data["rho_policy"]
    if "topology" in data:
        if data["topology"] not in TOPOLOGIES:
            raise ConfigError(f"field 'topology': expected one of {TOPOLOGIES}, got {data['topology']!r}")
        kwargs["topology"] = data["topology"]
    if "phases" in data:
        kwargs["phases"] = _phases(data["phases"])
    elif task == "entropy":
        kwargs["phases"] = (ENTROPY_PLAN.preparation, ENTROPY_PLAN.training, ENTROPY_PLAN.test)
    if "realizations" in data:
        kwargs["realizations"] = _count("realizations", data["realizations"])
    if "seed" in data:
        kwargs["seed"] = _count("seed", data["seed"], 0)
    for name in ("out", "dataset"):
        if name in data:
            if not isinstance(data[name], str) or not data[name]:
                raise ConfigError(f"field '{name}': expected a non-empty string")
            kwargs[name] = data[name]
    if "de" in data:
        kwargs["de"] = _de(data["de"])
    return ExperimentConfig(**kwargs)


def parse_text(text: str, source: str = "<config>", fmt: str | None = None) -> dict:
    """Parse YAML or JSON; syntax errors report the offending line."""
    if fmt == "json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}:{exc.lineno}: {exc.msg}") from None
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark is not None else "?"
        raise ConfigError(f"{source}:{line}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    fmt = "json" if path.suffix.lower() == ".json" else None
    return from_mapping(parse_text(path.read_text(), str(path), fmt))
