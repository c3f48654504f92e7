"""Seeded, resumable experiment runs and plot-ready summaries.

An output directory holds:

``results.csv``
    One row per task result; the columns are listed in ``CSV_FIELDS``. Rows
    are only ever appended, so a run that stops early can be resumed.
    Floats are written with ``repr``, which makes reruns byte-identical.
``results.jsonl``
    The same results with trained couplings and per-phase metrics.
``record.json``
    Config, config hash, library version, wall-clock time and all results.
``plots/``
    ``box_<dim>.csv`` with columns (dim, min, q1, median, q3, max) per
    swept dimension, and ``grid_N_M.csv`` with the median per (N, M) when
    both are swept.
"""

from __future__ import annotations

import csv
import functools
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .config import SWEEP_FIELDS, ExperimentConfig, from_mapping
from .datasets import ingest_santa_fe
from .errors import ConfigError, InvalidParameter, RealizationError
from .network import random_reservoir
from .tasks import (
    TaskResult,
    run_entangler,
    run_entropy_detection,
    run_qce,
    run_state_preparation,
    train_stqm,
)

log = logging.getLogger(__name__)

CSV_FIELDS = [
    "config_hash",
    "task",
    "realization",
    "seed",
    *SWEEP_FIELDS,
    "dt",
    "figure_of_merit",
    "training_metric",
    "cost",
    "generations",
    "rho_a",
]
RESULTS_CSV = "results.csv"
RESULTS_JSONL = "results.jsonl"
RECORD_JSON = "record.json"
PLOT_DIR = "plots"


def realization_seed(master: int, index: int) -> int:
    """Seed of realization ``index``; depends only on the pair, not on run order."""
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint64)[0])


@functools.lru_cache(maxsize=4)
def _series(path: Optional[str]) -> np.ndarray:
    return ingest_santa_fe(path)


def dispatch(config: ExperimentConfig, point: dict, rng: np.random.Generator) -> list[TaskResult]:
    """Run the configured task once at one sweep point."""
    scan = None if config.dt == "scan" else config.dt
    common = dict(
        config=config.de_config,
        plan=config.plan,
        rho_policy=config.rho_policy,
        rho_limit=config.rho_limit,
        omega0=config.omega0,
    )
    task = config.task
    if task == "entropy":
        return run_entropy_detection(
            rng,
            n=point["N"],
            m=point["M"],
            taus=config.sweep["tau"],
            scan=scan,
            plan=config.plan,
            ridge=config.ridge,
            rho_limit=config.rho_limit,
            topology=config.topology,
            g_max=config.g_max,
            input_g_max=config.input_g_max,
            omega0=config.omega0,
        )
    reservoir = random_reservoir(point["N"], rng, config.g_max, config.omega0)
    if task == "stqm":
        return [train_stqm(reservoir, point["M"], point["tau"], rng, scan=scan, **common)]
    if task == "qce":
        dt = None if scan is None else scan[0]
        return [
            run_qce(
                rng,
                m=point["M"],
                c=point["C"],
                spatial=point["spatial"],
                temporal=point["temporal"],
                dt=dt,
                reservoir=reservoir,
                **common,
            )
        ]
    if task == "entangler":
        return [run_entangler(rng, tau=point["tau"], scan=scan, reservoir=reservoir, **common)]
    if task == "preparation":
        series = _series(config.dataset)
        return [
            run_state_preparation(rng, series, advance=point["advance"], scan=scan, reservoir=reservoir, **common)
        ]
    raise ConfigError(f"unknown task {task!r}")


def run_unit(config: ExperimentConfig, point: dict, index: int) -> list[TaskResult]:
    seed = realization_seed(config.seed, index)
    try:
        results = dispatch(config, point, np.random.default_rng(seed))
    except Exception as exc:
        raise RealizationError(index, point, exc) from exc
    for result in results:
        result.seed = seed
    return results


def _unit_star(args):
    return run_unit(*args)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_row(config_hash: str, index: int, result: TaskResult) -> dict:
    row = {name: "" for name in CSV_FIELDS}
    row.update(
        config_hash=config_hash,
        task=result.task,
        realization=index,
        seed=result.seed,
        dt=result.dt,
        figure_of_merit=result.figure_of_merit,
        training_metric=result.phase_metrics.get("training", result.phase_metrics.get("training_nmse_det")),
        cost=result.cost,
        generations=result.generations,
        rho_a=result.rho_a,
    )
    for name in SWEEP_FIELDS:
        if name in result.params:
            row[name] = result.params[name]
    return {k: _fmt(v) for k, v in row.items()}


def _point_key(point: dict) -> tuple:
    return tuple(sorted((k, str(v)) for k, v in point.items()))


def _completed(path: Path, config_hash: str, names: Sequence[str]) -> set[tuple]:
    """(point, realization) pairs already in an existing results file."""
    if not path.exists():
        return set()
    done = set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise ConfigError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            if row["config_hash"] != config_hash:
                raise ConfigError(f"{path} holds results of config {row['config_hash']}, not {config_hash}")
            point = {k: row[k] for k in names}
            done.add((_point_key(point), int(row["realization"])))
    return done


@dataclass
class RunRecord:
    config: dict
    config_hash: str
    results: list[dict] = field(default_factory=list)
    wall_clock: float = 0.0
    version: str = __version__
    out_dir: Optional[Path] = None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "version": self.version,
            "wall_clock_seconds": self.wall_clock,
            "results": self.results,
        }

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, directory) -> "RunRecord":
        directory = Path(directory)
        path = directory / RECORD_JSON
        if not path.is_file():
            raise ConfigError(f"{directory}: no {RECORD_JSON}")
        data = json.loads(path.read_text())
        return cls(
            config=data["config"],
            config_hash=data["config_hash"],
            results=data["results"],
            wall_clock=data.get("wall_clock_seconds", 0.0),
            version=data.get("version", ""),
            out_dir=directory,
        )


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def run_experiment(
    config: ExperimentConfig, threads: int = 1, emit_plots: bool = True
) -> RunRecord:
    """Run every (realization, sweep point) not already present in ``config.out``."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    config_hash = config.config_hash()
    csv_path, jsonl_path = out / RESULTS_CSV, out / RESULTS_JSONL
    points = config.points()
    done = _completed(csv_path, config_hash, list(points[0]))
    if done:
        log.info("resuming: %d units already in %s", len(done), csv_path)
    units = [
        (config, point, index)
        for index in range(config.realizations)
        for point in points
        if (_point_key({k: str(v) for k, v in point.items()}), index) not in done
    ]
    record = RunRecord(config.to_dict(), config_hash, out_dir=out)
    start = time.perf_counter()
    new_file = not csv_path.exists()
    try:
        with open(csv_path, "a", newline="") as fh, open(jsonl_path, "a") as jfh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\r\n")
            if new_file:
                writer.writeheader()
            for (_, point, index), results in zip(units, _map_units(units, threads)):
                for result in results:
                    writer.writerow(csv_row(config_hash, index, result))
                    entry = result.to_dict()
                    entry["realization"] = index
                    jfh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()
                jfh.flush()
                log.info("realization %d at %s: %s", index, point, [r.figure_of_merit for r in results])
    finally:
        record.wall_clock = time.perf_counter() - start
        record.results = _read_jsonl(jsonl_path)
        record.write(out / RECORD_JSON)
    if emit_plots and record.results:
        emit_plot_data(record, out_dir=out / PLOT_DIR)
    return record


def _map_units(units: list, threads: int) -> Iterable[list[TaskResult]]:
    if threads <= 1 or len(units) <= 1:
        return map(_unit_star, units)
    pool = ProcessPoolExecutor(max_workers=threads)
    return _closing_map(pool, units)


def _closing_map(pool: ProcessPoolExecutor, units: list):
    with pool:
        yield from pool.map(_unit_star, units)


def box_stats(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    """(min, Q1, median, Q3, max) with linear interpolation between order statistics."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise InvalidParameter("no values to summarise")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return float(v.min()), float(q1), float(med), float(q3), float(v.max())


def _swept(record: RunRecord) -> list[str]:
    sweep = record.config.get("sweep", {})
    return [k for k in SWEEP_FIELDS if len(sweep.get(k, [])) > 1]


def _value(result: dict, name: str):
    return result["params"].get(name)


def _suffix(names: Sequence[str], values: Sequence) -> str:
    return "".join(f"__{k}={v}" for k, v in zip(names, values))


def emit_plot_data(
    record: RunRecord, axes: Optional[Sequence[str]] = None, out_dir=None
) -> list[Path]:
    """Write box-plot statistics per swept dimension and N x M median grids.

    ``axes`` lists dimensions to summarise; ``"N,M"`` requests the grid.
    By default every swept dimension is summarised, plus the grid when both
    N and M are swept.
    """
    if not record.results:
        raise InvalidParameter("record has no results")
    swept = _swept(record)
    if axes is None:
        axes = list(swept)
        if "N" in swept and "M" in swept:
            axes.append("N,M")
    out_dir = Path(out_dir if out_dir is not None else (record.out_dir or ".") / PLOT_DIR)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for axis in axes:
        dims = axis.split(",")
        missing = [d for d in dims if d not in swept]
        if missing:
            raise InvalidParameter(f"missing sweep dimension {', '.join(missing)} (swept: {swept or 'none'})")
        others = [d for d in swept if d not in dims]
        groups: dict[tuple, list[dict]] = {}
        for result in record.results:
            groups.setdefault(tuple(_value(result, d) for d in others), []).append(result)
        for key in sorted(groups, key=lambda k: tuple(map(str, k))):
            rows = groups[key]
            if len(dims) == 1:
                path = out_dir / f"box_{dims[0]}{_suffix(others, key)}.csv"
                _write_box(path, dims[0], rows)
            elif len(dims) == 2:
                path = out_dir / f"grid_{dims[0]}_{dims[1]}{_suffix(others, key)}.csv"
                _write_grid(path, dims, rows)
            else:
                raise InvalidParameter(f"cannot summarise over {axis!r}")
            written.append(path)
    return written


def _write_box(path: Path, dim: str, rows: list[dict]) -> None:
    by_x: dict = {}
    for r in rows:
        by_x.setdefault(_value(r, dim), []).append(r["figure_of_merit"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow([dim, "min", "q1", "median", "q3", "max"])
        for x in sorted(by_x):
            writer.writerow([x, *(repr(s) for s in box_stats(by_x[x]))])


def _write_grid(path: Path, dims: Sequence[str], rows: list[dict]) -> None:
    cells: dict = {}
    for r in rows:
        cells.setdefault((_value(r, dims[0]), _value(r, dims[1])), []).append(r["figure_of_merit"])
    xs = sorted({k[0] for k in cells})
    ys = sorted({k[1] for k in cells})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow([f"{dims[0]}\\{dims[1]}", *ys])
        for x in xs:
            writer.writerow(
                [x, *(repr(float(np.median(cells[x, y]))) if (x, y) in cells else "" for y in ys)]
            )


def summarize(directory, axes: Optional[Sequence[str]] = None) -> tuple[RunRecord, list[Path]]:
    """Reload a record directory and regenerate its plot files."""
    record = RunRecord.load(directory)
    return record, emit_plot_data(record, axes)


def median_table(record: RunRecord) -> list[tuple[dict, int, float]]:
    """(point, count, median figure of merit) per sweep point, in sweep order."""
    swept = _swept(record)
    groups: dict[tuple, list[float]] = {}
    for r in record.results:
        groups.setdefault(tuple(_value(r, d) for d in swept), []).append(r["figure_of_merit"])
    return [
        (dict(zip(swept, key)), len(v), float(np.median(v)))
        for key, v in sorted(groups.items(), key=lambda kv: tuple(map(str, kv[0])))
    ]


def config_from_record(record: RunRecord) -> ExperimentConfig:
    data = dict(record.config)
    sweep = data.pop("sweep")
    data.update({k: list(v) for k, v in sweep.items()})
    phases = data.pop("phases")
    data["phases"] = list(phases)
    if data.get("dataset") is None:
        data.pop("dataset", None)
    return from_mapping(data)


__all__ = [
    "CSV_FIELDS",
    "RunRecord",
    "box_stats",
    "dispatch",
    "emit_plot_data",
    "median_table",
    "realization_seed",
    "run_experiment",
    "run_unit",
    "summarize",
    "config_from_record",
]
