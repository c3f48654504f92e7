"""Differential evolution over non-negative coupling matrices.

Each generation builds, for every member ``x_j``, a shifted point
``x_s = x_w + s (x_u - x_v)`` from three other random members, mixes it
element-wise with ``x_j`` (keeping ``x_j``'s element with probability
``p``), clamps negative entries to zero and replaces ``x_j`` only if the
trial is strictly better. Points that violate the spectral-radius
constraint are given infinite fitness and therefore never accepted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InfeasibleProblem, InvalidParameter

CostFn = Callable[[np.ndarray], float]
FeasibleFn = Callable[[np.ndarray], bool]


@dataclass(frozen=True)
class DEConfig:
    scaling_factor: float = 0.05
    cross_probability: float = 0.4
    population_factor: int = 30
    population_size: Optional[int] = None
    max_generations: int = 300
    f_tolerance: float = 1e-6
    x_tolerance: float = 1e-4
    patience: int = 1
    init_low: float = 0.0
    init_high: float = 0.2
    max_resamples: int = 1000

    def __post_init__(self):
        if self.scaling_factor <= 0:
            raise InvalidParameter("scaling factor must be positive")
        if not 0.0 <= self.cross_probability <= 1.0:
            raise InvalidParameter("cross probability must lie in [0, 1]")
        if self.population_size is not None and self.population_size < 4:
            raise InvalidParameter("population must have at least 4 members")
        if self.patience < 1 or self.max_generations < 0:
            raise InvalidParameter("patience must be >= 1 and max_generations >= 0")

    def size_for(self, n: int, m_eff: int) -> int:
        size = self.population_size or self.population_factor * n * m_eff
        return max(size, 4)


@dataclass
class Candidate:
    coupling: np.ndarray
    fitness: float


@dataclass
class DEResult:
    best: Candidate
    generations: int
    converged: bool
    history: list[dict] = field(default_factory=list)

    def write_log(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["generation", "best_fitness", "fitness_spread", "point_spread"])
            writer.writeheader()
            writer.writerows(self.history)


def init_population(
    n: int,
    m_eff: int,
    feasible: FeasibleFn,
    rng: np.random.Generator,
    config: DEConfig = DEConfig(),
) -> np.ndarray:
    """``population_factor * n * m_eff`` feasible points, each entry uniform in [init_low, init_high]."""
    size = config.size_for(n, m_eff)
    population = np.empty((size, n, m_eff))
    for i in range(size):
        for _ in range(config.max_resamples):
            point = rng.uniform(config.init_low, config.init_high, size=(n, m_eff))
            if feasible(point):
                population[i] = point
                break
        else:
            raise InfeasibleProblem(f"no feasible initial point after {config.max_resamples} draws")
    return population


def mutant(x_w: np.ndarray, x_u: np.ndarray, x_v: np.ndarray, scaling_factor: float) -> np.ndarray:
    return x_w + scaling_factor * (x_u - x_v)


def evolve_generation(
    population: np.ndarray,
    fitness: np.ndarray,
    cost: CostFn,
    config: DEConfig,
    rng: np.random.Generator,
    map_fn: Callable = map,
) -> tuple[np.ndarray, np.ndarray]:
    """One DE generation; returns the new population and its fitness."""
    size = population.shape[0]
    if size < 4:
        raise InvalidParameter("population must have at least 4 members")
    shape = population.shape[1:]
    flat = population.reshape(size, -1)
    dim = flat.shape[1]
    trials = np.empty_like(flat)
    for j in range(size):
        others = rng.choice(size - 1, size=3, replace=False)
        others[others >= j] += 1
        w, u, v = others
        shifted = mutant(flat[w], flat[u], flat[v], config.scaling_factor)
        keep_own = rng.random(dim) < config.cross_probability
        keep_own[rng.integers(dim)] = False
        trials[j] = np.maximum(np.where(keep_own, flat[j], shifted), 0.0)
    trial_fitness = np.fromiter(
        map_fn(cost, (t.reshape(shape) for t in trials)), dtype=float, count=size
    )
    better = trial_fitness < fitness
    new_flat = np.where(better[:, None], trials, flat)
    return new_flat.reshape(population.shape), np.where(better, trial_fitness, fitness)


def optimize(
    cost: CostFn,
    n: int,
    m_eff: int,
    rng: np.random.Generator,
    config: DEConfig = DEConfig(),
    feasible: Optional[FeasibleFn] = None,
    map_fn: Callable = map,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
) -> DEResult:
    """Minimise ``cost`` over ``n x m_eff`` non-negative couplings.

    ``cost`` must return ``inf`` for infeasible points. ``feasible`` defaults
    to "cost is finite". The run stops once the best fitness and best point
    have both moved less than the tolerances for ``patience`` consecutive
    generations, or after ``max_generations``.
    """
    if feasible is None:
        cache: dict[bytes, float] = {}

        def feasible(point):
            value = cost(point)
            cache[point.tobytes()] = value
            return bool(np.isfinite(value))

        population = init_population(n, m_eff, feasible, rng, config)
        fitness = np.array([cache.pop(p.tobytes(), None) or cost(p) for p in population])
    else:
        population = init_population(n, m_eff, feasible, rng, config)
        fitness = np.fromiter(map_fn(cost, population), dtype=float, count=population.shape[0])
    if not np.any(np.isfinite(fitness)):
        raise InfeasibleProblem("no feasible candidate in the initial population")

    history = []
    best = int(np.argmin(fitness))
    best_f, best_x = fitness[best], population[best].copy()
    quiet = 0
    converged = False
    generation = 0
    for generation in range(1, config.max_generations + 1):
        population, fitness = evolve_generation(population, fitness, cost, config, rng, map_fn)
        idx = int(np.argmin(fitness))
        new_f, new_x = fitness[idx], population[idx]
        finite = fitness[np.isfinite(fitness)]
        history.append(
            {
                "generation": generation,
                "best_fitness": float(new_f),
                "fitness_spread": float(finite.max() - finite.min()) if finite.size else float("inf"),
                "point_spread": float(np.linalg.norm(population.reshape(len(population), -1).std(axis=0))),
            }
        )
        if callback is not None:
            callback(generation, population, fitness)
        small_f = abs(best_f - new_f) < config.f_tolerance if np.isfinite(new_f) else False
        small_x = np.linalg.norm(new_x - best_x) < config.x_tolerance
        quiet = quiet + 1 if (small_f and small_x) else 0
        best_f, best_x = new_f, new_x.copy()
        if quiet >= config.patience:
            converged = True
            break
    return DEResult(Candidate(best_x, float(best_f)), generation, converged, history)
