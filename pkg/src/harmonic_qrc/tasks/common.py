"""Shared plumbing for the temporal tasks: delay scans, feasibility, results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .. import kernels
from ..de import DEConfig, DEResult, optimize
from ..errors import InvalidParameter
from ..gaussian import GaussianState, fidelity
from ..network import OMEGA0, RHO_LIMIT, NetworkSpec, PropagatorBlocks, blocks_from_potential, joint_potential, potential_matrix


def delay_scan(omega0: float = OMEGA0, multiples: Sequence[int] = (1, 2, 3, 4)) -> tuple[float, ...]:
    """``dt = 2 pi j / omega0``: whole periods of the bare oscillators."""
    return tuple(2.0 * np.pi * j / omega0 for j in multiples)


DELAY_SCAN = delay_scan()


@dataclass
class TaskResult:
    task: str
    figure_of_merit: float
    dt: float
    coupling: Optional[np.ndarray]
    seed: Optional[int] = None
    cost: float = float("nan")
    generations: int = 0
    rho_a: float = float("nan")
    params: dict = field(default_factory=dict)
    phase_metrics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "params": dict(self.params),
            "dt": self.dt,
            "figure_of_merit": self.figure_of_merit,
            "cost": self.cost,
            "generations": self.generations,
            "rho_a": self.rho_a,
            "coupling": None if self.coupling is None else np.asarray(self.coupling).tolist(),
            "phase_metrics": dict(self.phase_metrics),
        }


def check_scan(scan: Sequence[float]) -> tuple[float, ...]:
    scan = tuple(float(dt) for dt in scan)
    if not scan or min(scan) <= 0:
        raise InvalidParameter(f"delay scan must be non-empty and positive, got {scan}")
    return scan


RHO_POLICIES = ("strict", "initial")
# Trial points under the "initial" policy only need bounded dynamics.
MARGINAL_RHO = 1.0 + 1e-9


class CouplingProblem:
    """Reservoir with ``m_eff`` input oscillators whose coupling is the free variable.

    ``rho_limit`` defines feasibility of initial points. Under the ``strict``
    policy trial points must satisfy it too; under ``initial`` they only need
    ``rho(A) <= 1`` and are otherwise judged by the cost alone.
    """

    def __init__(
        self,
        reservoir: NetworkSpec,
        m_eff: int,
        dt: float,
        omega0: float = OMEGA0,
        rho_limit: float = RHO_LIMIT,
        rho_policy: str = "strict",
    ):
        if dt <= 0:
            raise InvalidParameter(f"dt must be positive, got {dt}")
        if rho_policy not in RHO_POLICIES:
            raise InvalidParameter(f"rho_policy must be one of {RHO_POLICIES}, got {rho_policy!r}")
        self.reservoir = reservoir
        self.n = reservoir.size
        self.m_eff = m_eff
        self.dt = dt
        self.omega0 = omega0
        self.rho_limit = rho_limit
        self.trial_rho_limit = rho_limit if rho_policy == "strict" else max(rho_limit, MARGINAL_RHO)
        self.v_reservoir = potential_matrix(reservoir)

    def blocks(self, coupling: np.ndarray, with_s: bool = False, limit: Optional[float] = None) -> Optional[PropagatorBlocks]:
        """Propagator blocks, or ``None`` when the coupling is not an acceptable trial point."""
        coupling = np.asarray(coupling, dtype=float)
        if np.any(coupling < 0):
            return None
        v = joint_potential(self.v_reservoir, coupling, self.omega0)
        blocks = blocks_from_potential(v, self.n, self.dt, with_s=with_s)
        return blocks if blocks.rho_a <= (self.trial_rho_limit if limit is None else limit) else None

    def feasible(self, coupling: np.ndarray) -> bool:
        """Feasibility of an initial point."""
        return self.blocks(coupling, limit=self.rho_limit) is not None


def train_over_scan(
    make_problem: Callable[[float], CouplingProblem],
    make_cost: Callable[[CouplingProblem], Callable[[np.ndarray], float]],
    scan: Sequence[float],
    rng: np.random.Generator,
    config: DEConfig,
) -> tuple[float, DEResult]:
    """Run DE for every ``dt`` and keep the lowest final cost (first wins ties)."""
    best_dt, best = None, None
    for dt in check_scan(scan):
        problem = make_problem(dt)
        result = optimize(make_cost(problem), problem.n, problem.m_eff, rng, config, feasible=problem.feasible)
        if best is None or result.best.fitness < best.best.fitness:
            best_dt, best = dt, result
    return best_dt, best


def covariance_fidelity(cov_a: np.ndarray, cov_b: np.ndarray) -> float:
    """Fidelity of zero-mean states given in the same physical quadratures."""
    k = cov_a.shape[0] // 2
    ones = np.ones(k)
    return fidelity(GaussianState(None, cov_a, ones, validate=False), GaussianState(None, cov_b, ones, validate=False))


def mean_fidelity(outputs: np.ndarray, targets: np.ndarray) -> float:
    if outputs.shape[-1] == 2:
        return float(np.mean(np.clip(kernels.single_mode_fidelities(outputs, targets), 0.0, 1.0)))
    return float(np.mean([covariance_fidelity(a, b) for a, b in zip(outputs, targets)]))
