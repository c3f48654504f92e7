"""Predictive state preparation from a classical series encoded in thermal inputs."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..de import DEConfig
from ..engine import PhasePlan, ground_state_covariance, simulate_outputs
from ..errors import InvalidParameter
from ..gaussian import make_single_mode_state, thermal
from ..network import OMEGA0, RHO_LIMIT, NetworkSpec, random_reservoir
from .common import CouplingProblem, TaskResult, delay_scan, mean_fidelity, train_over_scan


def preparation_sequences(series: np.ndarray, advance: int, steps: int, omega: float = OMEGA0):
    """Thermal inputs with ``n_th = series[k]`` and squeezed-vacuum targets with ``r = series[k + advance]``."""
    series = np.asarray(series, dtype=float)
    if advance < 0:
        raise InvalidParameter("advance must be non-negative")
    if series.size < steps + advance:
        raise InvalidParameter(f"series of length {series.size} is shorter than {steps} + advance {advance}")
    inputs = np.array([thermal([x], omega).covariance for x in series[:steps]])
    targets = np.array([make_single_mode_state(0.0, x, 0.0, omega).covariance for x in series[advance : advance + steps]])
    return inputs, targets


def run_state_preparation(
    rng: np.random.Generator,
    series: np.ndarray,
    n: int = 4,
    advance: int = 0,
    scan: Optional[Sequence[float]] = None,
    config: DEConfig = DEConfig(),
    plan: PhasePlan = PhasePlan(),
    reservoir: Optional[NetworkSpec] = None,
    rho_policy: str = "strict",
    rho_limit: float = RHO_LIMIT,
    omega0: float = OMEGA0,
) -> TaskResult:
    """Train the coupling so output ``k`` approximates the squeezed vacuum with ``r = series[k + advance]``."""
    inputs, targets = preparation_sequences(series, advance, plan.total, omega0)
    if reservoir is None:
        reservoir = random_reservoir(n, rng, omega0=omega0)
    train_end = plan.preparation + plan.training

    def make_problem(dt):
        return CouplingProblem(reservoir, 1, dt, omega0, rho_limit, rho_policy)

    def make_cost(problem: CouplingProblem):
        sigma0 = ground_state_covariance(problem.v_reservoir)

        def cost(g):
            blocks = problem.blocks(g)
            if blocks is None:
                return float("inf")
            outs, _ = simulate_outputs(blocks, sigma0, inputs[:train_end])
            sl = plan.training_slice
            return -mean_fidelity(outs[sl], targets[sl])

        return cost

    dt, result = train_over_scan(make_problem, make_cost, scan or delay_scan(omega0), rng, config)
    problem = make_problem(dt)
    blocks = problem.blocks(result.best.coupling)
    outs, _ = simulate_outputs(blocks, ground_state_covariance(problem.v_reservoir), inputs)
    metrics = {
        phase: mean_fidelity(outs[sl], targets[sl])
        for phase, sl in (("training", plan.training_slice), ("test", plan.test_slice))
    }
    return TaskResult(
        task="preparation",
        figure_of_merit=metrics["test"],
        dt=dt,
        coupling=result.best.coupling,
        cost=result.best.fitness,
        generations=result.generations,
        rho_a=blocks.rho_a,
        params={"N": reservoir.size, "advance": advance, "rho_policy": rho_policy},
        phase_metrics=metrics,
    )
