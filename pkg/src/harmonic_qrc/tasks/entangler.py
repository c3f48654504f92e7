"""Entangler: turn a stream of vacuum inputs into outputs entangled at delay ``tau``."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .. import kernels
from ..de import DEConfig
from ..engine import PhasePlan, ground_state_covariance, simulate_delayed_pairs
from ..errors import InvalidParameter
from ..gaussian import vacuum
from ..network import OMEGA0, RHO_LIMIT, NetworkSpec, random_reservoir
from .common import CouplingProblem, TaskResult, delay_scan, train_over_scan


def delayed_negativities(blocks, sigma0: np.ndarray, inputs: np.ndarray, tau: int) -> np.ndarray:
    """``E_N`` between outputs ``k`` and ``k - tau``; entry ``i`` belongs to ``k = i + tau``."""
    return kernels.two_mode_log_negativities(simulate_delayed_pairs(blocks, sigma0, inputs, tau))


def phase_mean(values: np.ndarray, tau: int, sl: slice) -> float:
    ks = np.arange(max(sl.start, tau), sl.stop)
    return float(np.mean(values[ks - tau]))


def run_entangler(
    rng: np.random.Generator,
    n: int = 3,
    tau: int = 1,
    scan: Optional[Sequence[float]] = None,
    config: DEConfig = DEConfig(),
    plan: PhasePlan = PhasePlan(),
    reservoir: Optional[NetworkSpec] = None,
    rho_policy: str = "strict",
    rho_limit: float = RHO_LIMIT,
    omega0: float = OMEGA0,
) -> TaskResult:
    """Maximise the mean training-phase log-negativity of output pairs ``(k, k - tau)``."""
    if tau < 1:
        raise InvalidParameter("the entangler needs tau >= 1")
    if reservoir is None:
        reservoir = random_reservoir(n, rng, omega0=omega0)
    inputs = np.repeat(vacuum(1, omega0).covariance[None], plan.total, axis=0)
    train_end = plan.preparation + plan.training

    def make_problem(dt):
        return CouplingProblem(reservoir, 1, dt, omega0, rho_limit, rho_policy)

    def make_cost(problem: CouplingProblem):
        sigma0 = ground_state_covariance(problem.v_reservoir)

        def cost(g):
            blocks = problem.blocks(g)
            if blocks is None:
                return float("inf")
            values = delayed_negativities(blocks, sigma0, inputs[:train_end], tau)
            return -phase_mean(values, tau, plan.training_slice)

        return cost

    dt, result = train_over_scan(make_problem, make_cost, scan or delay_scan(omega0), rng, config)
    problem = make_problem(dt)
    blocks = problem.blocks(result.best.coupling)
    values = delayed_negativities(blocks, ground_state_covariance(problem.v_reservoir), inputs, tau)
    metrics = {
        "training": phase_mean(values, tau, plan.training_slice),
        "test": phase_mean(values, tau, plan.test_slice),
    }
    return TaskResult(
        task="entangler",
        figure_of_merit=metrics["test"],
        dt=dt,
        coupling=result.best.coupling,
        cost=result.best.fitness,
        generations=result.generations,
        rho_a=blocks.rho_a,
        params={"N": reservoir.size, "tau": tau, "rho_policy": rho_policy},
        phase_metrics=metrics,
    )
