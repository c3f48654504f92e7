"""Short-term quantum memory: output ``m`` should reproduce input ``m - tau``."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..de import DEConfig
from ..engine import PhasePlan, ground_state_covariance, simulate_outputs
from ..errors import InvalidParameter
from ..gaussian import random_zero_mean_state
from ..network import OMEGA0, RHO_LIMIT, NetworkSpec, PropagatorBlocks
from .common import CouplingProblem, delay_scan, TaskResult, mean_fidelity, train_over_scan


def stqm_cost(blocks: PropagatorBlocks, tau: int, coupling: np.ndarray) -> float:
    """Input-independent surrogate cost; zero for a perfect delay line with ``D = 0``.

    For ``tau = 0`` the ``1 / max(g)`` term keeps the optimiser away from the
    trivial uncoupled solution ``D = I``.
    """
    if tau < 0:
        raise InvalidParameter(f"tau must be non-negative, got {tau}")
    if tau == 0:
        g_max = float(np.max(coupling)) if np.size(coupling) else 0.0
        if g_max <= 0:
            return float("inf")
        return float(np.linalg.norm(blocks.D - np.eye(blocks.D.shape[0])) + 1.0 / g_max)
    transfer = blocks.C @ np.linalg.matrix_power(blocks.A, tau - 1) @ blocks.B
    return float(0.5 * np.linalg.norm(blocks.D) + 5.0 * np.linalg.norm(transfer - np.eye(transfer.shape[0])))


def stqm_inputs(m: int, steps: int, rng: np.random.Generator, omega: float = OMEGA0) -> np.ndarray:
    return np.array([random_zero_mean_state(m, rng, omega=omega).covariance for _ in range(steps)])


def evaluate_delay(
    blocks: PropagatorBlocks, sigma0: np.ndarray, inputs: np.ndarray, tau: int, plan: PhasePlan
) -> dict[str, float]:
    """Mean fidelity of output ``k`` with input ``k - tau`` in the training and test phases."""
    outs, _ = simulate_outputs(blocks, sigma0, inputs)
    metrics = {}
    for phase, sl in (("training", plan.training_slice), ("test", plan.test_slice)):
        ks = np.arange(sl.start, sl.stop)
        ks = ks[ks >= tau]
        metrics[phase] = mean_fidelity(outs[ks], inputs[ks - tau])
    return metrics


def train_stqm(
    reservoir: NetworkSpec,
    m: int,
    tau: int,
    rng: np.random.Generator,
    scan: Optional[Sequence[float]] = None,
    config: DEConfig = DEConfig(),
    plan: PhasePlan = PhasePlan(),
    inputs: Optional[np.ndarray] = None,
    omega0: float = OMEGA0,
    rho_policy: str = "strict",
    rho_limit: float = RHO_LIMIT,
) -> TaskResult:
    """Train the coupling for every ``dt`` in ``scan`` and test the best one.

    Inputs are drawn after training (or passed in), so they never influence
    the trained coupling.
    """
    if tau < 0 or m < 1:
        raise InvalidParameter("need tau >= 0 and m >= 1")

    def make_cost(problem: CouplingProblem):
        def cost(g):
            blocks = problem.blocks(g)
            return float("inf") if blocks is None else stqm_cost(blocks, tau, g)

        return cost

    def make_problem(dt):
        return CouplingProblem(reservoir, m, dt, omega0, rho_limit, rho_policy)

    dt, result = train_over_scan(make_problem, make_cost, scan or delay_scan(omega0), rng, config)
    problem = make_problem(dt)
    blocks = problem.blocks(result.best.coupling)
    if inputs is None:
        inputs = stqm_inputs(m, plan.total, rng, omega0)
    sigma0 = ground_state_covariance(problem.v_reservoir)
    metrics = evaluate_delay(blocks, sigma0, inputs, tau, plan)
    return TaskResult(
        task="stqm",
        figure_of_merit=metrics["test"],
        dt=dt,
        coupling=result.best.coupling,
        cost=result.best.fitness,
        generations=result.generations,
        params={"N": reservoir.size, "M": m, "tau": tau, "rho_policy": rho_policy},
        rho_a=blocks.rho_a,
        phase_metrics=metrics,
    )
