"""Quantum channel equalisation with spatial and temporal multiplexing.

Every logical input is sent through a fixed random channel as a product of
``spatial`` identical copies, and that product is sent ``temporal`` times in
a row. The reservoir sees the distorted modes and, after the last repeat,
its first output mode should hold the original input. Channel and reservoir
together act like one larger reservoir whose blocks come from
:func:`compose_channel`.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.linalg import block_diag

from ..de import DEConfig
from ..engine import PhasePlan, ground_state_covariance, simulate_outputs
from ..errors import DimensionMismatch, InvalidParameter
from ..gaussian import mode_indices
from ..network import (
    OMEGA0,
    RHO_LIMIT,
    NetworkSpec,
    PropagatorBlocks,
    assemble_blocks,
    potential_matrix,
    random_channel,
    random_reservoir,
    spectral_radius,
)
from .common import CouplingProblem, TaskResult, mean_fidelity, train_over_scan
from .stqm import stqm_inputs

QCE_DT_PERIODS = 0.75
CHANNEL_RHO_LIMIT = 0.95


def _direct_sum_order(c: int, n: int) -> np.ndarray:
    """Permutation from (channel q, channel p, reservoir q, reservoir p) to global q..q, p..p order."""
    return np.concatenate([np.arange(c), 2 * c + np.arange(n), c + np.arange(c), 2 * c + n + np.arange(n)])


def compose_channel(channel: PropagatorBlocks, reservoir: PropagatorBlocks) -> PropagatorBlocks:
    """Blocks of channel followed by reservoir, treated as one reservoir of ``C + N`` modes.

    The enlarged state is channel modes first, then reservoir modes.
    """
    if channel.m_eff != reservoir.m_eff:
        raise DimensionMismatch(
            f"channel emits {channel.m_eff} modes but the reservoir takes {reservoir.m_eff}"
        )
    c2, n2 = channel.A.shape[0], reservoir.A.shape[0]
    a_bar = np.zeros((c2 + n2, c2 + n2))
    a_bar[:c2, :c2] = channel.A
    a_bar[c2:, :c2] = reservoir.B @ channel.C
    a_bar[c2:, c2:] = reservoir.A
    b_bar = np.vstack([channel.B, reservoir.B @ channel.D])
    c_bar = np.hstack([reservoir.D @ channel.C, reservoir.C])
    d_bar = reservoir.D @ channel.D
    order = _direct_sum_order(channel.n, reservoir.n)
    a_bar = a_bar[np.ix_(order, order)]
    blocks = PropagatorBlocks(
        S=None,
        A=a_bar,
        B=b_bar[order],
        C=c_bar[:, order],
        D=d_bar,
        rho_a=spectral_radius(a_bar),
        n=channel.n + reservoir.n,
        m_eff=reservoir.m_eff,
    )
    object.__setattr__(blocks, "S", assemble_blocks(blocks))
    return blocks


def multiplex(cov: np.ndarray, copies: int) -> np.ndarray:
    """Covariance of ``copies`` identical uncorrelated copies, in global q..q, p..p order."""
    m = cov.shape[0] // 2
    eye = np.eye(copies)
    out = np.empty((2 * m * copies, 2 * m * copies))
    k = m * copies
    out[:k, :k] = np.kron(eye, cov[:m, :m])
    out[:k, k:] = np.kron(eye, cov[:m, m:])
    out[k:, :k] = np.kron(eye, cov[m:, :m])
    out[k:, k:] = np.kron(eye, cov[m:, m:])
    return out


def _designated(outs: np.ndarray, m: int, copies: int) -> np.ndarray:
    idx = mode_indices(range(m), m * copies)
    return outs[:, idx][:, :, idx]


def run_qce(
    rng: np.random.Generator,
    n: int = 3,
    m: int = 1,
    c: int = 2,
    spatial: int = 1,
    temporal: int = 1,
    dt: Optional[float] = None,
    config: DEConfig = DEConfig(),
    plan: PhasePlan = PhasePlan(),
    reservoir: Optional[NetworkSpec] = None,
    rho_policy: str = "strict",
    rho_limit: float = RHO_LIMIT,
    omega0: float = OMEGA0,
) -> TaskResult:
    """Fixed ``dt`` (default ``1.5 pi / omega0``); the first output mode is the recovered copy."""
    if spatial < 1 or temporal < 1:
        raise InvalidParameter("multiplexing orders must be at least 1")
    if reservoir is None:
        reservoir = random_reservoir(n, rng, omega0=omega0)
    n = reservoir.size
    m_eff = spatial * m
    if dt is None:
        dt = 2.0 * np.pi * QCE_DT_PERIODS / omega0
    channel_spec, _, channel = random_channel(m_eff, dt, rng, c=c, rho_limit=CHANNEL_RHO_LIMIT, omega0=omega0)
    logical = stqm_inputs(m, plan.total, rng, omega0)
    sent = np.repeat(np.array([multiplex(s, spatial) for s in logical]), temporal, axis=0)

    sigma0 = np.zeros((2 * (c + n),) * 2)
    order = _direct_sum_order(c, n)
    sigma0[np.ix_(order, order)] = block_diag(
        ground_state_covariance(potential_matrix(channel_spec)),
        ground_state_covariance(potential_matrix(reservoir)),
    )
    last = np.arange(temporal - 1, plan.total * temporal, temporal)
    train_end = plan.preparation + plan.training

    def run(blocks, steps):
        outs, _ = simulate_outputs(compose_channel(channel, blocks), sigma0, sent[: steps * temporal])
        return _designated(outs[last[:steps]], m, spatial)

    def make_cost(problem: CouplingProblem):
        def cost(g):
            blocks = problem.blocks(g)
            if blocks is None:
                return float("inf")
            outs = run(blocks, train_end)
            sl = plan.training_slice
            return -mean_fidelity(outs[sl], logical[sl])

        return cost

    def make_problem(step):
        return CouplingProblem(reservoir, m_eff, step, omega0, rho_limit, rho_policy)

    dt_used, result = train_over_scan(make_problem, make_cost, (dt,), rng, config)
    blocks = make_problem(dt_used).blocks(result.best.coupling)
    outs = run(blocks, plan.total)
    metrics = {
        "training": mean_fidelity(outs[plan.training_slice], logical[plan.training_slice]),
        "test": mean_fidelity(outs[plan.test_slice], logical[plan.test_slice]),
    }
    return TaskResult(
        task="qce",
        figure_of_merit=metrics["test"],
        dt=dt_used,
        coupling=result.best.coupling,
        cost=result.best.fitness,
        generations=result.generations,
        rho_a=blocks.rho_a,
        params={"N": n, "M": m, "C": c, "spatial": spatial, "temporal": temporal, "rho_policy": rho_policy},
        phase_metrics=metrics,
    )

