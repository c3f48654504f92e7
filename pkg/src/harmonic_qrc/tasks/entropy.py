"""Entropy detection: a linear readout of reservoir covariances estimates past input determinants.

The Hamiltonian is never trained here. The reservoir covariance is linear in
past input covariances, so the readout uses products of pairs of entries of
the first covariance row, which can represent the quadratic determinant.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..engine import PhasePlan, ground_state_covariance, simulate_reservoir
from ..errors import InfeasibleProblem, InvalidParameter
from ..gaussian import random_zero_mean_state, von_neumann_entropy_thermal
from ..network import (
    G_MAX,
    OMEGA0,
    RHO_LIMIT,
    NetworkSpec,
    blocks_from_potential,
    joint_potential,
    potential_matrix,
    random_reservoir,
)
from .common import TaskResult
from .qce import multiplex

ENTROPY_PLAN = PhasePlan(500, 2000, 500)


def entropy_scan(omega0: float = OMEGA0) -> tuple[float, ...]:
    """``dt`` from 0.1 to 8 in units of ``pi / omega0``; infeasible values are skipped."""
    return tuple(np.arange(1, 81) * 0.1 * np.pi / omega0)


def entropy_feature_map(reservoir_cov: np.ndarray) -> np.ndarray:
    """Products of all distinct pairs of first-row entries, then a constant 1.

    Accepts a single ``2N x 2N`` covariance or a stack of them.
    """
    cov = np.asarray(reservoir_cov, dtype=float)
    row = cov[..., 0, :]
    i, j = np.triu_indices(row.shape[-1], 1)
    pairs = row[..., i] * row[..., j]
    return np.concatenate([pairs, np.ones(pairs.shape[:-1] + (1,))], axis=-1)


def train_linear_readout(features: np.ndarray, targets: np.ndarray, ridge: float = 1e-8) -> np.ndarray:
    """Weights minimising ``|X w - y|^2 + ridge |w|^2``."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise InvalidParameter(f"features {x.shape} and targets {y.shape} do not match")
    if ridge < 0:
        raise InvalidParameter("ridge must be non-negative")
    if ridge > 0:
        x = np.vstack([x, np.sqrt(ridge) * np.eye(x.shape[1])])
        y = np.concatenate([y, np.zeros(x.shape[1])])
    return np.linalg.lstsq(x, y, rcond=None)[0]


def nmse(prediction: np.ndarray, target: np.ndarray) -> float:
    target = np.asarray(target, dtype=float)
    var = np.var(target)
    if var == 0:
        raise InvalidParameter("NMSE is undefined for a constant target")
    return float(np.mean((np.asarray(prediction) - target) ** 2) / var)


def entropy_from_determinants(det: np.ndarray) -> np.ndarray:
    """Von Neumann entropy from single-mode determinants; estimates below 1/4 count as pure."""
    n_th = np.sqrt(np.maximum(np.asarray(det, dtype=float), 0.25)) - 0.5
    return von_neumann_entropy_thermal(n_th)


TOPOLOGIES = ("connected", "isolated")

# Input couplings of 0.2 or less leave rho(A) >= 0.99 at every scanned dt.
INPUT_G_MAX = 2.0


def paired_network(
    n: int,
    m: int,
    rng: np.random.Generator,
    topology: str = "connected",
    g_max: float = G_MAX,
    input_g_max: float = INPUT_G_MAX,
    omega0: float = OMEGA0,
) -> tuple[NetworkSpec, np.ndarray]:
    """Reservoir and coupling where input ``j`` meets only oscillators ``2j`` and ``2j + 1``.

    ``isolated`` couples each pair internally and nothing else, so the
    triplets never interact. ``connected`` keeps the usual complete random
    reservoir and restricts only the input coupling to the pairs.
    """
    if n != 2 * m:
        raise InvalidParameter(f"paired topology needs N = 2M, got N={n}, M={m}")
    if topology not in TOPOLOGIES:
        raise InvalidParameter(f"topology must be one of {TOPOLOGIES}, got {topology!r}")
    if topology == "connected":
        reservoir = random_reservoir(n, rng, g_max, omega0)
    else:
        g = np.zeros((n, n))
        pair = rng.uniform(0.0, g_max, size=m)
        g[np.arange(0, n, 2), np.arange(1, n, 2)] = pair
        reservoir = NetworkSpec(np.full(n, float(omega0)), g + g.T)
    coupling = np.zeros((n, m))
    for j in range(m):
        coupling[[2 * j, 2 * j + 1], j] = rng.uniform(0.0, input_g_max, size=2)
    return reservoir, coupling


def run_entropy_detection(
    rng: np.random.Generator,
    n: int = 20,
    m: int = 10,
    taus: Sequence[int] = range(6),
    scan: Optional[Sequence[float]] = None,
    plan: PhasePlan = ENTROPY_PLAN,
    ridge: float = 1e-8,
    rho_limit: float = RHO_LIMIT,
    topology: str = "connected",
    g_max: float = G_MAX,
    input_g_max: float = INPUT_G_MAX,
    omega0: float = OMEGA0,
) -> list[TaskResult]:
    """One readout per delay on a shared, untrained reservoir."""
    taus = list(taus)
    if min(taus) < 0 or max(taus) >= plan.preparation:
        raise InvalidParameter("delays must lie in [0, preparation)")
    reservoir, coupling = paired_network(n, m, rng, topology, g_max, input_g_max, omega0)
    singles = np.array([random_zero_mean_state(1, rng, omega=omega0).covariance for _ in range(plan.total)])
    inputs = np.array([multiplex(s, m) for s in singles])
    dets = singles[:, 0, 0] * singles[:, 1, 1] - singles[:, 0, 1] ** 2
    v_res = potential_matrix(reservoir)
    v = joint_potential(v_res, coupling, omega0)
    sigma0 = ground_state_covariance(v_res)
    train, test = plan.training_slice, plan.test_slice

    scan = scan or entropy_scan(omega0)
    k_train = np.arange(train.start, train.stop)
    best: dict[int, tuple] = {}
    for dt in scan:
        blocks = blocks_from_potential(v, n, dt, with_s=False)
        if blocks.rho_a >= rho_limit:
            continue
        feats = entropy_feature_map(simulate_reservoir(blocks, sigma0, inputs))
        for tau in taus:
            w = train_linear_readout(feats[k_train], dets[k_train - tau], ridge)
            err = nmse(feats[k_train] @ w, dets[k_train - tau])
            if tau not in best or err < best[tau][0]:
                best[tau] = (err, dt, blocks.rho_a, feats[test], w)
    if not best:
        raise InfeasibleProblem(f"no dt in {tuple(scan)} gives rho(A) < {rho_limit}")

    results = []
    for tau in taus:
        err, dt, rho, test_feats, w = best[tau]
        k_test = np.arange(test.start, test.stop)
        det_pred, det_true = test_feats @ w, dets[k_test - tau]
        metrics = {
            "training_nmse_det": err,
            "test_nmse_det": nmse(det_pred, det_true),
            "test_nmse_entropy": nmse(entropy_from_determinants(det_pred), entropy_from_determinants(det_true)),
        }
        results.append(
            TaskResult(
                task="entropy",
                figure_of_merit=metrics["test_nmse_entropy"],
                dt=dt,
                coupling=coupling,
                cost=err,
                rho_a=rho,
                params={"N": n, "M": m, "tau": tau, "topology": topology},
                phase_metrics=metrics,
            )
        )
    return results
