"""Sequential input injection into a reservoir.

Each step appends the next input modes, applies the one-step propagator to
reservoir + input, and relabels the transformed input modes as an output
slot. Emitted outputs never interact again; they idle under the identity
while they stay in the window.
"""

from __future__ import annotations

import csv
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, InvalidParameter, WindowTooSmall
from .gaussian import GaussianState, mode_indices, reduce, tensor
from .network import NetworkSpec, PropagatorBlocks, assemble_blocks, potential_matrix


@dataclass(frozen=True)
class PhasePlan:
    preparation: int = 40
    training: int = 80
    test: int = 40

    def __post_init__(self):
        if min(self.preparation, self.training, self.test) < 0:
            raise InvalidParameter("phase lengths must be non-negative")

    @property
    def total(self) -> int:
        return self.preparation + self.training + self.test

    def phase_of(self, step: int) -> str:
        if step < self.preparation:
            return "preparation"
        if step < self.preparation + self.training:
            return "training"
        return "test"

    @property
    def training_slice(self) -> slice:
        return slice(self.preparation, self.preparation + self.training)

    @property
    def test_slice(self) -> slice:
        return slice(self.preparation + self.training, self.total)

    def check_washout(self, rho_a: float, tol: float = 1e-3) -> bool:
        """Warn when the preparation phase is too short to forget the initial state."""
        ok = rho_a ** (2 * self.preparation) < tol
        if not ok:
            warnings.warn(
                f"rho(A)={rho_a:.4f}: preparation of {self.preparation} steps leaves "
                f"{rho_a ** (2 * self.preparation):.2e} of the initial state",
                RuntimeWarning,
                stacklevel=2,
            )
        return ok


def ground_state_covariance(v: np.ndarray) -> np.ndarray:
    """Covariance of the ground state of ``p.p/2 + q.V.q/2``."""
    lam, q = np.linalg.eigh(np.asarray(v, dtype=float))
    w = np.sqrt(lam)
    n = v.shape[0]
    cov = np.zeros((2 * n, 2 * n))
    cov[:n, :n] = 0.5 * (q / w) @ q.T
    cov[n:, n:] = 0.5 * (q * w) @ q.T
    return cov


def ground_state(reservoir: NetworkSpec) -> GaussianState:
    return GaussianState(None, ground_state_covariance(potential_matrix(reservoir)), reservoir.frequencies)


class Engine:
    """Joint state of the reservoir and the most recent ``window`` output slots.

    Joint modes are ordered as reservoir first, then output slots from oldest
    to newest; every slot holds ``m_eff`` modes.
    """

    def __init__(self, initial: GaussianState, window: int = 1, m_eff: int | None = None):
        if window < 1:
            raise InvalidParameter("window must hold at least one output slot")
        self.n = initial.num_modes
        self.window = window
        self.m_eff = m_eff
        self.joint = initial
        self.slots: deque[int] = deque()
        self.step_index = 0
        self.trace: list[dict] = []

    @property
    def reservoir(self) -> GaussianState:
        return reduce(self.joint, range(self.n))

    def _slot_modes(self, position: int) -> list[int]:
        start = self.n + position * self.m_eff
        return list(range(start, start + self.m_eff))

    def step(self, input_state: GaussianState, blocks: PropagatorBlocks, phase: str = "") -> GaussianState:
        m = input_state.num_modes
        if self.m_eff is None:
            self.m_eff = m
        if m != self.m_eff or blocks.m_eff != m or blocks.n != self.n:
            raise DimensionMismatch(
                f"engine (N={self.n}, M={self.m_eff}) cannot take {m}-mode input with "
                f"blocks for N={blocks.n}, M={blocks.m_eff}"
            )
        extended = tensor(self.joint, input_state)
        total = extended.num_modes
        active = mode_indices(list(range(self.n)) + list(range(total - m, total)), total)
        s = blocks.S if blocks.S is not None else assemble_blocks(blocks)
        t = np.eye(2 * total)
        t[np.ix_(active, active)] = s
        mean = t @ extended.mean
        cov = t @ extended.covariance @ t.T
        self.joint = GaussianState(mean, cov, extended.frequencies, validate=False)
        self.slots.append(self.step_index)
        if len(self.slots) > self.window:
            self.slots.popleft()
            keep = list(range(self.n)) + list(range(self.n + m, total))
            self.joint = reduce(self.joint, keep)
        output = reduce(self.joint, self._slot_modes(len(self.slots) - 1))
        self.trace.append(
            {
                "step": self.step_index,
                "phase": phase,
                "reservoir_cov_norm": float(np.linalg.norm(self.reservoir.covariance)),
                "output_det": float(np.linalg.det(output.covariance)),
            }
        )
        self.step_index += 1
        return output

    def output(self, k: int) -> GaussianState:
        return reduce(self.joint, self._slot_modes(self._position(k)))

    def _position(self, k: int) -> int:
        try:
            return list(self.slots).index(k)
        except ValueError:
            raise WindowTooSmall(f"output {k} is not in the window {list(self.slots)}") from None

    def joint_delayed_output(self, k: int, tau: int) -> GaussianState:
        """Two-slot state of outputs ``k`` (first) and ``k - tau``."""
        if tau < 1:
            raise InvalidParameter("tau must be at least 1")
        newer, older = self._position(k), self._position(k - tau)
        return reduce(self.joint, self._slot_modes(newer) + self._slot_modes(older))

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["step", "phase", "reservoir_cov_norm", "output_det"])
            writer.writeheader()
            writer.writerows(self.trace)


def initialize(reservoir: NetworkSpec, initial: GaussianState | None = None, window: int = 1) -> Engine:
    if initial is None:
        initial = ground_state(reservoir)
    if initial.num_modes != reservoir.size:
        raise DimensionMismatch(f"initial state has {initial.num_modes} modes, reservoir {reservoir.size}")
    return Engine(initial, window)


def run_sequence(
    engine: Engine,
    inputs: Sequence[GaussianState],
    blocks: PropagatorBlocks,
    plan: PhasePlan = PhasePlan(),
    repeats: int = 1,
) -> dict[str, list[GaussianState]]:
    """Feed ``inputs`` through the engine, ``repeats`` engine steps per logical step.

    Only the output of the last repeat of every logical step is kept.
    """
    if len(inputs) != plan.total * repeats:
        raise DimensionMismatch(f"expected {plan.total * repeats} inputs, got {len(inputs)}")
    outputs: dict[str, list[GaussianState]] = {"preparation": [], "training": [], "test": []}
    for i, state in enumerate(inputs):
        phase = plan.phase_of(i // repeats)
        out = engine.step(state, blocks, phase)
        if (i + 1) % repeats == 0:
            outputs[phase].append(out)
    return outputs


def closed_form_covariance(
    blocks: PropagatorBlocks, input_covs: Sequence[np.ndarray], initial_cov: np.ndarray, m: int
) -> np.ndarray:
    """Reservoir covariance after ``m`` inputs from the explicit sum over input history."""
    a, b = blocks.A, blocks.B
    if m < 1:
        raise InvalidParameter("m must be at least 1")
    powers = _powers(a, m)
    sigma = powers[m] @ initial_cov @ powers[m].T
    for k in range(1, m + 1):
        p = powers[m - k] @ b
        sigma = sigma + p @ input_covs[k - 1] @ p.T
    return sigma


def closed_form_output_covariance(
    blocks: PropagatorBlocks, input_covs: Sequence[np.ndarray], initial_cov: np.ndarray, m: int
) -> np.ndarray:
    """Covariance of output ``m`` (1-based) from ``C A^(m-1) x0 + D x_m + sum C A^(m-k-1) B x_k``."""
    a, b, c, d = blocks.A, blocks.B, blocks.C, blocks.D
    if m < 1:
        raise InvalidParameter("m must be at least 1")
    powers = _powers(a, m)
    init = c @ powers[m - 1]
    sigma = init @ initial_cov @ init.T + d @ input_covs[m - 1] @ d.T
    for k in range(1, m):
        p = c @ powers[m - k - 1] @ b
        sigma = sigma + p @ input_covs[k - 1] @ p.T
    return sigma


def _powers(a: np.ndarray, m: int) -> list[np.ndarray]:
    out = [np.eye(a.shape[0])]
    for _ in range(m):
        out.append(a @ out[-1])
    return out


def simulate_outputs(blocks: PropagatorBlocks, sigma0: np.ndarray, input_covs: np.ndarray):
    """Output covariances and final reservoir covariance (compiled kernel when available)."""
    return kernels.output_covariances(blocks.A, blocks.B, blocks.C, blocks.D, sigma0, np.asarray(input_covs))


def simulate_reservoir(blocks: PropagatorBlocks, sigma0: np.ndarray, input_covs: np.ndarray) -> np.ndarray:
    return kernels.reservoir_covariances(blocks.A, blocks.B, sigma0, np.asarray(input_covs))


def simulate_delayed_pairs(
    blocks: PropagatorBlocks, sigma0: np.ndarray, input_covs: np.ndarray, tau: int
) -> np.ndarray:
    return kernels.delayed_pair_covariances(
        blocks.A, blocks.B, blocks.C, blocks.D, sigma0, np.asarray(input_covs), tau
    )


def stack_covariances(states: Iterable[GaussianState]) -> np.ndarray:
    return np.array([s.covariance for s in states])
