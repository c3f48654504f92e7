"""Fidelity reached by guessing: two independent draws from the input distribution."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ..errors import InvalidParameter
from ..gaussian import random_zero_mean_state
from ..network import OMEGA0
from .common import mean_fidelity

Sampler = Callable[[np.random.Generator], np.ndarray]


def state_sampler(m: int = 1, omega: float = OMEGA0, n_th_range=(0.0, 10.0), r_range=(0.0, 1.0)) -> Sampler:
    """Covariances of random zero-mean states as used for task inputs."""
    return lambda rng: random_zero_mean_state(m, rng, n_th_range, r_range, omega).covariance


def random_guess_baseline(
    rng: np.random.Generator,
    sample_a: Optional[Sampler] = None,
    sample_b: Optional[Sampler] = None,
    samples: int = 10_000,
) -> float:
    """Monte Carlo mean fidelity between independent draws of ``sample_a`` and ``sample_b``."""
    if samples < 1:
        raise InvalidParameter("need at least one sample")
    sample_a = sample_a or state_sampler()
    sample_b = sample_b or sample_a
    a = np.array([sample_a(rng) for _ in range(samples)])
    b = np.array([sample_b(rng) for _ in range(samples)])
    return mean_fidelity(a, b)
