"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``HARMONIC_QRC_PURE_PYTHON=1`` before import to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("HARMONIC_QRC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

output_covariances = _impl.output_covariances
reservoir_covariances = _impl.reservoir_covariances
delayed_pair_covariances = _impl.delayed_pair_covariances
single_mode_fidelities = _impl.single_mode_fidelities
two_mode_log_negativities = _impl.two_mode_log_negativities
propagator_blocks = _impl.propagator_blocks

__all__ = [
    "BACKEND",
    "output_covariances",
    "reservoir_covariances",
    "delayed_pair_covariances",
    "single_mode_fidelities",
    "two_mode_log_negativities",
    "propagator_blocks",
]
