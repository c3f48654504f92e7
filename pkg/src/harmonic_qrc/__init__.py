"""Temporal quantum tasks on random harmonic-oscillator reservoirs."""

from .errors import QRCError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "QRCError", "__version__"]
