"""Multimode Gaussian states in the (q_1..q_K, p_1..p_K) quadrature ordering.

Units are hbar = 1 with unit oscillator mass, so the vacuum of a mode with
angular frequency ``w`` has covariance ``diag(1/(2w), w/2)``. Covariances are
stored in these physical quadratures; every measure implemented here is
invariant under the local rescaling ``diag(sqrt(w), 1/sqrt(w))`` that maps
them to dimensionless form, so no conversion is needed before evaluating
fidelities, entropies or negativities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, InvalidParameter, NonPhysicalState

SYMMETRY_TOL = 1e-10
PHYSICALITY_TOL = 1e-9


def symplectic_form(num_modes: int) -> np.ndarray:
    """Return Omega = [[0, I], [-I, 0]] for ``num_modes`` modes."""
    eye = np.eye(num_modes)
    zero = np.zeros((num_modes, num_modes))
    return np.block([[zero, eye], [-eye, zero]])


def mode_indices(modes: Sequence[int], num_modes: int) -> np.ndarray:
    """Quadrature indices (q's first, then p's) of ``modes`` in a ``num_modes`` system."""
    modes = np.asarray(modes, dtype=int)
    return np.concatenate([modes, modes + num_modes])


def is_symplectic(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    matrix = np.asarray(matrix, dtype=float)
    dim = matrix.shape[0]
    if matrix.shape != (dim, dim) or dim % 2:
        return False
    omega = symplectic_form(dim // 2)
    return bool(np.linalg.norm(matrix @ omega @ matrix.T - omega) <= tol)


def _physicality_margin(covariance: np.ndarray) -> float:
    num_modes = covariance.shape[0] // 2
    hermitian = covariance + 0.5j * symplectic_form(num_modes)
    return float(np.linalg.eigvalsh(hermitian).min())


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Immutable Gaussian state.

    Attributes:
        mean: First moments, length ``2 * num_modes``.
        covariance: Symmetric second-moment matrix.
        frequencies: Angular frequency of every mode; only used for unit
            conversion and bookkeeping.
    """

    mean: np.ndarray
    covariance: np.ndarray
    frequencies: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise DimensionMismatch(f"covariance must be 2K x 2K, got {cov.shape}")
        num_modes = cov.shape[0] // 2
        mean = np.zeros(2 * num_modes) if self.mean is None else np.array(self.mean, dtype=float)
        freqs = np.array(self.frequencies, dtype=float).reshape(-1)
        if mean.shape != (2 * num_modes,):
            raise DimensionMismatch(f"mean must have length {2 * num_modes}, got {mean.shape}")
        if freqs.shape != (num_modes,):
            raise DimensionMismatch(f"need {num_modes} frequencies, got {freqs.shape[0]}")
        if np.any(freqs <= 0):
            raise InvalidParameter("frequencies must be positive")
        if self.validate:
            if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(cov))):
                raise NonPhysicalState("covariance is not symmetric")
            margin = _physicality_margin(cov)
            if margin < -PHYSICALITY_TOL * max(1.0, np.max(np.abs(cov))):
                raise NonPhysicalState(
                    f"covariance violates the uncertainty relation (min eigenvalue {margin:.3e})"
                )
        cov = 0.5 * (cov + cov.T)
        for name, value in (("mean", mean), ("covariance", cov), ("frequencies", freqs)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def num_modes(self) -> int:
        return self.covariance.shape[0] // 2

    def dimensionless_covariance(self) -> np.ndarray:
        scale = np.concatenate([np.sqrt(self.frequencies), 1.0 / np.sqrt(self.frequencies)])
        return self.covariance * np.outer(scale, scale)

    def to_dict(self) -> dict:
        return {
            "num_modes": self.num_modes,
            "mean": self.mean.tolist(),
            "covariance": self.covariance.ravel().tolist(),
            "frequencies": self.frequencies.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianState":
        k = int(data["num_modes"])
        cov = np.asarray(data["covariance"], dtype=float).reshape(2 * k, 2 * k)
        return cls(np.asarray(data["mean"], dtype=float), cov, np.asarray(data["frequencies"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GaussianState":
        return cls.from_dict(json.loads(text))


def vacuum(num_modes: int, omega: float | Sequence[float] = 1.0) -> GaussianState:
    freqs = np.broadcast_to(np.asarray(omega, dtype=float), (num_modes,)).copy()
    cov = 0.5 * np.diag(np.concatenate([1.0 / freqs, freqs]))
    return GaussianState(None, cov, freqs)


def thermal(n_th: Sequence[float], omega: float | Sequence[float] = 1.0) -> GaussianState:
    n_th = np.atleast_1d(np.asarray(n_th, dtype=float))
    if np.any(n_th < 0):
        raise InvalidParameter("thermal occupation must be non-negative")
    freqs = np.broadcast_to(np.asarray(omega, dtype=float), n_th.shape).copy()
    nu = n_th + 0.5
    cov = np.diag(np.concatenate([nu / freqs, nu * freqs]))
    return GaussianState(None, cov, freqs)


def make_single_mode_state(n_th: float, r: float, phi: float, omega: float) -> GaussianState:
    """Squeezed thermal state with zero displacement.

    The covariance is ``(2 n_th + 1)/2`` times
    ``[[(cosh 2r + cos(phi) sinh 2r)/omega, sin(phi) sinh 2r],
       [sin(phi) sinh 2r, (cosh 2r - cos(phi) sinh 2r) omega]]``.
    """
    if n_th < 0:
        raise InvalidParameter(f"n_th must be non-negative, got {n_th}")
    if omega <= 0:
        raise InvalidParameter(f"omega must be positive, got {omega}")
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    off = np.sin(phi) * sh
    cov = (2 * n_th + 1) / 2 * np.array(
        [[(ch + np.cos(phi) * sh) / omega, off], [off, (ch - np.cos(phi) * sh) * omega]]
    )
    return GaussianState(None, cov, [omega])


def two_mode_squeezed_vacuum(r: float, omega: float = 1.0) -> GaussianState:
    """Twin-beam state; its log-negativity is ``2 r``."""
    ch, sh = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    dimless = np.array(
        [
            [ch, sh, 0.0, 0.0],
            [sh, ch, 0.0, 0.0],
            [0.0, 0.0, ch, -sh],
            [0.0, 0.0, -sh, ch],
        ]
    )
    scale = np.array([omega**-0.5, omega**-0.5, omega**0.5, omega**0.5])
    return GaussianState(None, dimless * np.outer(scale, scale), [omega, omega])


def haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``m x m`` unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_orthosymplectic(m: int, rng: np.random.Generator) -> np.ndarray:
    if m < 1:
        raise InvalidParameter("need at least one mode")
    u = haar_unitary(m, rng)
    return np.block([[u.real, u.imag], [-u.imag, u.real]])


def _check_interval(interval, name, lower=0.0, upper=np.inf):
    lo, hi = (float(v) for v in interval)
    if not (lower <= lo <= hi <= upper):
        raise InvalidParameter(f"{name} interval {interval} is invalid")
    return lo, hi


def random_zero_mean_state(
    m: int,
    rng: np.random.Generator,
    n_th_range=(0.0, 10.0),
    r_range=(0.0, 1.0),
    omega: float = 1.0,
) -> GaussianState:
    """Random correlated zero-mean state on ``m`` modes.

    A product of thermal states is rotated by a random passive transform,
    position-squeezed mode by mode, and rotated again. The construction is
    carried out in dimensionless quadratures and then mapped to physical ones
    for oscillators of frequency ``omega``.
    """
    if m < 1:
        raise InvalidParameter("need at least one mode")
    n_lo, n_hi = _check_interval(n_th_range, "n_th")
    r_lo, r_hi = _check_interval(r_range, "r")
    n_th = rng.uniform(n_lo, n_hi, size=m)
    r = rng.uniform(r_lo, r_hi, size=m)
    o1 = random_orthosymplectic(m, rng)
    o2 = random_orthosymplectic(m, rng)
    squeeze = np.diag(np.concatenate([np.exp(-r), np.exp(r)]))
    total = o2 @ squeeze @ o1
    dimless = total @ np.diag(np.tile(n_th + 0.5, 2)) @ total.T
    scale = np.concatenate([np.full(m, omega**-0.5), np.full(m, omega**0.5)])
    return GaussianState(None, dimless * np.outer(scale, scale), np.full(m, float(omega)))


def apply_symplectic(state: GaussianState, s: np.ndarray) -> GaussianState:
    s = np.asarray(s, dtype=float)
    if s.shape != state.covariance.shape:
        raise DimensionMismatch(f"symplectic of shape {s.shape} cannot act on {state.num_modes} modes")
    return GaussianState(s @ state.mean, s @ state.covariance @ s.T, state.frequencies)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state ``a (x) b``; modes of ``a`` come first."""
    ka, kb = a.num_modes, b.num_modes
    k = ka + kb
    idx_a = mode_indices(range(ka), k)
    idx_b = mode_indices(range(ka, k), k)
    cov = np.zeros((2 * k, 2 * k))
    mean = np.zeros(2 * k)
    cov[np.ix_(idx_a, idx_a)] = a.covariance
    cov[np.ix_(idx_b, idx_b)] = b.covariance
    mean[idx_a] = a.mean
    mean[idx_b] = b.mean
    return GaussianState(mean, cov, np.concatenate([a.frequencies, b.frequencies]), validate=False)


def reduce(state: GaussianState, modes: Sequence[int]) -> GaussianState:
    """Partial trace keeping ``modes`` (in the given order)."""
    modes = list(modes)
    if not modes:
        raise InvalidParameter("must keep at least one mode")
    if len(set(modes)) != len(modes):
        raise InvalidParameter(f"duplicate modes in {modes}")
    if min(modes) < 0 or max(modes) >= state.num_modes:
        raise InvalidParameter(f"modes {modes} out of range for {state.num_modes}-mode state")
    idx = mode_indices(modes, state.num_modes)
    return GaussianState(
        state.mean[idx],
        state.covariance[np.ix_(idx, idx)],
        state.frequencies[modes],
        validate=False,
    )


def _symplectic_spectrum(covariance: np.ndarray) -> np.ndarray:
    k = covariance.shape[0] // 2
    ev = np.linalg.eigvals(symplectic_form(k) @ covariance)
    # eigenvalues come in +-i nu pairs
    return np.sort(np.abs(ev.imag))[::2]


def symplectic_eigenvalues(covariance: np.ndarray) -> np.ndarray:
    """Sorted symplectic eigenvalues; all are >= 1/2 for physical states."""
    covariance = np.asarray(covariance, dtype=float)
    if covariance.ndim != 2 or covariance.shape[0] != covariance.shape[1] or covariance.shape[0] % 2:
        raise DimensionMismatch(f"covariance must be 2K x 2K, got {covariance.shape}")
    if _physicality_margin(covariance) < -PHYSICALITY_TOL * max(1.0, np.abs(covariance).max()):
        raise NonPhysicalState("covariance is not physical")
    return _symplectic_spectrum(covariance)


def _is_pure(covariance: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.all(np.abs(_symplectic_spectrum(covariance) - 0.5) < tol))


def fidelity(a: GaussianState, b: GaussianState) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)))**2``.

    Closed form for arbitrary Gaussian states (Banchi, Braunstein & Pirandola,
    PRL 115, 260501), written for the vacuum-1/2 convention.
    """
    if a.num_modes != b.num_modes:
        raise DimensionMismatch(f"{a.num_modes}-mode vs {b.num_modes}-mode state")
    for s in (a, b):
        if _physicality_margin(s.covariance) < -PHYSICALITY_TOL * max(1.0, np.abs(s.covariance).max()):
            raise NonPhysicalState("fidelity requires physical states")
    k = a.num_modes
    v1, v2 = a.dimensionless_covariance(), b.dimensionless_covariance()
    scale = np.concatenate([np.sqrt(a.frequencies), 1.0 / np.sqrt(a.frequencies)])
    delta = (a.mean - b.mean) * scale
    vsum = v1 + v2
    vsum_inv = np.linalg.inv(vsum)
    displacement = np.exp(-0.5 * delta @ vsum_inv @ delta)
    det_sum = np.linalg.det(vsum)
    if _is_pure(v1) or _is_pure(v2):
        return float(min(1.0, displacement / np.sqrt(det_sum)))
    omega = symplectic_form(k)
    eye = np.eye(2 * k)
    v_aux = omega.T @ vsum_inv @ (omega / 4 + v2 @ omega @ v1)
    inv_sq = np.linalg.matrix_power(v_aux @ omega, -2)
    root = linalg.sqrtm(eye + inv_sq / 4)
    ratio = np.linalg.det(2 * (root + eye) @ v_aux) / det_sum
    value = np.sqrt(abs(ratio)) * displacement
    return float(min(1.0, max(0.0, value)))


def partial_transpose(covariance: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    """Flip the sign of the momenta of ``modes``."""
    k = covariance.shape[0] // 2
    flip = np.ones(2 * k)
    flip[k + np.asarray(modes, dtype=int)] = -1.0
    return covariance * np.outer(flip, flip)


def log_negativity(state: GaussianState, partition: Sequence[int]) -> float:
    """Logarithmic negativity (natural log) across ``partition`` | rest."""
    part = sorted(set(int(i) for i in partition))
    k = state.num_modes
    if not part or len(part) >= k or part[0] < 0 or part[-1] >= k:
        raise InvalidParameter(f"{partition} is not a bipartition of {k} modes")
    nu = _symplectic_spectrum(partial_transpose(state.covariance, part))
    return float(np.sum(np.maximum(0.0, -np.log(2 * nu))))


def entropy_from_covariance(det: float, tol: float = 1e-9) -> tuple[float, float]:
    """Thermal occupation and von Neumann entropy of a single-mode state from det(sigma)."""
    if det < 0.25 - tol:
        raise NonPhysicalState(f"determinant {det} is below the vacuum value 1/4")
    n_th = max(0.0, float(np.sqrt(max(det, 0.25)) - 0.5))
    return n_th, von_neumann_entropy_thermal(n_th)


def von_neumann_entropy_thermal(n_th):
    """``n ln((n+1)/n) + ln(n+1)``, vectorised, zero at ``n = 0``."""
    n = np.asarray(n_th, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(n > 0, (n + 1) * np.log1p(n) - n * np.log(np.where(n > 0, n, 1.0)), 0.0)
    return float(s) if s.ndim == 0 else s


def von_neumann_entropy(state: GaussianState) -> float:
    nu = symplectic_eigenvalues(state.covariance)
    return float(np.sum(von_neumann_entropy_thermal(nu - 0.5)))
