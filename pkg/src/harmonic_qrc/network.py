"""Quadratic Hamiltonians of spring-coupled oscillator networks.

A network with frequencies ``w`` and non-negative couplings ``g`` has
``H = p.p/2 + q.V.q/2`` with ``V = diag(w)**2 + L`` and ``L`` the weighted
graph Laplacian. Its flow for a time ``dt`` is the symplectic matrix
``exp(dt [[0, I], [-V, 0]])``, which is evaluated in closed form from the
eigendecomposition of ``V``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, SamplingBudgetExhausted, UnstableHamiltonian
from . import kernels
from .gaussian import mode_indices

OMEGA0 = 0.25
G_MAX = 0.2
RHO_LIMIT = 0.99


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    frequencies: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        freqs = np.array(self.frequencies, dtype=float).reshape(-1)
        g = np.array(self.couplings, dtype=float)
        k = freqs.size
        if g.shape != (k, k):
            raise DimensionMismatch(f"couplings must be {k}x{k}, got {g.shape}")
        if np.any(freqs <= 0):
            raise InvalidParameter("frequencies must be positive")
        if not np.allclose(g, g.T, atol=1e-14):
            raise InvalidParameter("couplings must be symmetric")
        if np.any(np.diag(g) != 0):
            raise InvalidParameter("couplings must have a zero diagonal")
        if np.any(g < 0):
            raise InvalidParameter("couplings must be non-negative")
        for name, value in (("frequencies", freqs), ("couplings", g)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def size(self) -> int:
        return self.frequencies.size

    def to_dict(self) -> dict:
        iu = np.triu_indices(self.size, 1)
        return {"frequencies": self.frequencies.tolist(), "couplings_upper": self.couplings[iu].tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        freqs = np.asarray(data["frequencies"], dtype=float)
        k = freqs.size
        g = np.zeros((k, k))
        g[np.triu_indices(k, 1)] = data["couplings_upper"]
        return cls(freqs, g + g.T)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True, eq=False)
class PropagatorBlocks:
    """One-step symplectic ``S`` split into reservoir/input blocks.

    ``A`` maps reservoir to reservoir, ``B`` input to reservoir, ``C``
    reservoir to output and ``D`` input to output. Each group uses its own
    (q..q, p..p) ordering.
    """

    S: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    rho_a: float
    n: int
    m_eff: int


def laplacian(couplings: np.ndarray) -> np.ndarray:
    g = np.asarray(couplings, dtype=float)
    return np.diag(g.sum(axis=1)) - g


def potential_matrix(spec: NetworkSpec) -> np.ndarray:
    v = np.diag(spec.frequencies**2) + laplacian(spec.couplings)
    if np.linalg.eigvalsh(v).min() <= 0:
        raise UnstableHamiltonian("potential matrix is not positive definite")
    return v


def assemble_joint(
    reservoir: NetworkSpec, m_eff: int, coupling: np.ndarray, input_omega: float = OMEGA0
) -> NetworkSpec:
    """Reservoir plus ``m_eff`` input oscillators, coupled only through ``coupling`` (N x m_eff)."""
    n = reservoir.size
    coupling = np.asarray(coupling, dtype=float)
    if coupling.shape != (n, m_eff):
        raise DimensionMismatch(f"coupling must be {n}x{m_eff}, got {coupling.shape}")
    g = np.zeros((n + m_eff, n + m_eff))
    g[:n, :n] = reservoir.couplings
    g[:n, n:] = coupling
    g[n:, :n] = coupling.T
    freqs = np.concatenate([reservoir.frequencies, np.full(m_eff, float(input_omega))])
    return NetworkSpec(freqs, g)


def propagator(v: np.ndarray, dt: float) -> np.ndarray:
    """``exp(dt [[0, I], [-V, 0]])`` via the normal modes of ``V``."""
    if dt <= 0:
        raise InvalidParameter(f"dt must be positive, got {dt}")
    v = np.asarray(v, dtype=float)
    lam, q = np.linalg.eigh(v)
    if lam.min() <= 0:
        raise UnstableHamiltonian("potential matrix is not positive definite")
    w = np.sqrt(lam)
    c, s = np.cos(w * dt), np.sin(w * dt)
    cos_block = (q * c) @ q.T
    return np.block([[cos_block, (q * (s / w)) @ q.T], [-(q * (s * w)) @ q.T, cos_block]])


def group_indices(n: int, m_eff: int) -> tuple[np.ndarray, np.ndarray]:
    """Global quadrature indices of the reservoir group and of the input group."""
    k = n + m_eff
    return mode_indices(range(n), k), mode_indices(range(n, k), k)


def spectral_radius(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(a)).max())


def partition_blocks(s: np.ndarray, n: int, m_eff: int) -> PropagatorBlocks:
    s = np.asarray(s, dtype=float)
    k = n + m_eff
    if s.shape != (2 * k, 2 * k):
        raise DimensionMismatch(f"S must be {2 * k}x{2 * k}, got {s.shape}")
    r, i = group_indices(n, m_eff)
    a = s[np.ix_(r, r)]
    return PropagatorBlocks(
        S=s,
        A=a,
        B=s[np.ix_(r, i)],
        C=s[np.ix_(i, r)],
        D=s[np.ix_(i, i)],
        rho_a=spectral_radius(a),
        n=n,
        m_eff=m_eff,
    )


def assemble_blocks(blocks: PropagatorBlocks) -> np.ndarray:
    """Inverse of :func:`partition_blocks`."""
    k = blocks.n + blocks.m_eff
    r, i = group_indices(blocks.n, blocks.m_eff)
    s = np.zeros((2 * k, 2 * k))
    s[np.ix_(r, r)] = blocks.A
    s[np.ix_(r, i)] = blocks.B
    s[np.ix_(i, r)] = blocks.C
    s[np.ix_(i, i)] = blocks.D
    return s


def joint_potential(v_reservoir: np.ndarray, coupling: np.ndarray, input_omega: float = OMEGA0) -> np.ndarray:
    """Potential matrix of reservoir + inputs built directly from the reservoir's ``V``."""
    n, m_eff = coupling.shape
    v = np.empty((n + m_eff, n + m_eff))
    v[:n, :n] = v_reservoir
    v[:n, :n] += np.diag(coupling.sum(axis=1))
    v[:n, n:] = -coupling
    v[n:, :n] = -coupling.T
    v[n:, n:] = np.diag(input_omega**2 + coupling.sum(axis=0))
    return v


def blocks_from_potential(v: np.ndarray, n: int, dt: float, with_s: bool = True) -> PropagatorBlocks:
    """Partitioned propagator without materialising the permuted ``S`` unless asked."""
    lam, q = np.linalg.eigh(v)
    if lam[0] <= 0:
        raise UnstableHamiltonian("potential matrix is not positive definite")
    a, b, c, d = kernels.propagator_blocks(lam, q, n, dt)
    blocks = PropagatorBlocks(
        S=None, A=a, B=b, C=c, D=d, rho_a=spectral_radius(a), n=n, m_eff=v.shape[0] - n
    )
    if with_s:
        object.__setattr__(blocks, "S", assemble_blocks(blocks))
    return blocks


def coupled_blocks(
    reservoir: NetworkSpec, coupling: np.ndarray, dt: float, input_omega: float = OMEGA0
) -> PropagatorBlocks:
    """Blocks of the one-step propagator for reservoir + inputs under ``coupling``."""
    coupling = np.asarray(coupling, dtype=float)
    joint = assemble_joint(reservoir, coupling.shape[1], coupling, input_omega)
    return partition_blocks(propagator(potential_matrix(joint), dt), reservoir.size, coupling.shape[1])


def random_reservoir(
    n: int, rng: np.random.Generator, g_max: float = G_MAX, omega0: float = OMEGA0
) -> NetworkSpec:
    """Complete graph with i.i.d. uniform couplings in [0, g_max]."""
    if n < 1:
        raise InvalidParameter("reservoir needs at least one oscillator")
    g = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    g[iu] = rng.uniform(0.0, g_max, size=len(iu[0]))
    return NetworkSpec(np.full(n, float(omega0)), g + g.T)


def random_channel(
    m: int,
    dt: float,
    rng: np.random.Generator,
    c: int = 2,
    rho_limit: float = 0.95,
    g_max: float = G_MAX,
    omega0: float = OMEGA0,
    max_attempts: int = 10_000,
) -> tuple[NetworkSpec, np.ndarray, PropagatorBlocks]:
    """Rejection-sample a ``c``-oscillator channel whose memory block has radius <= rho_limit."""
    for _ in range(max_attempts):
        spec = random_reservoir(c, rng, g_max, omega0)
        coupling = rng.uniform(0.0, g_max, size=(c, m))
        blocks = coupled_blocks(spec, coupling, dt, omega0)
        if blocks.rho_a <= rho_limit:
            return spec, coupling, blocks
    raise SamplingBudgetExhausted(f"no channel with rho(A') <= {rho_limit} in {max_attempts} draws")
