"""Brute-force Fock-space references for single- and two-mode Gaussian states.

Everything here works in dimensionless quadratures q = (a + a^dag)/sqrt(2),
p = (a - a^dag)/(i sqrt(2)), where the vacuum covariance is I/2.
"""

import numpy as np
from scipy import sparse
from scipy.linalg import eigh, expm
from scipy.sparse.linalg import expm_multiply


def annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1)


def thermal_dm(n_th, cutoff):
    if n_th == 0:
        rho = np.zeros((cutoff, cutoff))
        rho[0, 0] = 1.0
        return rho
    k = np.arange(cutoff)
    p = (n_th / (n_th + 1.0)) ** k / (n_th + 1.0)
    return np.diag(p)


def squeeze_operator(r, phi, cutoff):
    """exp(r/2 (e^{-i phi} a^2 - e^{i phi} a^dag^2)) on a truncated space."""
    a = annihilation(cutoff)
    gen = 0.5 * r * (np.exp(-1j * phi) * a @ a - np.exp(1j * phi) * a.T @ a.T)
    return expm(gen)


def squeezed_thermal_dm(n_th, r, phi, cutoff, pad=2):
    """Squeezed thermal state, built in a ``pad`` times larger space and then truncated."""
    big = pad * cutoff
    s = squeeze_operator(r, phi, big)
    rho = s @ thermal_dm(n_th, big) @ s.conj().T
    return rho[:cutoff, :cutoff]


def covariance(rho):
    cutoff = rho.shape[0]
    a = annihilation(cutoff)
    q = (a + a.T) / np.sqrt(2)
    p = (a - a.T) / (1j * np.sqrt(2))
    ops = [q, p]
    mean = [np.trace(rho @ o).real for o in ops]
    cov = np.empty((2, 2))
    for i, x in enumerate(ops):
        for j, y in enumerate(ops):
            cov[i, j] = 0.5 * np.trace(rho @ (x @ y + y @ x)).real - mean[i] * mean[j]
    return cov


def _psd_sqrt(m):
    w, v = eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def uhlmann_fidelity(rho, sigma):
    """(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2."""
    root = _psd_sqrt(rho)
    inner = root @ sigma @ root
    w = eigh(0.5 * (inner + inner.conj().T), eigvals_only=True)
    return float(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2)


def thermal_entropy(n_th, cutoff=200):
    p = np.diag(thermal_dm(n_th, cutoff))
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def two_mode_squeezed_reduced(r, cutoff=60):
    """Reduced single-mode density matrix of exp(r (a b - a^dag b^dag)) |0,0>."""
    a = sparse.diags(np.sqrt(np.arange(1, cutoff)), 1, format="csr")
    eye = sparse.identity(cutoff, format="csr")
    a1, a2 = sparse.kron(a, eye, format="csr"), sparse.kron(eye, a, format="csr")
    gen = r * (a1 @ a2 - a1.T @ a2.T)
    vac = np.zeros(cutoff * cutoff)
    vac[0] = 1.0
    psi = expm_multiply(gen, vac).reshape(cutoff, cutoff)
    return psi @ psi.conj().T
