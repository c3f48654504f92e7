"""Pure numpy implementations of the covariance-recursion kernels.

These are the fallback used when the compiled ``_kernels`` extension is not
available, and the reference the extension is tested against. All arrays
are float64; every covariance block uses (q..q, p..p) ordering.
"""

import numpy as np


def output_covariances(A, B, C, D, sigma0, inputs):
    """Run ``sigma <- A sigma A^T + B s_k B^T`` and emit ``C sigma C^T + D s_k D^T``.

    Returns ``(outputs, sigma_final)`` where ``outputs[k]`` is the covariance
    of the output emitted at step ``k``.
    """
    sigma = np.array(sigma0, dtype=float)
    steps = inputs.shape[0]
    m2 = D.shape[0]
    outs = np.empty((steps, m2, m2))
    for k in range(steps):
        s_in = inputs[k]
        outs[k] = C @ sigma @ C.T + D @ s_in @ D.T
        sigma = A @ sigma @ A.T + B @ s_in @ B.T
    return outs, sigma


def reservoir_covariances(A, B, sigma0, inputs):
    """Reservoir covariance after every step, shape ``(T, 2N, 2N)``."""
    sigma = np.array(sigma0, dtype=float)
    steps = inputs.shape[0]
    n2 = A.shape[0]
    res = np.empty((steps, n2, n2))
    for k in range(steps):
        sigma = A @ sigma @ A.T + B @ inputs[k] @ B.T
        res[k] = sigma
    return res


def delayed_pair_covariances(A, B, C, D, sigma0, inputs, tau):
    """Joint covariance of outputs ``k`` and ``k - tau`` for ``k = tau .. T-1``.

    Entry ``i`` of the result is the ``2m``-mode covariance of
    ``(O_{i+tau}, O_i)`` in global (q..q, p..p) ordering, with the newer
    output's modes first. Emitted outputs are not touched by later steps.
    """
    if tau < 1:
        raise ValueError("tau must be at least 1")
    sigma = np.array(sigma0, dtype=float)
    steps = inputs.shape[0]
    m2 = D.shape[0]
    m = m2 // 2
    n2 = A.shape[0]
    ring_x = np.zeros((tau, n2, m2))
    ring_o = np.zeros((tau, m2, m2))
    order = np.concatenate([np.arange(m), m2 + np.arange(m), np.arange(m, m2), m2 + np.arange(m, m2)])
    pairs = np.empty((max(steps - tau, 0), 2 * m2, 2 * m2))
    for k in range(steps):
        s_in = inputs[k]
        out = C @ sigma @ C.T + D @ s_in @ D.T
        slot = k % tau
        if k >= tau:
            cross = C @ ring_x[slot]
            block = np.block([[out, cross], [cross.T, ring_o[slot]]])
            pairs[k - tau] = block[np.ix_(order, order)]
        new_x = A @ sigma @ C.T + B @ s_in @ D.T
        ring_x = A @ ring_x
        ring_x[slot] = new_x
        ring_o[slot] = out
        sigma = A @ sigma @ A.T + B @ s_in @ B.T
    return pairs


def single_mode_fidelities(cov_a, cov_b):
    """Squared Uhlmann fidelity between zero-mean single-mode states, elementwise."""
    cov_a = np.asarray(cov_a, dtype=float)
    cov_b = np.asarray(cov_b, dtype=float)
    det = lambda c: c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]
    total = det(cov_a + cov_b)
    delta = 4.0 * np.maximum(det(cov_a) - 0.25, 0.0) * np.maximum(det(cov_b) - 0.25, 0.0)
    return 1.0 / (np.sqrt(total + delta) - np.sqrt(delta))


def two_mode_log_negativities(covs):
    """Log-negativity of two-mode covariances in (q_a, q_b, p_a, p_b) ordering."""
    covs = np.asarray(covs, dtype=float)
    a = covs[..., [0, 2], :][..., :, [0, 2]]
    b = covs[..., [1, 3], :][..., :, [1, 3]]
    g = covs[..., [0, 2], :][..., :, [1, 3]]
    det2 = lambda c: c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]
    seralian = det2(a) + det2(b) - 2.0 * det2(g)
    full = np.linalg.det(covs)
    nu_sq = 0.5 * (seralian - np.sqrt(np.maximum(seralian**2 - 4.0 * full, 0.0)))
    nu = np.sqrt(np.maximum(nu_sq, 1e-300))
    return np.maximum(0.0, -np.log(2.0 * nu))


def propagator_blocks(lam, q, n, dt):
    """Blocks ``(A, B, C, D)`` of ``exp(dt [[0, I], [-V, 0]])`` from ``V = q diag(lam) q^T``.

    The first ``n`` nodes form the reservoir group, the rest the input group.
    """
    w = np.sqrt(lam)
    c, s = np.cos(w * dt), np.sin(w * dt)
    cos_b = (q * c) @ q.T
    sinc_b = (q * (s / w)) @ q.T
    wsin_b = (q * (s * w)) @ q.T
    k = q.shape[0]
    r, i = slice(0, n), slice(n, k)

    def block(rows, cols):
        return np.block([[cos_b[rows, cols], sinc_b[rows, cols]], [-wsin_b[rows, cols], cos_b[rows, cols]]])

    return block(r, r), block(r, i), block(i, r), block(i, i)
