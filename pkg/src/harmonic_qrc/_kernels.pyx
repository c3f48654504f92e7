# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled covariance-recursion kernels; see ``_kernels_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fmax, cos, sin

cnp.import_array()


cdef inline void matmul(const double* a, const double* b, double* c,
                        Py_ssize_t n, Py_ssize_t k, Py_ssize_t m) noexcept nogil:
    # c[n,m] = a[n,k] @ b[k,m]
    cdef Py_ssize_t i, j, l
    cdef double aval
    for i in range(n * m):
        c[i] = 0.0
    for i in range(n):
        for l in range(k):
            aval = a[i * k + l]
            if aval != 0.0:
                for j in range(m):
                    c[i * m + j] += aval * b[l * m + j]


cdef inline void matmul_bt(const double* a, const double* b, double* c,
                           Py_ssize_t n, Py_ssize_t k, Py_ssize_t m) noexcept nogil:
    # c[n,m] = a[n,k] @ b[m,k]^T
    cdef Py_ssize_t i, j, l
    cdef double acc
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for l in range(k):
                acc += a[i * k + l] * b[j * k + l]
            c[i * m + j] = acc


cdef inline void sandwich_add(const double* x, const double* s, double* tmp, double* out,
                              Py_ssize_t n, Py_ssize_t k, bint accumulate) noexcept nogil:
    # out[n,n] (+)= x[n,k] s[k,k] x^T
    cdef Py_ssize_t i, j, l
    cdef double acc
    matmul(x, s, tmp, n, k, k)
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for l in range(k):
                acc += tmp[i * k + l] * x[j * k + l]
            if accumulate:
                out[i * n + j] += acc
            else:
                out[i * n + j] = acc
            if j != i:
                out[j * n + i] = out[i * n + j]


def _c(arr):
    return np.ascontiguousarray(arr, dtype=np.float64)


def output_covariances(A, B, C, D, sigma0, inputs):
    cdef double[:, ::1] a = _c(A)
    cdef double[:, ::1] b = _c(B)
    cdef double[:, ::1] c = _c(C)
    cdef double[:, ::1] d = _c(D)
    cdef double[:, :, ::1] ins = _c(inputs)
    cdef Py_ssize_t n2 = a.shape[0], m2 = d.shape[0], steps = ins.shape[0], k
    cdef Py_ssize_t big = n2 if n2 > m2 else m2
    sig_arr = _c(sigma0).copy()
    nxt_arr = np.empty((n2, n2))
    outs_arr = np.empty((steps, m2, m2))
    tmp_arr = np.empty(big * big)
    cdef double[:, ::1] sig = sig_arr
    cdef double[:, ::1] nxt = nxt_arr
    cdef double[:, :, ::1] outs = outs_arr
    cdef double[::1] tmp = tmp_arr
    cdef double* sp = &sig[0, 0]
    cdef double* np_ = &nxt[0, 0]
    cdef double* swap
    if steps == 0:
        return outs_arr, sig_arr
    with nogil:
        for k in range(steps):
            sandwich_add(&c[0, 0], sp, &tmp[0], &outs[k, 0, 0], m2, n2, False)
            sandwich_add(&d[0, 0], &ins[k, 0, 0], &tmp[0], &outs[k, 0, 0], m2, m2, True)
            sandwich_add(&a[0, 0], sp, &tmp[0], np_, n2, n2, False)
            sandwich_add(&b[0, 0], &ins[k, 0, 0], &tmp[0], np_, n2, m2, True)
            swap = sp
            sp = np_
            np_ = swap
    final = sig_arr if sp == &sig[0, 0] else nxt_arr
    return outs_arr, final.copy()


def reservoir_covariances(A, B, sigma0, inputs):
    cdef double[:, ::1] a = _c(A)
    cdef double[:, ::1] b = _c(B)
    cdef double[:, :, ::1] ins = _c(inputs)
    cdef Py_ssize_t n2 = a.shape[0], m2 = b.shape[1], steps = ins.shape[0], k
    res_arr = np.empty((steps, n2, n2))
    prev_arr = _c(sigma0).copy()
    tmp_arr = np.empty(n2 * n2 if n2 > m2 else m2 * m2)
    cdef double[:, :, ::1] res = res_arr
    cdef double[:, ::1] prev = prev_arr
    cdef double[::1] tmp = tmp_arr
    cdef double* src
    with nogil:
        for k in range(steps):
            src = &prev[0, 0] if k == 0 else &res[k - 1, 0, 0]
            sandwich_add(&a[0, 0], src, &tmp[0], &res[k, 0, 0], n2, n2, False)
            sandwich_add(&b[0, 0], &ins[k, 0, 0], &tmp[0], &res[k, 0, 0], n2, m2, True)
    return res_arr


def delayed_pair_covariances(A, B, C, D, sigma0, inputs, int tau):
    if tau < 1:
        raise ValueError("tau must be at least 1")
    cdef double[:, ::1] a = _c(A)
    cdef double[:, ::1] b = _c(B)
    cdef double[:, ::1] c = _c(C)
    cdef double[:, ::1] d = _c(D)
    cdef double[:, :, ::1] ins = _c(inputs)
    cdef Py_ssize_t n2 = a.shape[0], m2 = d.shape[0], steps = ins.shape[0]
    cdef Py_ssize_t m = m2 // 2, k, slot, i, j, gi, gj
    cdef Py_ssize_t npairs = steps - tau if steps > tau else 0
    cdef Py_ssize_t big = n2 if n2 > m2 else m2
    sig_arr = _c(sigma0).copy()
    pairs_arr = np.zeros((npairs, 2 * m2, 2 * m2))
    cdef double[:, ::1] sig = sig_arr
    cdef double[:, ::1] nxt = np.empty((n2, n2))
    cdef double[:, :, ::1] ring_x = np.zeros((tau, n2, m2))
    cdef double[:, :, ::1] ring_o = np.zeros((tau, m2, m2))
    cdef double[:, ::1] out = np.empty((m2, m2))
    cdef double[:, ::1] cross = np.empty((m2, m2))
    cdef double[:, ::1] newx = np.empty((n2, m2))
    cdef double[:, ::1] t1 = np.empty((n2, m2))
    cdef double[:, ::1] t2 = np.empty((n2, m2))
    cdef double[::1] tmp = np.empty(big * big)
    cdef double[:, :, ::1] pairs = pairs_arr
    cdef Py_ssize_t[::1] order = np.empty(2 * m2, dtype=np.intp)
    # block layout (new q, new p, old q, old p) -> global (new q, old q, new p, old p)
    for i in range(m):
        order[i] = i
        order[m + i] = m2 + i
        order[2 * m + i] = m + i
        order[3 * m + i] = m2 + m + i
    cdef Py_ssize_t[::1] inv = np.empty(2 * m2, dtype=np.intp)
    for i in range(2 * m2):
        inv[order[i]] = i
    with nogil:
        for k in range(steps):
            slot = k % tau
            sandwich_add(&c[0, 0], &sig[0, 0], &tmp[0], &out[0, 0], m2, n2, False)
            sandwich_add(&d[0, 0], &ins[k, 0, 0], &tmp[0], &out[0, 0], m2, m2, True)
            if k >= tau:
                matmul(&c[0, 0], &ring_x[slot, 0, 0], &cross[0, 0], m2, n2, m2)
                for i in range(m2):
                    for j in range(m2):
                        pairs[k - tau, inv[i], inv[j]] = out[i, j]
                        pairs[k - tau, inv[m2 + i], inv[m2 + j]] = ring_o[slot, i, j]
                        pairs[k - tau, inv[i], inv[m2 + j]] = cross[i, j]
                        pairs[k - tau, inv[m2 + j], inv[i]] = cross[i, j]
            # new_x = A sig C^T + B s D^T
            matmul_bt(&sig[0, 0], &c[0, 0], &t1[0, 0], n2, n2, m2)
            matmul(&a[0, 0], &t1[0, 0], &newx[0, 0], n2, n2, m2)
            matmul_bt(&ins[k, 0, 0], &d[0, 0], &t1[0, 0], m2, m2, m2)
            matmul(&b[0, 0], &t1[0, 0], &t2[0, 0], n2, m2, m2)
            for i in range(n2 * m2):
                (&newx[0, 0])[i] += (&t2[0, 0])[i]
            for j in range(tau):
                if j != slot:
                    matmul(&a[0, 0], &ring_x[j, 0, 0], &t1[0, 0], n2, n2, m2)
                    for i in range(n2 * m2):
                        (&ring_x[j, 0, 0])[i] = (&t1[0, 0])[i]
            for i in range(n2 * m2):
                (&ring_x[slot, 0, 0])[i] = (&newx[0, 0])[i]
            for i in range(m2 * m2):
                (&ring_o[slot, 0, 0])[i] = (&out[0, 0])[i]
            sandwich_add(&a[0, 0], &sig[0, 0], &tmp[0], &nxt[0, 0], n2, n2, False)
            sandwich_add(&b[0, 0], &ins[k, 0, 0], &tmp[0], &nxt[0, 0], n2, m2, True)
            for i in range(n2 * n2):
                (&sig[0, 0])[i] = (&nxt[0, 0])[i]
    return pairs_arr


def single_mode_fidelities(cov_a, cov_b):
    cdef double[:, :, ::1] x = _c(np.reshape(cov_a, (-1, 2, 2)))
    cdef double[:, :, ::1] y = _c(np.reshape(cov_b, (-1, 2, 2)))
    cdef Py_ssize_t t, steps = x.shape[0]
    res_arr = np.empty(steps)
    cdef double[::1] res = res_arr
    cdef double da, db, tot, delta
    with nogil:
        for t in range(steps):
            da = x[t, 0, 0] * x[t, 1, 1] - x[t, 0, 1] * x[t, 1, 0]
            db = y[t, 0, 0] * y[t, 1, 1] - y[t, 0, 1] * y[t, 1, 0]
            tot = ((x[t, 0, 0] + y[t, 0, 0]) * (x[t, 1, 1] + y[t, 1, 1])
                   - (x[t, 0, 1] + y[t, 0, 1]) * (x[t, 1, 0] + y[t, 1, 0]))
            delta = 4.0 * fmax(da - 0.25, 0.0) * fmax(db - 0.25, 0.0)
            res[t] = 1.0 / (sqrt(tot + delta) - sqrt(delta))
    return res_arr.reshape(np.shape(cov_a)[:-2])


cdef inline double det4(double[:, :, ::1] m, Py_ssize_t t) noexcept nogil:
    cdef double s0, s1, s2, s3, s4, s5, c0, c1, c2, c3, c4, c5
    s0 = m[t, 0, 0] * m[t, 1, 1] - m[t, 1, 0] * m[t, 0, 1]
    s1 = m[t, 0, 0] * m[t, 1, 2] - m[t, 1, 0] * m[t, 0, 2]
    s2 = m[t, 0, 0] * m[t, 1, 3] - m[t, 1, 0] * m[t, 0, 3]
    s3 = m[t, 0, 1] * m[t, 1, 2] - m[t, 1, 1] * m[t, 0, 2]
    s4 = m[t, 0, 1] * m[t, 1, 3] - m[t, 1, 1] * m[t, 0, 3]
    s5 = m[t, 0, 2] * m[t, 1, 3] - m[t, 1, 2] * m[t, 0, 3]
    c5 = m[t, 2, 2] * m[t, 3, 3] - m[t, 3, 2] * m[t, 2, 3]
    c4 = m[t, 2, 1] * m[t, 3, 3] - m[t, 3, 1] * m[t, 2, 3]
    c3 = m[t, 2, 1] * m[t, 3, 2] - m[t, 3, 1] * m[t, 2, 2]
    c2 = m[t, 2, 0] * m[t, 3, 3] - m[t, 3, 0] * m[t, 2, 3]
    c1 = m[t, 2, 0] * m[t, 3, 2] - m[t, 3, 0] * m[t, 2, 2]
    c0 = m[t, 2, 0] * m[t, 3, 1] - m[t, 3, 0] * m[t, 2, 1]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


def two_mode_log_negativities(covs):
    cdef double[:, :, ::1] x = _c(np.reshape(covs, (-1, 4, 4)))
    cdef Py_ssize_t t, steps = x.shape[0]
    res_arr = np.empty(steps)
    cdef double[::1] res = res_arr
    cdef double da, db, dg, ser, full, disc, nu_sq, val
    with nogil:
        for t in range(steps):
            da = x[t, 0, 0] * x[t, 2, 2] - x[t, 0, 2] * x[t, 2, 0]
            db = x[t, 1, 1] * x[t, 3, 3] - x[t, 1, 3] * x[t, 3, 1]
            dg = x[t, 0, 1] * x[t, 2, 3] - x[t, 0, 3] * x[t, 2, 1]
            ser = da + db - 2.0 * dg
            full = det4(x, t)
            disc = fmax(ser * ser - 4.0 * full, 0.0)
            nu_sq = 0.5 * (ser - sqrt(disc))
            if nu_sq < 1e-300:
                nu_sq = 1e-300
            val = -log(2.0 * sqrt(nu_sq))
            res[t] = val if val > 0.0 else 0.0
    return res_arr.reshape(np.shape(covs)[:-2])


def propagator_blocks(lam, q, int n, double dt):
    cdef double[::1] lv = _c(lam)
    cdef double[:, ::1] qv = _c(q)
    cdef Py_ssize_t k = qv.shape[0], m = k - n, i, j, l
    cdef double[::1] cw = np.empty(k)
    cdef double[::1] sw = np.empty(k)
    cdef double[::1] ws = np.empty(k)
    cdef double w, x, ci, si, wi
    for l in range(k):
        w = sqrt(lv[l])
        x = w * dt
        cw[l] = cos(x)
        sw[l] = sin(x) / w
        ws[l] = sin(x) * w
    a_arr = np.empty((2 * n, 2 * n))
    b_arr = np.empty((2 * n, 2 * m))
    c_arr = np.empty((2 * m, 2 * n))
    d_arr = np.empty((2 * m, 2 * m))
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] b = b_arr
    cdef double[:, ::1] c = c_arr
    cdef double[:, ::1] d = d_arr
    cdef Py_ssize_t ri, rj
    with nogil:
        for i in range(k):
            for j in range(k):
                ci = 0.0
                si = 0.0
                wi = 0.0
                for l in range(k):
                    x = qv[i, l] * qv[j, l]
                    ci += x * cw[l]
                    si += x * sw[l]
                    wi += x * ws[l]
                if i < n and j < n:
                    a[i, j] = ci
                    a[n + i, n + j] = ci
                    a[i, n + j] = si
                    a[n + i, j] = -wi
                elif i < n:
                    rj = j - n
                    b[i, rj] = ci
                    b[n + i, m + rj] = ci
                    b[i, m + rj] = si
                    b[n + i, rj] = -wi
                elif j < n:
                    ri = i - n
                    c[ri, j] = ci
                    c[m + ri, n + j] = ci
                    c[ri, n + j] = si
                    c[m + ri, j] = -wi
                else:
                    ri = i - n
                    rj = j - n
                    d[ri, rj] = ci
                    d[m + ri, m + rj] = ci
                    d[ri, m + rj] = si
                    d[m + ri, rj] = -wi
    return a_arr, b_arr, c_arr, d_arr
