# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping loop for tensor games.

Mirrors ``_fallback.advance_tensor`` step for step. Gradients of all players
are produced in one sweep over the joint actions using prefix/suffix
products of the other players' probabilities.
"""
import numpy as np

cdef int EULER = 0
cdef int IMPLICIT = 1
cdef int RK4 = 2


cdef void _gradients(const double[:, ::1] costs, const Py_ssize_t[::1] dims,
                     const Py_ssize_t[::1] offs, const double* x, double* g,
                     Py_ssize_t* idx, double* pre, double* suf) noexcept nogil:
    cdef Py_ssize_t n = dims.shape[0]
    cdef Py_ssize_t total = costs.shape[1]
    cdef Py_ssize_t d = offs[n]
    cdef Py_ssize_t i, j, p
    for i in range(d):
        g[i] = 0.0
    for i in range(n):
        idx[i] = 0
    for p in range(total):
        pre[0] = 1.0
        for i in range(n):
            pre[i + 1] = pre[i] * x[offs[i] + idx[i]]
        suf[n] = 1.0
        for i in range(n - 1, -1, -1):
            suf[i] = suf[i + 1] * x[offs[i] + idx[i]]
        for j in range(n):
            g[offs[j] + idx[j]] += costs[j, p] * pre[j] * suf[j + 1]
        i = n - 1
        while i >= 0:
            idx[i] += 1
            if idx[i] < dims[i]:
                break
            idx[i] = 0
            i -= 1


cdef void _project(const double* v, double* out, Py_ssize_t m, double* buf) noexcept nogil:
    """Simplex projection of one block; ``buf`` needs room for ``m`` doubles."""
    cdef Py_ssize_t k, q
    cdef double key, css, tau, total
    for k in range(m):
        buf[k] = v[k]
    # insertion sort, descending; stable for equal keys
    for k in range(1, m):
        key = buf[k]
        q = k - 1
        while q >= 0 and buf[q] < key:
            buf[q + 1] = buf[q]
            q -= 1
        buf[q + 1] = key
    css = 0.0
    tau = 0.0
    for k in range(m):
        css += buf[k]
        if buf[k] * (k + 1) > css - 1.0:
            tau = (css - 1.0) / (k + 1)
    total = 0.0
    for k in range(m):
        out[k] = v[k] - tau
        if out[k] < 0.0:
            out[k] = 0.0
        total += out[k]
    for k in range(m):
        out[k] = out[k] / total


cdef void _project_all(const double* v, double* out, const Py_ssize_t[::1] offs,
                       Py_ssize_t n, double* buf) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(n):
        _project(v + offs[j], out + offs[j], offs[j + 1] - offs[j], buf)


cdef void _neg_tangent(double* g, const Py_ssize_t[::1] offs, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j, k
    cdef double mean
    for j in range(n):
        mean = 0.0
        for k in range(offs[j], offs[j + 1]):
            mean += g[k]
        mean /= offs[j + 1] - offs[j]
        for k in range(offs[j], offs[j + 1]):
            g[k] = -(g[k] - mean)


cdef bint _below(const double* z, Py_ssize_t d, double margin) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(d):
        if z[k] < margin:
            return True
    return False


def advance_tensor(const double[:, ::1] costs, const Py_ssize_t[::1] dims, int scheme,
                   double[::1] x, double[::1] integral, double h, Py_ssize_t n_steps,
                   double inner_tol, Py_ssize_t inner_max, double margin):
    """Take ``n_steps`` steps in place; see ``_fallback.advance`` for the contract."""
    if scheme not in (EULER, IMPLICIT, RK4):
        raise ValueError(f"unknown scheme code {scheme}")
    cdef Py_ssize_t n = dims.shape[0]
    offs_np = np.zeros(n + 1, dtype=np.intp)
    offs_np[1:] = np.cumsum(dims)
    cdef Py_ssize_t[::1] offs = offs_np
    cdef Py_ssize_t d = offs[n]
    if x.shape[0] != d or integral.shape[0] != d:
        raise ValueError("state length does not match the game")
    cdef Py_ssize_t mmax = 0
    cdef Py_ssize_t j
    for j in range(n):
        if dims[j] > mmax:
            mmax = dims[j]

    cdef double[:, ::1] work = np.zeros((8, d), dtype=np.float64)
    cdef double[::1] buf = np.zeros(mmax, dtype=np.float64)
    cdef Py_ssize_t[::1] idx = np.zeros(n, dtype=np.intp)
    cdef double[::1] pre = np.zeros(n + 1, dtype=np.float64)
    cdef double[::1] suf = np.zeros(n + 1, dtype=np.float64)

    cdef double* xp = &x[0]
    cdef double* ip = &integral[0]
    cdef double* g = &work[0, 0]
    cdef double* y = &work[1, 0]
    cdef double* tmp = &work[2, 0]
    cdef double* ynew = &work[3, 0]
    cdef double* k1 = &work[4, 0]
    cdef double* k2 = &work[5, 0]
    cdef double* k3 = &work[6, 0]
    cdef double* k4 = &work[7, 0]
    cdef double* bp = &buf[0]
    cdef Py_ssize_t* ix = &idx[0]
    cdef double* pr = &pre[0]
    cdef double* sf = &suf[0]

    cdef Py_ssize_t step, it, k
    cdef Py_ssize_t fallbacks = 0
    cdef Py_ssize_t nonconverged = 0
    cdef double max_res = 0.0
    cdef double res, diff, total
    cdef bint done, fell_back

    with nogil:
        for step in range(n_steps):
            if scheme == EULER:
                _gradients(costs, dims, offs, xp, g, ix, pr, sf)
                for k in range(d):
                    tmp[k] = xp[k] - h * g[k]
                _project_all(tmp, y, offs, n, bp)
            elif scheme == IMPLICIT:
                for k in range(d):
                    y[k] = xp[k]
                done = False
                res = 0.0
                for it in range(inner_max):
                    _gradients(costs, dims, offs, y, g, ix, pr, sf)
                    for k in range(d):
                        tmp[k] = xp[k] - h * g[k]
                    _project_all(tmp, ynew, offs, n, bp)
                    res = 0.0
                    for k in range(d):
                        diff = ynew[k] - y[k]
                        if diff < 0.0:
                            diff = -diff
                        if diff > res:
                            res = diff
                        y[k] = ynew[k]
                    if res < inner_tol:
                        done = True
                        break
                if res > max_res:
                    max_res = res
                if not done:
                    nonconverged += 1
            else:
                fell_back = _below(xp, d, margin)
                if not fell_back:
                    _gradients(costs, dims, offs, xp, k1, ix, pr, sf)
                    _neg_tangent(k1, offs, n)
                    for k in range(d):
                        tmp[k] = xp[k] + 0.5 * h * k1[k]
                    fell_back = _below(tmp, d, margin)
                if not fell_back:
                    _gradients(costs, dims, offs, tmp, k2, ix, pr, sf)
                    _neg_tangent(k2, offs, n)
                    for k in range(d):
                        tmp[k] = xp[k] + 0.5 * h * k2[k]
                    fell_back = _below(tmp, d, margin)
                if not fell_back:
                    _gradients(costs, dims, offs, tmp, k3, ix, pr, sf)
                    _neg_tangent(k3, offs, n)
                    for k in range(d):
                        tmp[k] = xp[k] + h * k3[k]
                    fell_back = _below(tmp, d, margin)
                if not fell_back:
                    _gradients(costs, dims, offs, tmp, k4, ix, pr, sf)
                    _neg_tangent(k4, offs, n)
                    for k in range(d):
                        y[k] = xp[k] + (h / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
                    fell_back = _below(y, d, margin)
                if fell_back:
                    fallbacks += 1
                    _gradients(costs, dims, offs, xp, g, ix, pr, sf)
                    for k in range(d):
                        tmp[k] = xp[k] - h * g[k]
                    _project_all(tmp, y, offs, n, bp)
                else:
                    for j in range(n):
                        total = 0.0
                        for k in range(offs[j], offs[j + 1]):
                            total += y[k]
                        for k in range(offs[j], offs[j + 1]):
                            y[k] = y[k] / total
            for k in range(d):
                ip[k] += 0.5 * h * (xp[k] + y[k])
                xp[k] = y[k]
    return fallbacks, nonconverged, max_res
