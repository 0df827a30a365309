"""Pure numpy stepping kernels.

These work for any vector field on a product of simplices and double as
the fallback for the compiled tensor-game kernel in ``_kernels.pyx``.
States are flat arrays; ``offsets`` holds block boundaries, so player
``j`` owns ``x[offsets[j]:offsets[j + 1]]``.
"""
import numpy as np

from .game import all_gradients, project_vector

EULER, IMPLICIT, RK4 = 0, 1, 2


def project_blocks(v, offsets):
    out = np.empty_like(v)
    for a, b in zip(offsets[:-1], offsets[1:]):
        out[a:b] = project_vector(v[a:b])
    return out


def tangent(g, offsets):
    t = np.empty_like(g)
    for a, b in zip(offsets[:-1], offsets[1:]):
        t[a:b] = g[a:b] - g[a:b].mean()
    return t


def euler_step(field, x, h, offsets):
    return project_blocks(x - h * field(x), offsets)


def implicit_step(field, x, h, offsets, tol, max_iter):
    """Fixed-point iteration for ``y = P(x - h field(y))`` started at ``x``.

    Returns ``(y, residual, converged)``.
    """
    y = x.copy()
    residual = np.inf
    for _ in range(max_iter):
        y_new = project_blocks(x - h * field(y), offsets)
        residual = float(np.max(np.abs(y_new - y)))
        y = y_new
        if residual < tol:
            return y, residual, True
    return y, residual, False


def rk4_step(field, x, h, offsets, margin):
    """RK4 on the tangent field; returns ``(y, fell_back)``."""
    if np.any(x < margin):
        return euler_step(field, x, h, offsets), True

    def rate(z):
        return -tangent(field(z), offsets)

    k1 = rate(x)
    z = x + 0.5 * h * k1
    if np.any(z < margin):
        return euler_step(field, x, h, offsets), True
    k2 = rate(z)
    z = x + 0.5 * h * k2
    if np.any(z < margin):
        return euler_step(field, x, h, offsets), True
    k3 = rate(z)
    z = x + h * k3
    if np.any(z < margin):
        return euler_step(field, x, h, offsets), True
    k4 = rate(z)
    y = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if np.any(y < margin):
        return euler_step(field, x, h, offsets), True
    for a, b in zip(offsets[:-1], offsets[1:]):
        y[a:b] /= y[a:b].sum()
    return y, False


def advance(field, scheme, x, integral, offsets, h, n_steps, inner_tol, inner_max, margin):
    """Take ``n_steps`` steps, updating ``x`` and the trapezoid ``integral`` in place.

    Returns ``(fallback_steps, nonconverged_steps, max_inner_residual)``.
    """
    fallbacks = 0
    nonconverged = 0
    max_res = 0.0
    for _ in range(n_steps):
        if scheme == EULER:
            y = euler_step(field, x, h, offsets)
        elif scheme == IMPLICIT:
            y, res, ok = implicit_step(field, x, h, offsets, inner_tol, inner_max)
            max_res = max(max_res, res)
            nonconverged += not ok
        elif scheme == RK4:
            y, flag = rk4_step(field, x, h, offsets, margin)
            fallbacks += flag
        else:
            raise ValueError(f"unknown scheme code {scheme}")
        integral += 0.5 * h * (x + y)
        x[:] = y
    return fallbacks, nonconverged, max_res


def tensor_field(costs, dims):
    """Stacked own-cost gradients of a tensor game as a flat-array map."""
    dims = tuple(int(m) for m in dims)
    tensors = [np.asarray(c).reshape(dims) for c in costs]
    cuts = np.cumsum(dims)[:-1]

    def field(x):
        return np.concatenate(all_gradients(tensors, np.split(x, cuts)))

    return field


def advance_tensor(costs, dims, scheme, x, integral, h, n_steps, inner_tol, inner_max, margin):
    offsets = np.concatenate([[0], np.cumsum(dims)]).astype(np.intp)
    field = tensor_field(costs, dims)
    return advance(field, scheme, x, integral, offsets, h, n_steps, inner_tol, inner_max, margin)
