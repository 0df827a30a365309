"""Monte Carlo checks of the standard Gaussian measure on functions over m points.

A function on ``m`` points is a coefficient vector ``x``; under the measure
its coordinates are i.i.d. standard normal. A signed measure
``sum_j c_j delta_j`` acts on ``x`` as ``c . x``. The estimators below check
that the induced L2 inner product is the dot product of coefficients, that
the pushforward along ``c`` is ``N(0, |c|^2)``, and that the duality map
sending a measure to ``∫ x <c, x> dγ(x)`` is the identity on coordinates.

Samples come from numpy's PCG64 bit generator with its ziggurat normal
transform (``Generator.standard_normal``); both are fixed algorithms, so a
seed reproduces the same table on every platform.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

SIGMAS = 4.0


def sample_gamma(m: int, n: int, seed: int) -> np.ndarray:
    """``(n, m)`` table of independent standard normals."""
    if m < 1 or n < 1:
        raise InvalidInputError("m and n must be positive")
    return np.random.Generator(np.random.PCG64(seed)).standard_normal((n, m))


def _coeffs(c, m=None) -> np.ndarray:
    c = np.asarray(c, dtype=float).reshape(-1)
    if not np.all(np.isfinite(c)):
        raise InvalidInputError("coefficients must be finite")
    if m is not None and c.size != m:
        raise InvalidInputError(f"coefficient vector has length {c.size}, samples have {m} columns")
    return c


def estimate_inner(mu, nu, samples: np.ndarray) -> float:
    """Sample mean of ``(mu . x)(nu . x)`` over the rows ``x``."""
    mu = _coeffs(mu, samples.shape[1])
    nu = _coeffs(nu, samples.shape[1])
    return float(np.mean((samples @ mu) * (samples @ nu)))


def inner_tolerance(mu, nu, n: int, sigmas: float = SIGMAS) -> float:
    """``sigmas`` standard errors of :func:`estimate_inner` with ``n`` rows.

    For jointly Gaussian ``a = mu . x``, ``b = nu . x``:
    ``Var(ab) = |mu|^2 |nu|^2 + (mu . nu)^2``.
    """
    mu, nu = _coeffs(mu), _coeffs(nu)
    var = (mu @ mu) * (nu @ nu) + (mu @ nu) ** 2
    return sigmas * math.sqrt(var / n)


def pushforward_variance(c, samples: np.ndarray) -> float:
    """Sample variance of ``c . x``; estimates ``|c|^2``."""
    c = _coeffs(c, samples.shape[1])
    if not np.any(c):
        raise DegenerateInputError("the zero functional has a degenerate pushforward")
    return float(np.var(samples @ c, ddof=1))


def variance_tolerance(c, n: int, sigmas: float = SIGMAS) -> float:
    """``sigmas`` standard errors of the sample variance: ``sqrt(2 / n) |c|^2``."""
    c = _coeffs(c)
    return sigmas * math.sqrt(2.0 / n) * float(c @ c)


def jay_map(nu) -> np.ndarray:
    """Duality map in coordinates: the measure's coefficients read as a function."""
    return _coeffs(nu).copy()


def duality_pairing(mu, f) -> float:
    """``<mu, f> = sum_j mu_j f(s_j)``."""
    return float(_coeffs(mu) @ _coeffs(f))


def estimate_jay(nu, samples: np.ndarray) -> np.ndarray:
    """Monte Carlo value of ``∫ x (nu . x) dγ(x)``; per-coordinate error ``sqrt((|nu|^2 + nu_k^2)/n)``."""
    nu = _coeffs(nu, samples.shape[1])
    return (samples * (samples @ nu)[:, None]).mean(axis=0)


def jay_tolerance(nu, n: int, sigmas: float = SIGMAS) -> np.ndarray:
    nu = _coeffs(nu)
    return sigmas * np.sqrt((nu @ nu + nu**2) / n)
