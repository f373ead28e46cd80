"""Quadrature rules shared by the transform, fractional-integral and Euler code."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = leggauss(n)
    return x, w


@lru_cache(maxsize=256)
def _jacobi(n: int, a: float, b: float):
    return roots_jacobi(n, a, b)


def gauss_legendre(a, b, n=16):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_legendre(edges, n=16):
    """Gauss-Legendre rule of order ``n`` on every panel ``[edges[i], edges[i+1]]``.

    Panels are emitted in order, so summing ``w * f(x)`` is deterministic.
    """
    edges = np.asarray(edges)
    x, w = _leggauss(n)
    a = edges[:-1, None]
    half = 0.5 * (edges[1:, None] - a)
    nodes = a + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def gauss_jacobi01(n, a, b):
    """Rule for ``int_0^1 (1-s)^a s^b f(s) ds`` (requires a, b > -1)."""
    x, w = _jacobi(n, float(a), float(b))
    scale = 2.0 ** (-(a + b + 1.0))
    return 0.5 * (x + 1.0), w * scale


def graded_panels(T, n_panels=40, ratio=1e-10):
    """Panel edges on [0, T]: one panel [0, T*ratio] then geometric growth to T.

    Geometric panels resolve algebraic behaviour t^a at the origin.
    """
    inner = np.geomspace(T * ratio, T, n_panels)
    return np.concatenate(([0.0], inner))


def halfline_cutoff(rate, power=0.0, prefactor=1.0, tol=1e-14):
    """Smallest T with ``prefactor * T**power * exp(-rate*T) < tol``.

    ``rate`` must be positive.  Solved by a short fixed-point iteration.
    """
    if rate <= 0:
        raise ValueError("decay rate must be positive")
    T = max(1.0, np.log(max(prefactor, 1e-300) / tol) / rate)
    for _ in range(60):
        T_new = (np.log(max(prefactor, 1e-300) / tol) + power * np.log(max(T, 1e-300))) / rate
        T_new = max(T_new, 1e-12)
        if abs(T_new - T) <= 1e-12 * T:
            break
        T = T_new
    return float(T)


def tree_sum(values, axis=0):
    """Pairwise (tree) reduction along ``axis``; fixed order, so reproducible."""
    v = np.moveaxis(np.asarray(values), axis, 0)
    while v.shape[0] > 1:
        if v.shape[0] % 2:
            v = np.concatenate((v[:-2], (v[-2] + v[-1])[None]), axis=0)
        v = v[0::2] + v[1::2]
    return v[0]
