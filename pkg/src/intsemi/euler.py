"""Integrated Euler exponential formula built from powers of ``F(t) = t^-1 R(t^-1)``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import _quad
from .core_ops import DiagRank1, _UpperTriangularFamily


class EulerError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the polynomials P_{n,k}


@dataclass(frozen=True)
class PnkSpec:
    n: int
    k: int

    def __post_init__(self):
        if self.k < 0 or self.n <= self.k:
            raise EulerError(f"P_(n,k) needs n > k >= 0, got n={self.n}, k={self.k}")


def _falling(n, l):
    """``(n-1)! / (n-l-1)!`` as a product of l factors."""
    out = 1.0
    for i in range(1, l + 1):
        out *= n - i
    return out


def pnk_eval(spec: PnkSpec, lam):
    """``sum_l (-1)^l C(k,l) lam^(k-l) (n-1)!/(n-l-1)!``."""
    n, k = spec.n, spec.k
    total = 0.0
    for l in range(k + 1):
        total += (-1) ** l * math.comb(k, l) * lam ** (k - l) * _falling(n, l)
    return total


def verify_pnk_identity(spec: PnkSpec, lam, t, literal=False, dps=40) -> float:
    """Relative residual of ``P_{n,k}(lam t) lam^{n-k-1} e^{-lam t}`` against
    ``(-1)^k d^k/dlam^k (lam^{n-1} e^{-lam t})``.

    The derivative is taken by extended-precision finite differences
    (``mpmath.diff``).  ``literal=True`` drops the ``(-1)^k`` factor; that
    form is off by a sign for odd k.  The residual is normalised by the
    sum of absolute values of the terms of ``P_{n,k}``.
    """
    n, k = spec.n, spec.k
    if not (lam > 0 and t > 0):
        raise EulerError("lambda and t must be positive")
    with mpmath.workdps(dps):
        lam_m, t_m = mpmath.mpf(lam), mpmath.mpf(t)
        deriv = mpmath.diff(lambda l: l ** (n - 1) * mpmath.exp(-l * t_m), lam_m, k)
        sign = 1 if literal else (-1) ** k
        x = lam_m * t_m
        terms = [(-1) ** l * math.comb(k, l) * x ** (k - l) * _falling(n, l) for l in range(k + 1)]
        factor = lam_m ** (n - k - 1) * mpmath.exp(-lam_m * t_m)
        lhs = mpmath.fsum(terms) * factor
        scale = mpmath.fsum(abs(v) for v in terms) * factor
        return float(abs(lhs - sign * deriv) / scale)


# ---------------------------------------------------------------------------
# Euler powers


def _binary_power(family, F, n):
    result, base = None, F
    while n:
        if n & 1:
            result = base if result is None else family.compose(result, base)
        n >>= 1
        if n:
            base = family.compose(base, base)
    return result


def euler_power(family, tau, n):
    """``[(n/tau) R(n/tau)]^n`` for a scalar tau or an array of tau.

    Multiplication families use the closed form
    ``(pI + qN)^n = p^n I + n p^(n-1) q N``, finite matrices use
    ``numpy.linalg.matrix_power`` and the C[0,1] family binary powers.
    """
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr <= 0):
        raise EulerError("tau must be positive")
    if n < 1:
        raise EulerError("n must be a positive integer")
    lam = n / tau_arr
    if np.any(lam <= max(family.omega, 0.0)):
        raise EulerError("n/tau must lie in the resolvent half-line")
    R = family.resolvent(lam.astype(complex))
    if isinstance(R, DiagRank1):
        lam_b = lam[..., None]
        F = DiagRank1(R.d * lam_b, R.u * lam_b)
        out = _binary_power(family, F, n)
        big = np.max(np.abs(out.d) + np.abs(out.u))
    elif isinstance(family, _UpperTriangularFamily):
        F = R * lam.reshape(lam.shape + (1, 1, 1))
        p = F[..., 0, 0]
        out_d = p ** n
        if family.shape[1] == 2:
            q = F[..., 0, 1]
            out = family._assemble(out_d, n * p ** (n - 1) * q)
        else:
            out = out_d[..., None, None]
        big = np.max(np.abs(out))
    else:
        F = R * lam.reshape(lam.shape + (1, 1, 1))
        out = np.linalg.matrix_power(F, n)
        big = np.max(np.abs(out))
    if not big < 1e300:
        raise EulerError("Euler power overflowed (norm above 1e300)")
    return out


def default_alpha(family, k):
    """Origin exponent of ``S_k``: ``k`` minus the blow-up exponent of ``||T(t)||`` at 0."""
    b = family.sector_exponents[1]
    return k - max(b, 0.0)


def origin_slope(family, n, t0, alpha=None, k=1) -> float:
    """Empirical log-log slope of ``||F(tau/n)^n||`` for tau in t0 [1e-3, 1e-2]."""
    tau = t0 * np.geomspace(1e-3, 1e-2, 5)
    norms = np.atleast_1d(family.norm(euler_power(family, tau, n)))
    return float(np.polyfit(np.log(tau), np.log(norms), 1)[0])


def integrated_euler(family, t0, k, n, alpha=None, n_panels=30, n_nodes=16, check=True):
    """``int_0^t0 (t0-tau)^(k-1)/(k-1)! F(tau/n)^n dtau``.

    The substitution ``tau = t0 u^gamma`` with ``gamma = 1/(alpha-k+1)``
    turns the ``tau^(alpha-k)`` singularity into a bounded integrand, which
    is then integrated by Gauss-Legendre on geometric panels in u.
    """
    k = int(k)
    if k < 1:
        raise EulerError("k must be a positive integer")
    alpha = default_alpha(family, k) if alpha is None else float(alpha)
    if not k - 1 < alpha <= k:
        raise EulerError(f"alpha={alpha} must satisfy k-1 < alpha <= k")
    if n <= k:
        raise EulerError("need n > k")
    if check:
        slope = origin_slope(family, n, t0)
        if slope <= -1:
            raise EulerError(f"Euler powers blow up like tau^{slope:.3f} at 0; not integrable")
    gam = 1.0 / (alpha - k + 1.0)
    edges = np.concatenate(([0.0], np.geomspace(1e-6, 1.0, n_panels)))
    u, w = _quad.composite_legendre(edges, n_nodes)
    tau = t0 * u ** gam
    jac = t0 * gam * u ** (gam - 1.0)
    kern = (t0 - tau) ** (k - 1) / math.factorial(k - 1)
    weights = w * jac * kern
    total = None
    for i in range(0, tau.size, 64):
        E = euler_power(family, tau[i:i + 64], n)
        wi = weights[i:i + 64]
        if isinstance(E, DiagRank1):
            part = DiagRank1(wi @ E.d, wi @ E.u)
        else:
            part = np.tensordot(wi, E, axes=(0, 0))
        total = part if total is None else total + part
    return total


@dataclass
class EulerRun:
    t0: float
    k: int
    alpha: float
    n_list: list
    approximants: list
    reference: object
    errors: list
    runtimes: list = field(default_factory=list)
    reference_method: str = "closed"

    def __post_init__(self):
        if not self.k - 1 < self.alpha <= self.k:
            raise EulerError("alpha must satisfy k-1 < alpha <= k")

    @property
    def decreasing(self) -> bool:
        e = np.asarray(self.errors)
        return bool(np.all(np.diff(e) < 0))

    def csv_rows(self):
        return [(n, e, r) for n, e, r in zip(self.n_list, self.errors, self.runtimes)]


def reference_value(family, t0, k, method="closed"):
    """``S_k(t0)`` by the closed form or by contour inversion (independent of Euler)."""
    if method == "closed":
        return family.integrated(complex(t0), k)
    if method == "contour":
        from .transforms import ContourSpec, contour_invert, default_contour

        spec = default_contour(family, [complex(t0)])
        spec = ContourSpec(spec.omega_prime, spec.phi, n_nodes=spec.n_nodes, tol=1e-14)
        return contour_invert(family, complex(t0), k, spec)
    raise EulerError(f"unknown reference method {method!r}")


def euler_convergence_study(family, t0, k, n_list, reference_method="closed", alpha=None) -> EulerRun:
    """Errors ``||integrated_euler(n) - S_k(t0)||`` over ``n_list``."""
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise EulerError("n_list must be increasing")
    alpha = default_alpha(family, k) if alpha is None else float(alpha)
    ref = reference_value(family, t0, k, reference_method)
    approx, errors, times = [], [], []
    for n in n_list:
        t_start = time.perf_counter()
        a = integrated_euler(family, t0, k, n, alpha)
        times.append(time.perf_counter() - t_start)
        approx.append(a)
        errors.append(float(family.norm(a - ref)))
    return EulerRun(t0=float(t0), k=int(k), alpha=alpha, n_list=n_list, approximants=approx,
                    reference=ref, errors=errors, runtimes=times, reference_method=reference_method)


__all__ = [
    "PnkSpec", "pnk_eval", "verify_pnk_identity", "euler_power", "integrated_euler", "EulerRun",
    "euler_convergence_study", "reference_value", "origin_slope", "default_alpha", "EulerError",
]
