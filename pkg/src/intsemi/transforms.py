"""Laplace transform of traces, contour inversion of resolvents, Post-Widder inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _quad
from .core_ops import AdmissibilityError, DiagRank1, FamilyError, resolvent_derivative
from .fracint import TimeTrace, TraceError


class ContourError(ValueError):
    pass


@dataclass(frozen=True)
class ContourSpec:
    """A path from ``inf e^{-i(phi+pi/2)}`` to ``inf e^{i(phi+pi/2)}``.

    ``shape="sector"``: two rays from the vertex ``omega_prime``.
    ``shape="vertical"``: the segment ``omega_prime + i[-height, height]``
    continued by two rays of the same angles from its end points.
    ``R`` truncates the rays; ``None`` lets :func:`contour_invert` choose it
    from the tail bound.
    """

    omega_prime: float
    phi: float
    R: float | None = None
    n_nodes: int = 16
    shape: str = "sector"
    height: float = 1.0
    tol: float = 1e-13

    def __post_init__(self):
        if self.shape not in ("sector", "vertical"):
            raise ContourError(f"unknown contour shape {self.shape!r}")
        if not 0 < self.phi < math.pi / 2:
            raise ContourError(f"phi={self.phi} must lie in (0, pi/2)")


def default_contour(family, z, shape="sector") -> ContourSpec:
    """Admissible contour for all points in ``z``: |arg z| < phi < pi/2.

    The vertex sits ``min(1, 1/max|z|)`` right of ``max(omega, 0)`` so that
    ``e^{lam z}`` near the vertex stays O(1) and no cancellation is needed.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    amax = float(np.max(np.abs(np.angle(z))))
    if amax >= math.pi / 2:
        raise AdmissibilityError("contour inversion needs Re z > 0")
    phi = 0.5 * (amax + min(family.theta, math.pi / 2))
    omega_prime = max(family.omega, 0.0) + min(1.0, 1.0 / float(np.max(np.abs(z))))
    return ContourSpec(omega_prime=omega_prime, phi=phi, shape=shape,
                       height=1.0 + abs(omega_prime))


def _check_admissible(family, contour: ContourSpec, z):
    amax = float(np.max(np.abs(np.angle(z))))
    if not amax < contour.phi < family.theta:
        raise AdmissibilityError(
            f"contour angle phi={contour.phi:.4f} must satisfy |arg z|={amax:.4f} < phi < theta={family.theta:.4f}")
    if contour.omega_prime <= max(family.omega, 0.0):
        raise AdmissibilityError("contour vertex must lie right of max(omega, 0)")
    spectrum = getattr(family, "eigenvalues", None)
    if spectrum is not None:
        for e in spectrum:
            if not _enclosed(contour, complex(e)):
                raise AdmissibilityError(f"eigenvalue {e} lies outside the region enclosed by the contour")


def _enclosed(contour, e) -> bool:
    """True when ``e`` lies strictly left of the (untruncated) contour."""
    theta = contour.phi + math.pi / 2
    if contour.shape == "sector":
        return abs(np.angle(e - contour.omega_prime)) > theta
    h = contour.height
    if abs(e.imag) <= h:
        return e.real < contour.omega_prime
    v = complex(contour.omega_prime, math.copysign(h, e.imag))
    return abs(np.angle(e - v)) > theta


def _vertices(contour):
    if contour.shape == "sector":
        return [complex(contour.omega_prime)]
    return [complex(contour.omega_prime, -contour.height), complex(contour.omega_prime, contour.height)]


def _ray_nodes(rho_max, width, n, rho_start, gap):
    """Parameter nodes on [0, rho_max].

    Panels grow geometrically from ``rho_start``; a panel never exceeds
    ``2 rho sin(gap)`` (the distance from the ray to the negative axis, where
    the spectrum may sit) nor ``width`` (oscillation scale of e^{lam z}).
    """
    grow = min(0.5, 2.0 * math.sin(gap))
    edges = [0.0, min(rho_start, rho_max)]
    while edges[-1] < rho_max:
        e = edges[-1]
        if grow * e >= width:
            n_uni = int(math.ceil((rho_max - e) / width))
            edges.extend(np.linspace(e, rho_max, n_uni + 1)[1:])
            break
        edges.append(min(e * (1.0 + grow), rho_max))
    return _quad.composite_legendre(np.array(edges), n)


def _segment_edges(h, clearance, width):
    """Panel edges on [-h, h]; a panel at height y spans at most half the distance to the singularities."""
    half = [0.0]
    while half[-1] < h:
        y = half[-1]
        half.append(min(h, y + min(width, 0.5 * math.hypot(clearance, y))))
    half = np.array(half)
    return np.concatenate((-half[:0:-1], half))


def contour_nodes(contour: ContourSpec, z, sigma, clearance=None):
    """Nodes ``lam_j`` and weights ``w_j`` with ``sum w_j f(lam_j) ~ (1/2 pi i) int_C f``.

    The ray length follows ``|e^{lam z}| <= e^{omega' Re z - rho c}`` with
    ``c = |z| sin(phi - |arg z|)``; the extra ``|lam|^{-sigma}`` factor is
    folded into the tail bound.  ``clearance`` is the distance from the
    vertical segment to the nearest singularity (default ``omega'``).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    absz = np.abs(z)
    c = float(np.min(absz * np.sin(contour.phi - np.abs(np.angle(z)))))
    if c <= 0:
        raise AdmissibilityError("contour does not decay for the requested z")
    theta = contour.phi + math.pi / 2
    re_max = float(np.max(z.real))
    scale = math.exp(contour.omega_prime * re_max) / c
    if contour.R is not None:
        R = contour.R
    else:
        R = _quad.halfline_cutoff(c, power=-(sigma + 1.0) if sigma > -1 else abs(sigma) + 1.0,
                                  prefactor=scale, tol=contour.tol)
        R = max(R, 1.0)
    width = math.pi / float(np.max(absz))
    gap = math.pi / 2 - contour.phi
    rho, w = _ray_nodes(R, width, contour.n_nodes, rho_start=1e-3 * min(1.0, contour.omega_prime), gap=gap)
    lam_parts, w_parts = [], []
    for v in _vertices(contour) if contour.shape == "sector" else []:
        up = np.exp(1j * theta)
        lo = np.exp(-1j * theta)
        lam_parts += [v + rho * lo, v + rho * up]
        w_parts += [-w * lo, w * up]
    if contour.shape == "vertical":
        h = contour.height
        v_lo, v_hi = complex(contour.omega_prime, -h), complex(contour.omega_prime, h)
        clear = abs(contour.omega_prime) if clearance is None else clearance
        y, wy = _quad.composite_legendre(_segment_edges(h, max(clear, 1e-12), width), contour.n_nodes)
        up = np.exp(1j * theta)
        lo = np.exp(-1j * theta)
        lam_parts += [v_lo + rho * lo, contour.omega_prime + 1j * y, v_hi + rho * up]
        w_parts += [-w * lo, 1j * wy, w * up]
    lam = np.concatenate(lam_parts)
    weights = np.concatenate(w_parts) / (2j * math.pi)
    return lam, weights


def _resolvent_block(family, lam, sigma):
    R = family.resolvent(lam)
    pw = lam ** (-sigma)
    if isinstance(R, DiagRank1):
        return R * pw
    return R * pw.reshape((-1,) + (1,) * (R.ndim - 1))


def _contract(kernel, family, lam, sigma, chunk=256):
    """``sum_j kernel[:, j] R(lam_j) lam_j^-sigma`` with fixed chunk order."""
    total = None
    for i in range(0, lam.size, chunk):
        block = _resolvent_block(family, lam[i:i + chunk], sigma)
        k = kernel[:, i:i + chunk]
        if isinstance(block, DiagRank1):
            part = DiagRank1(k @ block.d, k @ block.u)
        else:
            part = np.tensordot(k, block, axes=(1, 0))
        total = part if total is None else total + part
    return total


def contour_invert(family, z, sigma, contour: ContourSpec | None = None):
    """``S_sigma(z) = (1/2 pi i) int_C e^{lam z} R(lam) / lam^sigma dlam``.

    ``z`` may be an array of points in the open right half-plane; they are
    grouped by decade of |z| so each group gets a contour resolved at its
    own scale.  ``sigma = 0`` gives the associated holomorphic semigroup.
    """
    z_arr = np.asarray(z, dtype=complex)
    flat = np.atleast_1d(z_arr).ravel()
    if np.any(flat.real <= 0):
        raise AdmissibilityError("contour inversion needs Re z > 0; use boundary_values on iR")
    if contour is not None:
        _check_admissible(family, contour, flat)
    groups = np.floor(np.log10(np.abs(flat)) * 2).astype(int)
    results = [None] * flat.size
    for g in np.unique(groups):
        idx = np.nonzero(groups == g)[0]
        zg = flat[idx]
        spec = contour or default_contour(family, zg)
        if contour is None:
            _check_admissible(family, spec, zg)
        lam, w = contour_nodes(spec, zg, sigma, clearance=spec.omega_prime - max(family.omega, 0.0))
        kernel = np.exp(np.outer(zg, lam)) * w[None, :]
        out = _contract(kernel, family, lam, sigma)
        for n, i in enumerate(idx):
            results[i] = out[n] if not isinstance(out, DiagRank1) else DiagRank1(out.d[n], out.u[n])
    if z_arr.ndim == 0:
        return results[0]
    if isinstance(results[0], DiagRank1):
        return results
    return np.stack(results).reshape(z_arr.shape + results[0].shape)


def contour_trace(family, sigma, t, contour=None) -> TimeTrace:
    """Trace of ``S_sigma`` on real times built by contour inversion (with evaluator)."""

    def fn(tt):
        tt = np.asarray(tt, dtype=float)
        return contour_invert(family, tt.astype(complex), sigma, contour)

    t = np.asarray(t, dtype=float)
    return TimeTrace(order=max(sigma, 0.0), t=t, values=fn(t), omega=max(family.omega, 0.0),
                     mesh={"type": "given", "source": "contour"}, evaluator=fn,
                     growth=(1.0, max(sigma - family.boundary_threshold, 0.0)))


# ---------------------------------------------------------------------------


def laplace_forward(trace: TimeTrace, lam, kappa, tol=1e-14):
    """``lam^kappa int_0^inf e^{-lam t} S(t) dt``.

    With an evaluator: composite Gauss-Legendre on geometric panels up to the
    cutoff where the growth model ``M t^alpha e^{omega t}`` times
    ``e^{-Re lam t}`` drops below ``tol``.  From samples only: trapezoid on
    the samples plus an exponential tail continued from the last sample.
    """
    lam = complex(lam)
    rate = lam.real - trace.omega
    if rate <= 0:
        raise TraceError(f"Re lambda={lam.real} must exceed the trace growth omega={trace.omega}")
    M, alpha = trace.growth if trace.growth is not None else (1.0, trace.order)
    if trace.evaluator is not None:
        T = _quad.halfline_cutoff(rate, power=alpha, prefactor=M / rate, tol=tol)
        edges = _quad.graded_panels(T, n_panels=40, ratio=1e-10)
        t, w = _quad.composite_legendre(edges, 16)
        vals = np.asarray(trace.evaluator(t))
        wt = (w * np.exp(-lam * t)).reshape((-1,) + (1,) * (vals.ndim - 1))
        integral = _quad.tree_sum(wt * vals, axis=0)
    else:
        t = np.asarray(trace.t, dtype=float)
        vals = np.asarray(trace.values)
        if len(t) < 8:
            raise TraceError("undersampled trace")
        if t[0] > 0:
            first = np.zeros_like(vals[:1]) if trace.order > 0 else vals[:1]
            t = np.concatenate(([0.0], t))
            vals = np.concatenate((first, vals))
        f = vals * np.exp(-lam * t).reshape((-1,) + (1,) * (vals.ndim - 1))
        h = np.diff(t).reshape((-1,) + (1,) * (vals.ndim - 1))
        integral = _quad.tree_sum(0.5 * h * (f[1:] + f[:-1]), axis=0)
        integral = integral + f[-1] / (lam - trace.omega)
    return lam ** kappa * integral


def post_widder(family, t, kappa, n, n_max=512):
    """n-th Post-Widder approximant ``((-1)^n/n!) (n/t)^{n+1} (R(lam)/lam^kappa)^(n)`` at ``lam = n/t``."""
    if not t > 0:
        raise FamilyError("Post-Widder inversion needs t > 0")
    if n < 1 or n > n_max:
        raise FamilyError(f"depth n={n} outside [1, {n_max}]")
    lam = n / t
    log_scale = (n + 1) * math.log(lam) - gammaln(n + 1)
    d = resolvent_derivative(family, lam, n, kappa, n_max=n_max, log_scale=log_scale)
    return d if n % 2 == 0 else -d


def derivative_ladder(family, z, sigma, k, contour=None, n_circle=32):
    """``S_{sigma-k}(z)`` by direct inversion and by differentiating ``S_sigma`` k times.

    The derivative uses the periodic trapezoid rule on the circle of radius
    Re z / 2 around z (a complex finite-difference stencil).  Returns
    ``(direct, differentiated, discrepancy)``.
    """
    z = complex(z)
    direct = contour_invert(family, z, sigma - k, contour)
    if k == 0:
        return direct, direct, 0.0
    r = z.real / 2
    theta = 2 * math.pi * np.arange(n_circle) / n_circle
    pts = z + r * np.exp(1j * theta)
    vals = contour_invert(family, pts, sigma, contour)
    coef = math.factorial(k) / (n_circle * r ** k) * np.exp(-1j * k * theta)
    diff = np.tensordot(coef, vals, axes=(0, 0))
    disc = float(family.norm(diff - direct))
    return direct, diff, disc


__all__ = [
    "ContourSpec", "ContourError", "default_contour", "contour_nodes", "contour_invert",
    "contour_trace", "laplace_forward", "post_widder", "derivative_ladder",
]
