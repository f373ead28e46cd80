"""Riemann-Liouville fractional integration in time and in the Laplace variable.

Time side:   F(t) = int_0^t (t - tau)^(delta-1) / Gamma(delta) S(tau) dtau
Laplace side: r_a(lam) = int_lam^inf (u - lam)^(a-1) / Gamma(a) r(u) du
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma

from . import _quad
from .core_ops import pointwise_norm


class TraceError(ValueError):
    pass


@dataclass
class TimeTrace:
    """Samples of ``S_sigma`` along a time ray (or a complex path).

    ``values`` has the time axis first.  ``evaluator`` (optional) maps an
    array of times to values of the same layout; when present, integrals are
    computed from it instead of from the stored samples.
    """

    order: float
    t: np.ndarray
    values: np.ndarray
    omega: float = 0.0
    mesh: dict = field(default_factory=lambda: {"type": "uniform"})
    evaluator: Callable | None = None
    #: (M, alpha) of a growth model ||S(t)|| <= M t^alpha e^{omega t}
    growth: tuple[float, float] | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t)
        self.values = np.asarray(self.values)
        if self.order < 0:
            raise TraceError(f"trace order must be >= 0, got {self.order}")
        if self.t.ndim != 1 or self.values.shape[:1] != self.t.shape:
            raise TraceError("values must have the time axis first, matching t")
        key = np.abs(self.t) if np.iscomplexobj(self.t) else self.t
        if np.any(np.diff(key) <= 0):
            raise TraceError("trace times must be strictly increasing along the path")
        if not np.all(np.isfinite(self.values)):
            raise TraceError("trace values must be finite")

    def norms(self, norm=None) -> np.ndarray:
        """Per-sample norms; stacked blocks use the pointwise l1-sum norm."""
        if norm is not None:
            return np.array([norm(v) for v in self.values])
        if self.values.ndim == 1:
            return np.abs(self.values)
        if self.values.ndim >= 4:
            return pointwise_norm(self.values)
        return np.abs(self.values).reshape(len(self.t), -1).max(axis=1)


def graded_mesh(T, n, sigma_eff=1.0):
    """``t_j = T (j/n)^gamma`` for j = 1..n with gamma = max(1, 2/sigma_eff)."""
    g = max(1.0, 2.0 / sigma_eff) if sigma_eff > 0 else 2.0
    return T * (np.arange(1, n + 1) / n) ** g


def trace_from_function(fn, order, t, omega=0.0, growth=None, mesh=None):
    """Sample ``fn`` (vectorised over time) and keep it as the trace evaluator."""
    t = np.asarray(t)
    t = t.astype(complex if np.iscomplexobj(t) else float)
    return TimeTrace(order=order, t=t, values=np.asarray(fn(t)), omega=omega,
                     mesh=mesh or {"type": "given"}, evaluator=fn, growth=growth)


def family_trace(family, order, t, growth=None):
    """Trace of the closed-form integrated semigroup ``S_k`` (integer order)."""
    k = int(order)
    if k != order:
        raise TraceError("closed-form family traces need an integer order")

    def fn(tt):
        return family.integrated(np.asarray(tt, dtype=complex), k)

    return trace_from_function(fn, order, t, omega=max(family.omega, 0.0), growth=growth,
                               mesh={"type": "given", "family": family.kind})


# ---------------------------------------------------------------------------
# time side


def _rl_time_eval(fn, t_out, delta, n_geo=16, n_jac=24, n_gl=10):
    """``int_0^t (t-tau)^(delta-1)/Gamma(delta) fn(tau) dtau`` for each t in t_out.

    Substituting tau = t u: geometric Gauss-Legendre panels on [0, 1/2]
    resolve algebraic behaviour of fn at 0, Gauss-Jacobi on [1/2, 1] absorbs
    the (1-u)^(delta-1) kernel singularity.
    """
    edges = np.concatenate(([0.0], np.geomspace(1e-12, 0.5, n_geo)))
    u_gl, w_gl = _quad.composite_legendre(edges, n_gl)
    w_gl = w_gl * (1.0 - u_gl) ** (delta - 1.0)
    s, w_j = _quad.gauss_jacobi01(n_jac, delta - 1.0, 0.0)
    u_j = 0.5 + 0.5 * s
    w_j = w_j * 0.5 ** delta
    u = np.concatenate((u_gl, u_j))
    w = np.concatenate((w_gl, w_j))
    out = []
    for t in np.atleast_1d(t_out):
        vals = np.asarray(fn(t * u))
        wt = w.reshape((-1,) + (1,) * (vals.ndim - 1))
        out.append(t ** delta / gamma(delta) * _quad.tree_sum(wt * vals, axis=0))
    return np.array(out)


def _product_trapezoid(t, values, delta, order):
    """Product-integration of the kernel against the piecewise-linear interpolant."""
    t = np.asarray(t, dtype=float)
    vals = np.asarray(values)
    if t[0] > 0:
        first = np.zeros_like(vals[:1]) if order > 0 else vals[:1]
        t = np.concatenate(([0.0], t))
        vals = np.concatenate((first, vals), axis=0)
    n = len(t)
    W = np.zeros((n, n))
    for i in range(1, n):
        ti = t[i]
        a, b = t[:i], t[1:i + 1]
        h = b - a
        I0 = ((ti - a) ** delta - (ti - b) ** delta) / delta
        I1 = ((ti - a) ** (delta + 1) - (ti - b) ** (delta + 1)) / (delta + 1)
        left = (I1 - (ti - b) * I0) / h
        right = ((ti - a) * I0 - I1) / h
        W[i, :i] += left
        W[i, 1:i + 1] += right
    W /= gamma(delta)
    flat = vals.reshape(n, -1)
    return (W @ flat).reshape(vals.shape)


def frac_integrate_time(trace: TimeTrace, delta: float) -> TimeTrace:
    """Trace of order ``sigma + delta`` sampled at the same times.

    With an evaluator the integral is computed by weakly singular quadrature
    and the result keeps a (lazy) evaluator; otherwise product integration of
    the linear interpolant of the samples is used.
    """
    if not delta > 0:
        raise TraceError(f"delta must be positive, got {delta}")
    if np.iscomplexobj(trace.t):
        raise TraceError("time-side fractional integration needs a real time ray")
    growth = None
    if trace.growth is not None:
        M, a = trace.growth
        growth = (M * gamma(a + 1) / gamma(a + delta + 1), a + delta)
    mesh = dict(trace.mesh, integrated_by=delta)
    if trace.evaluator is not None:
        fn = trace.evaluator

        def new_fn(tt, fn=fn):
            return _rl_time_eval(fn, np.asarray(tt, dtype=float), delta)

        values = new_fn(trace.t)
        return TimeTrace(trace.order + delta, trace.t.copy(), values, trace.omega, mesh, new_fn, growth)
    if len(trace.t) < 4:
        raise TraceError("too few samples for fractional integration")
    values = _product_trapezoid(trace.t, trace.values, delta, trace.order)
    if trace.t[0] > 0:
        values = values[1:]
    return TimeTrace(trace.order + delta, trace.t.copy(), values, trace.omega, mesh, None, growth)


# ---------------------------------------------------------------------------
# Laplace side


@dataclass
class LambdaFunction:
    """A function of ``lam`` on ``(a, inf)`` with ``||lam^decay r(lam)||`` bounded.

    ``evaluator`` is vectorised: an array of lambdas maps to values with the
    lambda axis first.
    """

    evaluator: Callable
    decay: float
    a: float = 0.0

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        out = np.asarray(self.evaluator(np.atleast_1d(lam_arr)))
        return out[0] if lam_arr.ndim == 0 else out


def check_decay(r: LambdaFunction, lam_max=1e6, n=61, rtol=1e-2) -> bool:
    """Sampled check that ``lam^decay ||r(lam)||`` stays bounded as lam grows.

    Passes when the scaled norm over the last decade never rises more than
    ``rtol`` above its value at the start of that decade.
    """
    lam = np.geomspace(max(r.a, 0.0) + 1.0, lam_max, n)
    vals = np.asarray(r(lam))
    mags = np.abs(vals).reshape(n, -1).max(axis=1) * lam ** r.decay
    if not np.all(np.isfinite(mags)):
        return False
    tail = mags[lam >= lam_max / 10]
    return bool(tail.max() <= tail[0] * (1 + rtol))


def frac_integrate_lambda(r: LambdaFunction, alpha: float, n_nodes: int = 64) -> LambdaFunction:
    """``r_alpha`` for ``0 < alpha < r.decay``; the result decays like ``lam^(alpha - decay)``.

    The substitution u = lam / s maps the half-line onto (0, 1]:

        r_alpha(lam) = lam^alpha / Gamma(alpha)
                       int_0^1 (1-s)^(alpha-1) s^(decay-alpha-1) [s^-decay r(lam/s)] ds,

    a Gauss-Jacobi integral whose bracket is smooth for resolvent-like r, so
    no truncation or tail bound is involved.
    """
    delta = r.decay
    if not 0 < alpha < delta:
        raise ValueError(f"alpha={alpha} must lie in (0, decay={delta})")
    s, w = _quad.gauss_jacobi01(n_nodes, alpha - 1.0, delta - alpha - 1.0)
    ga = gamma(alpha)

    def evaluator(lam):
        lam = np.asarray(lam, dtype=float)
        args = (lam[:, None] / s[None, :]).ravel()
        vals = np.asarray(r.evaluator(args))
        vals = vals.reshape((lam.size, s.size) + vals.shape[1:])
        scale = (s ** (-delta) * w).reshape((1, -1) + (1,) * (vals.ndim - 2))
        integral = _quad.tree_sum(np.moveaxis(vals * scale, 1, 0), axis=0)
        pref = (lam ** alpha / ga).reshape((-1,) + (1,) * (integral.ndim - 1))
        return pref * integral

    return LambdaFunction(evaluator, delta - alpha, r.a)


def power_law(delta, coefficient=1.0) -> LambdaFunction:
    """``r(lam) = c lam^-delta``."""
    return LambdaFunction(lambda lam: coefficient * np.asarray(lam, dtype=float) ** (-delta), delta, 0.0)


def resolvent_function(family, kappa) -> LambdaFunction:
    """``lam -> R(lam)/lam^kappa`` of a family, decaying like ``lam^-(kappa+1)``."""

    def evaluator(lam):
        lam = np.asarray(lam, dtype=complex)
        R = family.resolvent(lam)
        return R / lam.reshape((-1,) + (1,) * (R.ndim - 1)) ** kappa

    return LambdaFunction(evaluator, kappa + 1.0, max(family.omega, 0.0))


def power_law_rl(delta, alpha, lam):
    """Exact ``(lam^-delta)_alpha = Gamma(delta-alpha)/Gamma(delta) lam^(alpha-delta)``."""
    return gamma(delta - alpha) / gamma(delta) * np.asarray(lam, dtype=float) ** (alpha - delta)


__all__ = [
    "TimeTrace", "TraceError", "LambdaFunction", "graded_mesh", "trace_from_function",
    "family_trace", "frac_integrate_time", "frac_integrate_lambda", "check_decay",
    "power_law", "resolvent_function", "power_law_rl",
]

