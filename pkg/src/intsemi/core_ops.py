"""Concrete generators and their semigroup / resolvent evaluators.

Operator values of the finite families (``scalar``, ``matrix``,
``beta_multiplication``) are stored as stacked matrices of shape
``(..., P, d, d)``: one ``d x d`` block per spatial sample point.  A scalar is
the case ``P = d = 1`` and a dense matrix the case ``P = 1``.  The multiplication
operator on C[0,1] needs a rank-one correction through ``f(0)`` and uses
:class:`DiagRank1` instead.

Norms are sup-norm proxies: the pointwise operator norm induced by the
l1-sum norm ``|u| + |v|`` on C^d, maximised over the sample points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from . import _quad

FAMILY_KINDS = ("scalar", "matrix", "beta_multiplication", "singular_c01")


class FamilyError(ValueError):
    """Invalid family construction or evaluation request."""


class ResolventSetError(FamilyError):
    """A resolvent was requested at a point outside the resolvent set."""


class AdmissibilityError(FamilyError):
    """A (complex) time outside the domain where the family is defined."""


# ---------------------------------------------------------------------------
# grids and complex times


@dataclass(frozen=True)
class GridSpec:
    """Sample points for the multiplication variable.

    ``spacing="linear"`` gives ``n_points`` equispaced points.  ``"log"``
    clusters geometrically towards 0 (and towards both ends symmetrically when
    the interval straddles 0), which is what the origin-rate fits need.
    ``refinement=(x_star, factor)`` adds a cluster of points around ``x_star``
    with spacing ``h / factor``.

    For ``singular_c01`` the grid samples ``s = -ln x`` on ``[x_min, x_max]``.
    """

    x_min: float
    x_max: float
    n_points: int
    refinement: tuple[float, float] | None = None
    spacing: str = "linear"

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise FamilyError("grid endpoints must be finite")
        if not self.x_min < self.x_max:
            raise FamilyError(f"degenerate grid: x_min={self.x_min} >= x_max={self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise FamilyError("grid needs n_points >= 2")
        if self.spacing not in ("linear", "log"):
            raise FamilyError(f"unknown grid spacing {self.spacing!r}")
        if self.refinement is not None:
            x_star, factor = self.refinement
            if not self.x_min <= x_star <= self.x_max or factor < 1:
                raise FamilyError("refinement point must lie in the grid with factor >= 1")

    def points(self) -> np.ndarray:
        n = int(self.n_points)
        lo, hi = float(self.x_min), float(self.x_max)
        if self.spacing == "linear":
            x = np.linspace(lo, hi, n)
        else:
            x = _log_points(lo, hi, n)
        if self.refinement is not None:
            x_star, factor = self.refinement
            h = (hi - lo) / (n - 1)
            m = int(round(5 * factor))
            extra = x_star + h / factor * np.arange(-m, m + 1)
            x = np.concatenate((x, extra[(extra >= lo) & (extra <= hi)]))
        return np.unique(x)


def _log_points(lo, hi, n):
    span = max(abs(lo), abs(hi))
    floor = min(span * 1e-6, 1e-3)
    if lo >= 0:
        start = max(lo, floor)
        pts = np.geomspace(start, hi, n - 1 if lo == 0 else n)
        return np.concatenate(([0.0], pts)) if lo == 0 else pts
    if hi <= 0:
        return -_log_points(-hi, -lo, n)[::-1]
    n_neg = max(1, int(round((n - 1) * abs(lo) / (abs(lo) + hi) )))
    n_pos = max(1, n - 1 - n_neg)
    neg = -np.geomspace(min(floor, abs(lo)), abs(lo), n_neg)[::-1]
    pos = np.geomspace(min(floor, hi), hi, n_pos)
    return np.concatenate((neg, [0.0], pos))


@dataclass(frozen=True)
class ComplexTime:
    """A point of the closed right half-plane."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if self.re < 0:
            raise AdmissibilityError(f"Re z = {self.re} < 0 is outside the closed right half-plane")

    @classmethod
    def of(cls, z) -> "ComplexTime":
        if isinstance(z, ComplexTime):
            return z
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self):
        return complex(self.re, self.im)


# ---------------------------------------------------------------------------
# operator helpers


def pointwise_norm(op) -> np.ndarray:
    """Induced l1-sum norm of stacked ``(..., P, d, d)`` blocks, maximised over P."""
    op = np.asarray(op)
    return np.abs(op).sum(axis=-2).max(axis=-1).max(axis=-1)


@dataclass
class DiagRank1:
    """Operator ``(Kf)(x) = d(x) f(x) + u(x) f(0)`` on sampled C[0,1].

    Index 0 of the arrays is the point ``x = 0``; there ``d`` is kept at 0 and
    ``u`` carries the whole action.  The class is closed under composition.
    """

    d: np.ndarray
    u: np.ndarray

    def __matmul__(self, other: "DiagRank1") -> "DiagRank1":
        return DiagRank1(self.d * other.d, self.d * other.u + self.u * other.u[..., :1])

    def __add__(self, other):
        return DiagRank1(self.d + other.d, self.u + other.u)

    def __sub__(self, other):
        return DiagRank1(self.d - other.d, self.u - other.u)

    def __mul__(self, c):
        c = np.asarray(c)[..., None]
        return DiagRank1(self.d * c, self.u * c)

    __rmul__ = __mul__

    def apply(self, f):
        f = np.asarray(f)
        return self.d * f + self.u * f[..., :1]

    def norm(self):
        return np.max(np.abs(self.d) + np.abs(self.u), axis=-1)


# ---------------------------------------------------------------------------
# families


@dataclass
class OperatorFamily:
    """A concrete generator together with closed-form evaluators.

    Subclasses implement ``semigroup``, ``resolvent``, ``resolvent_derivative``
    and ``compose``/``norm``/``apply`` for their operator representation.
    """

    kind: str
    parameters: dict[str, Any]
    kappa_min: float
    omega: float
    norm_model: str = "pointwise l1-sum norm, sup over grid"
    theta: float = math.pi / 2
    #: exponents (alpha, beta) of the sector estimate |z|^a / (Re z)^(a+b)
    sector_exponents: tuple[float, float] = (0.0, 0.0)
    boundary_values: bool = True
    grid: GridSpec | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    # -- domain checks ------------------------------------------------------
    @property
    def boundary_threshold(self) -> float:
        """Orders sigma above which S_sigma extends continuously to iR."""
        a, b = self.sector_exponents
        return max(a + b, 0.0)

    def check_time(self, z) -> complex:
        z = complex(z)
        if z.real < 0:
            raise AdmissibilityError(f"{self.kind}: Re z = {z.real} < 0")
        if z.real == 0 and z.imag != 0 and not self.boundary_values:
            raise AdmissibilityError(f"{self.kind}: no boundary values on the imaginary axis (z={z})")
        return z

    def check_integrated_time(self, z, order) -> complex:
        """Like :meth:`check_time`, but ``S_order`` reaches iR once order >= threshold."""
        z = complex(z)
        if z.real < 0:
            raise AdmissibilityError(f"{self.kind}: Re z = {z.real} < 0")
        if order == 0 or order < self.boundary_threshold:
            return self.check_time(z)
        return z

    def in_resolvent_set(self, lam) -> bool:
        raise NotImplementedError

    def check_lambda(self, lam):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
        bad = [l for l in lam_arr if not self.in_resolvent_set(l)]
        if bad:
            raise ResolventSetError(f"{self.kind}: lambda={bad[0]} is not in the resolvent set")

    # -- operator algebra (pointwise default) -------------------------------
    def identity(self):
        P, d = self.shape
        return np.broadcast_to(np.eye(d, dtype=complex), (P, d, d)).copy()

    def compose(self, a, b):
        return a @ b

    def norm(self, op) -> float | np.ndarray:
        return pointwise_norm(op)

    def apply(self, op, vec):
        vec = self._as_vec(vec)
        return np.einsum("...pij,pj->...pi", op, vec)

    def _as_vec(self, vec):
        P, d = self.shape
        vec = np.asarray(vec, dtype=complex)
        if vec.size == P * d:
            return vec.reshape(P, d)
        if vec.shape == (d,):
            return np.broadcast_to(vec, (P, d))
        raise FamilyError(f"vector of shape {vec.shape} does not fit family shape {(P, d)}")

    def vec_norm(self, vec) -> float:
        """Sup over sample points of the l1-sum vector norm."""
        vec = np.asarray(vec)
        return float(np.abs(vec).sum(axis=-1).max(axis=-1))

    @property
    def shape(self) -> tuple[int, int]:
        raise NotImplementedError

    # -- evaluators ----------------------------------------------------------
    def semigroup(self, z):
        raise NotImplementedError

    def semigroup_norm(self, z) -> float:
        return float(self.norm(self.semigroup(z)))

    def resolvent(self, lam):
        raise NotImplementedError

    def resolvent_derivative(self, lam, n, kappa, log_scale=0.0):
        raise NotImplementedError

    def integrated(self, z, k):
        raise NotImplementedError(f"no closed-form integrated semigroup for {self.kind}")

    def to_json(self) -> dict:
        out = {"kind": self.kind, **{k: v for k, v in self.parameters.items()}}
        if self.grid is not None:
            out["grid"] = {"xmin": self.grid.x_min, "xmax": self.grid.x_max,
                           "n": self.grid.n_points, "spacing": self.grid.spacing}
        return out


def phi(k, w):
    """``phi_k(w) = sum_j w^j / (j+k)!``, i.e. ``(e^w - sum_{j<k} w^j/j!) / w^k``.

    Series for |w| < 1/2 (16 terms reach machine precision), closed form otherwise.
    """
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    small = np.abs(w) < 0.5
    if np.any(small):
        ws = w[small]
        term = np.full_like(ws, 1.0 / math.factorial(k))
        acc = term.copy()
        for j in range(1, 17):
            term *= ws * (1.0 / (j + k))
            acc = acc + term
        out[small] = acc
    big = ~small
    if np.any(big):
        wb = w[big]
        poly = np.zeros_like(wb)
        term = np.ones_like(wb)
        for j in range(k):
            poly = poly + term
            term = term * wb / (j + 1)
        out[big] = (np.exp(wb) - poly) / wb ** k
    return out


def _blockwise_expm(z_arr, M, d, k, chunk_elems=2_000_000):
    """Top-right ``d x d`` block of ``expm(z M)`` for every z, chunked over z."""
    flat = z_arr.reshape(-1)
    P, D, _ = M.shape
    step = max(1, chunk_elems // (P * D * D))
    out = np.empty((flat.size, P, d, d), dtype=complex)
    for i in range(0, flat.size, step):
        E = expm(flat[i:i + step, None, None, None] * M[None])
        out[i:i + step] = E[..., :d, k * d:(k + 1) * d]
    return out.reshape(z_arr.shape + (P, d, d))


class _UpperTriangularFamily(OperatorFamily):
    """Pointwise ``a(x) = b(x) I + c(x) N`` with N nilpotent (d = 1 or 2)."""

    def _setup(self, b, c, dim):
        self._b = np.asarray(b, dtype=complex)
        self._c = np.asarray(c, dtype=float)
        self._dim = dim

    @property
    def shape(self):
        return (self._b.size, self._dim)

    def _assemble(self, diag, off):
        """Stack ``diag * I + off * N`` into ``(..., P, d, d)``."""
        diag = np.asarray(diag)
        if self._dim == 1:
            return diag[..., None, None]
        out = np.zeros(diag.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = diag
        out[..., 1, 1] = diag
        out[..., 0, 1] = off
        return out

    def _semigroup_at(self, z, b, c):
        z = np.asarray(z, dtype=complex)[..., None]
        e = np.exp(z * b)
        return e, z * c * e

    def semigroup(self, z):
        z_arr = np.asarray(z, dtype=complex)
        for zz in np.atleast_1d(z_arr):
            self.check_time(zz)
        e, off = self._semigroup_at(z_arr, self._b, self._c)
        return self._assemble(e, off)

    def in_resolvent_set(self, lam) -> bool:
        return bool(np.all(np.abs(lam - self._b) > 1e-14))

    def check_lambda(self, lam):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
        bad = np.zeros(lam_arr.shape, dtype=bool)
        for i in range(0, lam_arr.size, 512):
            block = lam_arr[i:i + 512]
            bad[i:i + 512] = np.any(np.abs(block[:, None] - self._b[None, :]) <= 1e-14, axis=1)
        bad |= self._extra_spectrum(lam_arr)
        if bad.any():
            raise ResolventSetError(f"{self.kind}: lambda={lam_arr[bad][0]} is not in the resolvent set")

    def _extra_spectrum(self, lam_arr):
        return np.zeros(lam_arr.shape, dtype=bool)

    def resolvent(self, lam):
        lam_arr = np.asarray(lam, dtype=complex)
        self.check_lambda(lam_arr)
        r = 1.0 / (lam_arr[..., None] - self._b)
        return self._assemble(r, self._c * r * r)

    def resolvent_derivative(self, lam, n, kappa, log_scale=0.0):
        """``exp(log_scale) * d^n/dlam^n [R(lam) / lam^kappa]`` in closed form.

        Leibniz's rule on ``lam^-kappa (lam - b)^-p`` for the pole orders
        p = 1 (identity part) and p = 2 (nilpotent part).  All terms carry the
        sign (-1)^n and are accumulated in log space, so large ``n`` and
        ``log_scale`` neither overflow nor cancel.
        """
        self.check_lambda(lam)
        lam = complex(lam)
        j = np.arange(n + 1)
        m = n - j
        log_binom = gammaln(n + 1) - gammaln(j + 1) - gammaln(m + 1)
        if kappa == 0:
            log_rise = np.where(j == 0, 0.0, -np.inf)
        else:
            log_rise = gammaln(kappa + j) - gammaln(kappa)
        log_lam = np.log(lam)
        log_pow = -(kappa + j) * log_lam
        log_mu = np.log(lam - self._b)  # (P,)
        base = log_binom + log_rise + log_pow + log_scale  # (n+1,)
        keep = np.isfinite(base.real)
        base, mk = base[keep], m[keep]

        def pole(p):
            log_poch = gammaln(p + mk) - gammaln(p)
            terms = base[:, None] + log_poch[:, None] - (p + mk)[:, None] * log_mu[None, :]
            return _quad.tree_sum(np.exp(terms), axis=0)

        sign = -1.0 if n % 2 else 1.0
        diag = sign * pole(1)
        off = sign * self._c * pole(2) if self._dim == 2 else 0.0
        return self._assemble(diag, off)

    def integrated(self, z, k):
        """Closed-form ``S_k(z) = int_0^z (z-s)^(k-1)/(k-1)! T(s) ds`` for integer k.

        With ``a = bI + cN`` and ``f(a) = f(b) I + c f'(b) N`` this is
        ``z^k [phi_k(zb) I + c z (phi_k - k phi_{k+1})(zb) N]``.  ``z`` may be
        an array of times.
        """
        k = int(k)
        z_arr = np.asarray(z, dtype=complex)
        for zz in np.atleast_1d(z_arr):
            self.check_integrated_time(zz, k)
        if k == 0:
            return self.semigroup(z_arr)
        w = z_arr[..., None] * self._b
        zk = z_arr[..., None] ** k
        pk = phi(k, w)
        diag = zk * pk
        off = zk * z_arr[..., None] * self._c * (pk - k * phi(k + 1, w))
        return self._assemble(diag, off)


class ScalarFamily(_UpperTriangularFamily):
    def __init__(self, a):
        a = complex(a)
        if not np.isfinite(a):
            raise FamilyError("scalar generator must be finite")
        super().__init__(kind="scalar", parameters={"a": a.real if a.imag == 0 else a},
                         kappa_min=0.0, omega=a.real)
        self._setup([a], [0.0], 1)

    @property
    def a(self):
        return complex(self._b[0])


class BetaFamily(_UpperTriangularFamily):
    """Multiplication by ``-(1+x^2) I + |x|^beta N`` on a sampled line."""

    def __init__(self, beta, grid: GridSpec):
        beta = float(beta)
        if not beta >= 0:
            raise FamilyError(f"beta must be >= 0, got {beta}")
        kappa_min = beta / 2 if beta <= 4 else math.inf
        super().__init__(kind="beta_multiplication", parameters={"beta": beta},
                         kappa_min=kappa_min, omega=-1.0, grid=grid,
                         sector_exponents=(1.0, beta / 2 - 1.0),
                         boundary_values=(beta == 0))
        x = grid.points()
        self.x = x
        self.beta = beta
        self._setup(-(1.0 + x ** 2), np.abs(x) ** beta, 2)

    @property
    def boundary_threshold(self):
        return self.beta / 2

    def in_resolvent_set(self, lam) -> bool:
        if self.beta > 4:
            return False
        lam = complex(lam)
        return not (lam.imag == 0 and lam.real <= -1)

    def check_lambda(self, lam):
        if self.beta > 4:
            raise ResolventSetError(f"beta={self.beta} > 4: the resolvent set is empty")
        super().check_lambda(lam)

    def _extra_spectrum(self, lam_arr):
        return (lam_arr.imag == 0) & (lam_arr.real <= -1)

    def peak_points(self, re_z):
        """Cluster of points around the maximiser sqrt(beta / (2 Re z)) of |x|^beta e^{-x^2 Re z}."""
        if self.beta == 0 or re_z <= 0:
            return np.empty(0)
        xs = math.sqrt(self.beta / (2 * re_z))
        cluster = xs * (1.0 + 0.005 * np.arange(-10, 11))
        cluster = np.concatenate((cluster, -cluster))
        return cluster[(cluster >= self.grid.x_min) & (cluster <= self.grid.x_max)]

    def semigroup_norm(self, z) -> float:
        z = self.check_time(z)
        x = np.concatenate((self.x, self.peak_points(z.real)))
        b = -(1.0 + x ** 2)
        c = np.abs(x) ** self.beta
        e, off = self._semigroup_at(z, b, c)
        return float(np.max(np.abs(e) + np.abs(off)))


class MatrixFamily(OperatorFamily):
    def __init__(self, A):
        A = np.array(A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise FamilyError("matrix generator must be square")
        if not np.all(np.isfinite(A)):
            raise FamilyError("matrix entries must be finite")
        self.A = A
        self.eigenvalues = np.linalg.eigvals(A)
        real = A.real.tolist() if np.all(A.imag == 0) else A.tolist()
        super().__init__(kind="matrix", parameters={"matrix": real}, kappa_min=0.0,
                         omega=float(np.max(self.eigenvalues.real)))

    @property
    def shape(self):
        return (1, self.A.shape[0])

    def semigroup(self, z):
        z_arr = np.asarray(z, dtype=complex)
        for zz in np.atleast_1d(z_arr):
            self.check_time(zz)
        return expm(z_arr[..., None, None] * self.A)[..., None, :, :]

    def in_resolvent_set(self, lam) -> bool:
        return bool(np.all(np.abs(complex(lam) - self.eigenvalues) > 1e-12))

    def resolvent(self, lam):
        lam_arr = np.asarray(lam, dtype=complex)
        self.check_lambda(lam_arr)
        d = self.A.shape[0]
        R = np.linalg.inv(lam_arr[..., None, None] * np.eye(d) - self.A)
        return R[..., None, :, :]

    def resolvent_derivative(self, lam, n, kappa, log_scale=0.0):
        # R^(m) = (-1)^m m! R^(m+1); powers kept normalised by ||R||.
        self.check_lambda(lam)
        lam = complex(lam)
        R = self.resolvent(lam)[0]
        rho = float(np.abs(R).sum(axis=0).max())
        Q = R / rho
        powers = [Q]
        for _ in range(n):
            powers.append(powers[-1] @ Q)
        total = np.zeros_like(R)
        for j in range(n + 1):
            if kappa == 0 and j > 0:
                break
            m = n - j
            logc = (gammaln(n + 1) - gammaln(j + 1) - gammaln(m + 1)
                    + (gammaln(kappa + j) - gammaln(kappa) if kappa else 0.0)
                    - (kappa + j) * np.log(lam) + gammaln(m + 1)
                    + (m + 1) * math.log(rho) + log_scale)
            total = total + np.exp(logc) * powers[m]
        sign = -1.0 if n % 2 else 1.0
        return (sign * total)[None]

    def integrated(self, z, k):
        k = int(k)
        z_arr = np.asarray(z, dtype=complex)
        for zz in np.atleast_1d(z_arr):
            self.check_integrated_time(zz, k)
        if k == 0:
            return self.semigroup(z_arr)
        d = self.A.shape[0]
        D = d * (k + 1)
        M = np.zeros((1, D, D), dtype=complex)
        M[0, :d, :d] = self.A
        for i in range(k):
            M[0, i * d:(i + 1) * d, (i + 1) * d:(i + 2) * d] = np.eye(d)
        return _blockwise_expm(z_arr, M, d, k)


class SingularFamily(OperatorFamily):
    """``[T(z)f](x) = x^z [f(x) - f(0)(-ln x)^beta]`` on sampled C[0,1].

    Sample points are stored through ``ell = -ln x``; index 0 is ``x = 0``.
    """

    def __init__(self, beta, grid: GridSpec):
        beta = float(beta)
        if not beta >= 0:
            raise FamilyError(f"beta must be >= 0, got {beta}")
        super().__init__(kind="singular_c01", parameters={"beta": beta},
                         kappa_min=beta, omega=0.0, grid=grid,
                         norm_model="sup over grid of |x^z| (1 + (-ln x)^beta)",
                         sector_exponents=(0.0, beta), boundary_values=(beta == 0))
        self.beta = beta
        self.ell = np.concatenate(([np.inf], grid.points()))

    @property
    def shape(self):
        return (self.ell.size, 1)

    @property
    def x(self):
        return np.exp(-self.ell)

    def identity(self):
        P = self.ell.size
        d = np.ones(P, dtype=complex)
        d[0] = 0.0
        u = np.zeros(P, dtype=complex)
        u[0] = 1.0
        return DiagRank1(d, u)

    def compose(self, a, b):
        return a @ b

    def norm(self, op):
        return op.norm()

    def apply(self, op, vec):
        return op.apply(np.asarray(vec, dtype=complex).reshape(-1))

    def vec_norm(self, vec):
        return float(np.max(np.abs(vec)))

    def check_time(self, z):
        z = super().check_time(z)
        if z == 0:
            raise AdmissibilityError("singular_c01: T(0) is not defined")
        return z

    def semigroup(self, z):
        z_arr = np.asarray(z, dtype=complex)
        for zz in np.atleast_1d(z_arr):
            self.check_time(zz)
        ell = self.ell[1:]
        e = np.exp(-z_arr[..., None] * ell)
        d = np.concatenate((np.zeros(z_arr.shape + (1,)), e), axis=-1)
        u = np.concatenate((np.zeros(z_arr.shape + (1,)), -e * ell ** self.beta), axis=-1)
        return DiagRank1(d, u)

    def in_resolvent_set(self, lam) -> bool:
        lam = complex(lam)
        return not (lam.imag == 0 and lam.real <= 0)

    def resolvent(self, lam):
        """Candidate resolvent ``(lam - ln x)^-1 [f(x) - (-ln x)^beta f(0)]``.

        Values at ``x = 0`` are the continuous limits: 0 for beta < 1 and
        ``-f(0)`` for beta = 1.  For beta > 1 the candidate is unbounded.
        For beta = 1 it is bounded but fails the resolvent equation, see
        :func:`resolvent_equation_residual`.
        """
        if self.beta > 1:
            raise ResolventSetError(f"singular_c01 with beta={self.beta} > 1: candidate resolvent is unbounded")
        lam_arr = np.asarray(lam, dtype=complex)
        self.check_lambda(lam_arr)
        ell = self.ell[1:]
        r = 1.0 / (lam_arr[..., None] + ell)
        u0 = -1.0 if self.beta == 1 else 0.0
        d = np.concatenate((np.zeros(lam_arr.shape + (1,)), r), axis=-1)
        u = np.concatenate((np.full(lam_arr.shape + (1,), u0, dtype=complex), -r * ell ** self.beta), axis=-1)
        return DiagRank1(d, u)

    @property
    def resolvent_valid(self) -> bool:
        return self.beta < 1


# ---------------------------------------------------------------------------
# module-level operations


def make_family(kind, parameters=None, grid: GridSpec | None = None) -> OperatorFamily:
    """Build an operator family.

    ``parameters`` keys: ``a`` (scalar), ``matrix`` (matrix), ``beta``
    (beta_multiplication, singular_c01).
    """
    parameters = dict(parameters or {})
    if kind == "scalar":
        return ScalarFamily(parameters.get("a", -1.0))
    if kind == "matrix":
        if "matrix" not in parameters:
            raise FamilyError("matrix family needs a 'matrix' parameter")
        return MatrixFamily(parameters["matrix"])
    if kind == "beta_multiplication":
        grid = grid or GridSpec(-8.0, 8.0, 2001)
        return BetaFamily(parameters.get("beta", 0.0), grid)
    if kind == "singular_c01":
        grid = grid or GridSpec(0.0, 1e9, 4001, spacing="log")
        return SingularFamily(parameters.get("beta", 0.0), grid)
    raise FamilyError(f"unknown family kind {kind!r}; expected one of {FAMILY_KINDS}")


def family_from_json(desc) -> OperatorFamily:
    """Build a family from a JSON descriptor (dict, JSON text, or path).

    ``{"kind": "beta_multiplication", "beta": 3.0, "grid": {"xmin": -8, "xmax": 8, "n": 2001}}``
    """
    if isinstance(desc, str):
        desc = json.loads(desc) if desc.lstrip().startswith("{") else json.load(open(desc))
    desc = dict(desc)
    kind = desc.pop("kind", None)
    g = desc.pop("grid", None)
    grid = None
    if g is not None:
        ref = g.get("refinement")
        grid = GridSpec(float(g["xmin"]), float(g["xmax"]), int(g["n"]),
                        refinement=tuple(ref) if ref else None,
                        spacing=g.get("spacing", "log" if kind == "singular_c01" else "linear"))
    return make_family(kind, desc, grid)


def apply_semigroup(family: OperatorFamily, z, vec):
    """``T(z) vec`` by the pointwise closed form."""
    return family.apply(family.semigroup(complex(ComplexTime.of(z))), vec)


def semigroup_norm(family: OperatorFamily, z) -> float:
    """Grid proxy for ``||T(z)||`` (sup of the pointwise induced norm)."""
    return family.semigroup_norm(complex(ComplexTime.of(z)))


def resolvent_apply(family: OperatorFamily, lam, vec):
    """``R(lam, A) vec``; raises :class:`ResolventSetError` outside the resolvent set."""
    return family.apply(family.resolvent(complex(lam)), vec)


N_MAX_DEFAULT = 64


def resolvent_derivative(family, lam, n, kappa, method="closed", n_max=N_MAX_DEFAULT, log_scale=0.0):
    """Operator ``(R(lam)/lam^kappa)^(n)``.

    ``method="closed"`` uses the family's analytic formula.  ``"quadrature"``
    evaluates ``(-1)^n int_0^inf t^n e^{-lam t} S_kappa(t) dt`` with the
    closed-form integrated semigroup (integer kappa only).
    """
    lam = float(np.real(lam)) if np.isreal(lam) else lam
    if np.real(lam) <= max(family.omega, 0.0):
        raise FamilyError(f"lambda={lam} must exceed max(omega, 0) = {max(family.omega, 0.0)}")
    if n < 0 or n > n_max:
        raise FamilyError(f"derivative depth n={n} outside [0, {n_max}]")
    if method == "closed":
        return family.resolvent_derivative(lam, n, kappa, log_scale=log_scale)
    if method != "quadrature":
        raise FamilyError(f"unknown method {method!r}")
    if int(kappa) != kappa:
        raise FamilyError("quadrature route needs integer kappa")
    family.check_lambda(lam)
    rate = lam - family.omega
    T = _quad.halfline_cutoff(rate, power=n + kappa, tol=1e-14)
    edges = _quad.graded_panels(T, n_panels=30, ratio=1e-8)
    t, w = _quad.composite_legendre(edges, 16)
    S = family.integrated(t, int(kappa))
    weights = w * t ** n * np.exp(-lam * t)
    acc = _quad.tree_sum(weights.reshape((-1,) + (1,) * (S.ndim - 1)) * S, axis=0)
    sign = -1.0 if n % 2 else 1.0
    return sign * acc * math.exp(log_scale)


def resolvent_derivative_norm(family, lam, n, kappa, method="closed", n_max=N_MAX_DEFAULT) -> float:
    """``||(R(lam)/lam^kappa)^(n)||`` in the family's norm."""
    return float(family.norm(resolvent_derivative(family, lam, n, kappa, method=method, n_max=n_max)))


def resolvent_equation_residual(family, lam, mu) -> float:
    """``||R(lam) - R(mu) - (mu - lam) R(lam) R(mu)||``."""
    Rl = family.resolvent(complex(lam))
    Rm = family.resolvent(complex(mu))
    res = Rl - Rm - (complex(mu) - complex(lam)) * family.compose(Rl, Rm)
    return float(family.norm(res))
