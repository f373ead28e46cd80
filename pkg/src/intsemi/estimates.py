"""Hille-Yosida scans, origin-rate fits, sector estimates and boundary values."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gamma, gammaln

from . import _quad
from .core_ops import AdmissibilityError, DiagRank1, FamilyError, resolvent_derivative
from .fracint import TimeTrace, TraceError


class ThresholdError(AdmissibilityError):
    """Requested order is at or below the order where boundary values exist."""

    def __init__(self, sigma, threshold):
        self.sigma = sigma
        self.threshold = threshold
        super().__init__(f"sigma={sigma} is not above the boundary threshold {threshold}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ---------------------------------------------------------------------------
# Hille-Yosida scans


@dataclass
class HYReport:
    kappa: float
    alpha: float
    omega: float
    a: float
    sup_value: float
    argmax: tuple[int, float]
    verdict: str
    n_range: tuple[int, int]
    lambda_grid: np.ndarray
    per_n_max: np.ndarray
    lambda_growth: float
    n_growth: float
    values: np.ndarray | None = None
    even_n: dict | None = None
    shifted_omega_verdict: str | None = None

    def to_json(self, full=False) -> dict:
        d = asdict(self)
        d.pop("values")
        d["lambda_grid"] = [float(self.lambda_grid[0]), float(self.lambda_grid[-1]), int(self.lambda_grid.size)]
        if full and self.values is not None:
            d["values"] = self.values
            d["lambda_grid"] = self.lambda_grid
        return _jsonable(d)


def default_lambda_grid(a, n=200):
    """``n`` log-spaced points of ``lam - a`` in [1e-3, 1e4]."""
    return a + np.geomspace(1e-3, 1e4, n)


def _hy_values(family, kappa, alpha, omega, n_list, lam):
    vals = np.empty((len(n_list), lam.size))
    for i, n in enumerate(n_list):
        for j, l in enumerate(lam):
            log_scale = (n + alpha + 1) * math.log(l - omega) - gammaln(n + alpha + 1)
            d = resolvent_derivative(family, l, n, kappa, n_max=max(n_list), log_scale=log_scale)
            vals[i, j] = float(family.norm(d))
    return vals


def _hy_verdict(vals, n_list, kappa, alpha, plateau_tol=0.05, growth_factor=1.5):
    per_n = vals.max(axis=1)
    n = len(n_list)
    q = per_n[-max(2, n // 4):]
    plateau = (q.max() - q.min()) <= plateau_tol * q.max()
    half = per_n[n // 2:]
    n_growth = float(half.max() / half[0])
    # growth towards the ends of the lambda grid, taken over the last two decades
    m = vals.shape[1]
    k = max(2, m // 7)
    lam_growth = float(np.max(np.maximum(vals[:, -1] / vals[:, -k], vals[:, 0] / vals[:, k - 1])))
    lam_span = float(np.max(vals.max(axis=1) / np.maximum(vals.min(axis=1), 1e-300)))
    bounded = plateau and n_growth <= growth_factor and lam_growth <= 1 + plateau_tol
    if bounded:
        verdict = "bounded"
    elif alpha > kappa:
        verdict = "trivial-forced"
    else:
        verdict = "growing"
    return verdict, per_n, n_growth, lam_growth, lam_span


def hy_scan(family, kappa, alpha, omega=None, a=None, n_max=32, lambda_grid=None,
            plateau_tol=0.05, growth_factor=1.5, rerun_shift=0.5, full=False) -> HYReport:
    """Scan ``(lam-omega)^{n+alpha+1}/Gamma(n+alpha+1) ||(R(lam)/lam^kappa)^(n)||``.

    The verdict is ``bounded`` when the per-n maxima over lambda vary by less
    than ``plateau_tol`` over the last quarter of the n-range and the profile
    in lambda has flattened at both ends of the grid.  An unbounded scan with
    ``alpha > kappa`` is reported as ``trivial-forced``: such an estimate can
    only hold for the zero family.
    """
    omega = family.omega if omega is None else float(omega)
    a = max(omega, 0.0) if a is None else float(a)
    lam = default_lambda_grid(a) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if lam.size == 0:
        raise FamilyError("empty lambda grid")
    if np.any(lam <= a):
        raise FamilyError("lambda grid must lie in (a, inf)")
    n_list = list(range(0, int(n_max) + 1))
    vals = _hy_values(family, kappa, alpha, omega, n_list, lam)
    verdict, per_n, n_growth, lam_growth, lam_span = _hy_verdict(vals, n_list, kappa, alpha, plateau_tol, growth_factor)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    even = [k for k, n in enumerate(n_list) if n % 2 == 0]
    ev_verdict, ev_per_n, *_ = _hy_verdict(vals[even], [n_list[k] for k in even], kappa, alpha,
                                            plateau_tol, growth_factor)
    even_report = {"verdict": ev_verdict, "sup_value": float(vals[even].max()), "per_n_max": ev_per_n}
    shifted = None
    if rerun_shift:
        w2 = omega + rerun_shift
        a2 = max(a, w2, 0.0)
        lam2 = a2 + (lam - a)
        vals2 = _hy_values(family, kappa, alpha, w2, n_list, lam2)
        shifted = _hy_verdict(vals2, n_list, kappa, alpha, plateau_tol, growth_factor)[0]
    return HYReport(kappa=kappa, alpha=alpha, omega=omega, a=a, sup_value=float(vals[i, j]),
                    argmax=(int(n_list[i]), float(lam[j])), verdict=verdict, n_range=(0, int(n_max)),
                    lambda_grid=lam, per_n_max=per_n, lambda_growth=lam_span, n_growth=n_growth,
                    values=vals, even_n=even_report, shifted_omega_verdict=shifted)


# ---------------------------------------------------------------------------
# origin rates


@dataclass
class RateFit:
    alpha_hat: float
    window: tuple[float, float]
    r_squared: float
    residual_max: float
    omega_used: float
    screened: bool = True

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def fit_origin_rate(trace: TimeTrace, omega=0.0, t_range=(1e-4, 0.1), min_points=10,
                    min_span=16.0, curvature_tol=0.05) -> RateFit:
    """Slope of ``log(||S(t)|| e^{-omega t})`` against ``log t`` near 0.

    Windows are dyadic, ``[t_range[0] 2^i, t_range[0] 2^j]`` with
    ``t_hi / t_lo >= min_span``.  A window is dropped when the slopes fitted
    on its two halves differ by more than ``curvature_tol``; among the rest
    the best r^2 wins, ties going to the smaller ``t_lo``.
    """
    t = np.asarray(trace.t, dtype=float)
    norms = trace.norms()
    lo, hi = t_range
    sel = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
    if sel.sum() < min_points:
        raise TraceError(f"only {int(sel.sum())} samples in [{lo}, {hi}]; need {min_points}")
    t, norms = t[sel], norms[sel]
    if np.any(norms <= 0):
        raise TraceError("nonpositive norms in the fit window")
    x = np.log(t)
    y = np.log(norms) - omega * t
    n_dy = int(math.floor(math.log2(hi / lo) + 1e-9))
    edges = lo * 2.0 ** np.arange(n_dy + 1)
    edges[-1] = min(edges[-1], hi)
    best = None
    fallback = None
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            a, b = edges[i], edges[j]
            if b / a < min_span * (1 - 1e-9):
                continue
            m = (t >= a * (1 - 1e-12)) & (t <= b * (1 + 1e-12))
            if m.sum() < min_points:
                continue
            xs, ys = x[m], y[m]
            slope, icpt = np.polyfit(xs, ys, 1)
            res = ys - (slope * xs + icpt)
            ss = np.sum((ys - ys.mean()) ** 2)
            r2 = 1.0 - np.sum(res ** 2) / ss if ss > 0 else 1.0
            h = len(xs) // 2
            s1 = np.polyfit(xs[:h + 1], ys[:h + 1], 1)[0]
            s2 = np.polyfit(xs[h:], ys[h:], 1)[0]
            cand = (r2, -a, slope, (a, b), float(np.max(np.abs(res))))
            if fallback is None or cand[:2] > fallback[:2]:
                fallback = cand
            if abs(s1 - s2) > curvature_tol:
                continue
            if best is None or r2 > best[0] + 1e-12 or (abs(r2 - best[0]) <= 1e-12 and a < -best[1]):
                best = cand
    screened = best is not None
    chosen = best if screened else fallback
    if chosen is None:
        raise TraceError("no admissible fit window")
    r2, _, slope, window, rmax = chosen
    return RateFit(alpha_hat=float(slope), window=(float(window[0]), float(window[1])), r_squared=float(r2), residual_max=rmax,
                   omega_used=float(omega), screened=screened)


# ---------------------------------------------------------------------------
# sector estimates


@dataclass(frozen=True)
class SectorGrid:
    """``n_rays`` rays with |arg z| <= pi/2 - eps and log-spaced radii."""

    n_rays: int = 24
    n_radii: int = 40
    r_min: float = 1e-3
    r_max: float = 1e2
    eps: float = 0.01
    boundary: bool = False

    def points(self) -> np.ndarray:
        th = np.linspace(-(math.pi / 2 - self.eps), math.pi / 2 - self.eps, self.n_rays)
        r = np.geomspace(self.r_min, self.r_max, self.n_radii)
        return (r[:, None] * np.exp(1j * th[None, :])).ravel()

    def boundary_points(self) -> np.ndarray:
        r = np.geomspace(self.r_min, self.r_max, self.n_radii)
        return np.concatenate((1j * r, -1j * r))


@dataclass
class SectorReport:
    estimate_kind: str
    exponents: tuple
    best_M: float
    best_omega: float
    violations: list
    grid: dict
    verdict: str
    singular_slope: float
    ratios: np.ndarray | None = None

    def to_json(self, full=False) -> dict:
        d = asdict(self)
        d.pop("ratios")
        d["violations"] = [[complex(z).real, complex(z).imag] for z in self.violations]
        if full and self.ratios is not None:
            d["ratios"] = self.ratios
        return _jsonable(d)


def _bound_shape(kind, exponents, z):
    absz, rez = np.abs(z), np.real(z)
    if kind == "E1":
        a, b = exponents
        return absz ** a / rez ** (a + b)
    if kind == "E2":
        g, _ = exponents
        return absz ** g
    if kind == "E3":
        s, g, d = exponents
        return absz ** g / rez ** (g + d - s)
    raise ValueError(f"unknown estimate kind {kind!r}")


def estimate_order(kind, exponents) -> float:
    """Order sigma of the operator family the estimate bounds (0 for E1)."""
    if kind == "E1":
        return 0.0
    if kind == "E2":
        return float(exponents[0] + exponents[1])
    return float(exponents[0])


def integrated_norms(family, z, sigma):
    """``||S_sigma(z)||`` for an array of z in the closed right half-plane."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if sigma == 0:
        return np.array([family.semigroup_norm(zz) for zz in z])
    if float(sigma).is_integer():
        try:
            S = family.integrated(z, int(sigma))
            return np.atleast_1d(family.norm(S))
        except NotImplementedError:
            pass
    from .transforms import contour_invert

    out = np.empty(z.size)
    inner = z.real > 0
    if inner.any():
        vals = contour_invert(family, z[inner], sigma)
        out[inner] = [family.norm(v) for v in vals] if isinstance(vals, list) else family.norm(vals)
    for i in np.nonzero(~inner)[0]:
        out[i] = family.norm(boundary_values(family, z[i].imag, sigma))
    return out


def sector_scan(family_or_norm, estimate_kind, exponents, sector_grid: SectorGrid | None = None,
                omega_grid=(0.0, 0.1, 0.25, 0.5, 1.0, 2.0), margin=0.05, slope_tol=0.05,
                m_tol=0.05) -> SectorReport:
    """Best constants ``(M, omega)`` for an E1/E2/E3 estimate on a sector grid.

    ``family_or_norm`` is a family or a callable ``z_array -> norms``.  For
    each omega on the grid, M(omega) is the largest ratio of the norm to the
    bound shape; the smallest omega whose M is within ``m_tol`` of the best
    is kept.  Points are binned by Re z (E1, E3) or |z| (E2); the estimate
    fails when the per-bin maximal ratio grows like a power of the bin
    coordinate towards 0 (log-log slope below ``-slope_tol``), and the
    points above the outer-bin level (times ``1 + margin``) are violations.
    """
    grid = sector_grid or SectorGrid(boundary=(estimate_kind == "E2"))
    z = grid.points()
    sigma = estimate_order(estimate_kind, exponents)
    if callable(family_or_norm) and not hasattr(family_or_norm, "semigroup"):
        norm_fn = family_or_norm
        family = None
    else:
        family = family_or_norm

        def norm_fn(zz):
            return integrated_norms(family, zz, sigma)

    norms = np.asarray(norm_fn(z), dtype=float)
    violations_extra = []
    if grid.boundary and estimate_kind == "E2":
        zb = grid.boundary_points()
        try:
            nb = np.asarray(norm_fn(zb), dtype=float)
            z = np.concatenate((z, zb))
            norms = np.concatenate((norms, nb))
        except AdmissibilityError:
            violations_extra = list(zb)
    if not np.all(np.isfinite(norms)):
        raise FamilyError("norm evaluation produced non-finite values")
    if estimate_kind == "E2":
        shape = _bound_shape("E2", exponents, z)
        coord = np.abs(z)
    else:
        shape = _bound_shape(estimate_kind, exponents, z)
        coord = np.real(z)
    absz = np.abs(z)
    Ms = np.array([np.max(norms / (shape * np.exp(w * absz))) for w in omega_grid])
    k = int(np.nonzero(Ms <= Ms.min() * (1 + m_tol))[0][0])
    omega, M = float(omega_grid[k]), float(Ms[k])
    ratio = norms / (shape * np.exp(omega * absz))

    edges = np.geomspace(coord.min(), coord.max() * (1 + 1e-12), 13)
    idx = np.clip(np.searchsorted(edges, coord, side="right") - 1, 0, len(edges) - 2)
    centres, maxima = [], []
    for b in range(len(edges) - 1):
        m = idx == b
        if m.any():
            centres.append(math.sqrt(edges[b] * edges[b + 1]))
            maxima.append(ratio[m].max())
    centres, maxima = np.array(centres), np.array(maxima)
    h = max(3, len(centres) // 2)
    slope = float(np.polyfit(np.log(centres[:h]), np.log(maxima[:h]), 1)[0])
    fails = slope < -slope_tol
    if fails:
        ref = float(maxima[h:].max()) if len(maxima) > h else float(maxima[-1])
        viol = list(z[ratio > ref * (1 + margin)])
        M = ref
    else:
        viol = []
    viol += violations_extra
    verdict = "fail" if viol else "pass"
    return SectorReport(estimate_kind=estimate_kind, exponents=tuple(exponents), best_M=M,
                        best_omega=omega, violations=viol, grid=asdict(grid), verdict=verdict,
                        singular_slope=slope, ratios=ratio)


# ---------------------------------------------------------------------------
# boundary values on the imaginary axis


def _weighted_sum(ops, w):
    if isinstance(ops, DiagRank1):
        return DiagRank1(np.tensordot(w, ops.d, axes=(0, 0)), np.tensordot(w, ops.u, axes=(0, 0)))
    return np.tensordot(w, ops, axes=(0, 0))


def _spectral_extent(family):
    b = getattr(family, "_b", None)
    if b is not None:
        return float(np.max(np.abs(b)))
    ell = getattr(family, "ell", None)
    if ell is not None:
        return float(np.max(ell[1:]))
    eig = getattr(family, "eigenvalues", None)
    if eig is not None:
        return float(np.max(np.abs(eig)))
    return 1.0


def boundary_values(family, t_imag, sigma, n_nodes=16, chunk=256):
    """``S_sigma(it) = (1/Gamma(sigma)) int_0^{it} (it - s)^{sigma-1} T(s) ds``.

    The path runs along the straight line [0, |t|] and then the arc
    ``|t| e^{i u}`` up to ``u = +-pi/2``.  The arc uses Gauss-Legendre panels
    sized to the oscillation of ``T`` with a Gauss-Jacobi last panel for the
    ``(1 - v)^{sigma-1}`` endpoint factor.  Requires sigma above the
    family's boundary threshold.
    """
    thr = family.boundary_threshold
    if not sigma > thr and not (thr == 0 and sigma >= 0 and family.boundary_values):
        raise ThresholdError(sigma, thr)
    t = float(t_imag)
    if t == 0:
        return family.identity() * 0.0
    if sigma == 0:
        return family.semigroup(1j * t)
    z = 1j * t
    r = abs(t)
    sgn = 1.0 if t > 0 else -1.0
    ext = _spectral_extent(family)
    # straight leg: geometric panels resolve e^{-s |b|} near s = 0
    s_edges = np.concatenate(([0.0], np.geomspace(min(r, 1.0 / max(ext, 1.0)) * 1e-6, r, 30)))
    s1, w1 = _quad.composite_legendre(s_edges, n_nodes)
    s1 = s1.astype(complex)
    w1 = w1 * (z - s1) ** (sigma - 1)
    # arc: s = r e^{i sgn (pi/2) v}, v in [0, 1]
    phase = r * ext * math.pi / 2
    m = int(math.ceil(phase / 2.0)) + 4
    v_edges = np.linspace(0.0, 1.0, m + 1)
    v2, w2 = _quad.composite_legendre(v_edges[:-1], n_nodes)
    a = v_edges[-2]
    sj, wj = _quad.gauss_jacobi01(max(n_nodes, 24), sigma - 1.0, 0.0)
    v3 = a + (1 - a) * sj
    w3 = wj * (1 - a) ** sigma
    v = np.concatenate((v2, v3))
    u = sgn * math.pi / 2 * v
    s2 = r * np.exp(1j * u)
    ds = 1j * s2 * sgn * math.pi / 2
    # (z - s)^{sigma-1} = (1-v)^{sigma-1} * g(v); g is smooth up to v = 1
    g = (z - s2) ** (sigma - 1)
    base = np.concatenate((w2 * g[:v2.size], w3 * g[v2.size:] / (1 - v3) ** (sigma - 1)))
    wt2 = base * ds
    nodes = np.concatenate((s1, s2))
    weights = np.concatenate((w1, wt2)) / gamma(sigma)
    total = None
    for i in range(0, nodes.size, chunk):
        T = _semigroup_unchecked(family, nodes[i:i + chunk])
        part = _weighted_sum(T, weights[i:i + chunk])
        total = part if total is None else total + part
    return total


def _semigroup_unchecked(family, s):
    """``T(s)`` on quadrature nodes strictly inside the half-plane (or at s = 0 for the straight leg)."""
    s = np.where(s == 0, 1e-300, s)
    return family.semigroup(s)


def group_check(family, sigma, t_grid=None, delta=None, omega_grid=(0.0, 0.1, 0.25, 0.5, 1.0),
                slope_tol=0.05) -> dict:
    """Check ``||S_sigma(it)|| <= M e^{omega |t|} |t|^{sigma - delta}`` on a grid of t.

    ``delta`` defaults to the family's boundary threshold.  The bound is
    deemed to hold when the ratio shows no power-law blow-up as |t| -> 0.
    """
    if t_grid is None:
        tp = np.geomspace(0.05, 5.0, 25)
        t_grid = np.concatenate((-tp[::-1], tp))
    t_grid = np.asarray(t_grid, dtype=float)
    delta = family.boundary_threshold if delta is None else float(delta)
    norms = np.array([float(family.norm(boundary_values(family, t, sigma))) for t in t_grid])
    at = np.abs(t_grid)
    shape = at ** (sigma - delta)
    Ms = np.array([np.max(norms / (shape * np.exp(w * at))) for w in omega_grid])
    k = int(np.nonzero(Ms <= Ms.min() * 1.05)[0][0])
    ratio = norms / (shape * np.exp(omega_grid[k] * at))
    small = at <= np.quantile(at, 0.3)
    slope = float(np.polyfit(np.log(at[small]), np.log(ratio[small]), 1)[0])
    holds = bool(np.isfinite(Ms[k]) and slope >= -slope_tol)
    return {"sigma": sigma, "delta": delta, "exponent": sigma - delta, "best_M": float(Ms[k]),
            "best_omega": float(omega_grid[k]), "holds": holds, "small_t_slope": slope,
            "t_grid": t_grid, "norms": norms}


__all__ = [
    "HYReport", "hy_scan", "default_lambda_grid", "RateFit", "fit_origin_rate", "SectorGrid",
    "SectorReport", "sector_scan", "estimate_order", "integrated_norms", "boundary_values",
    "group_check", "ThresholdError",
]
