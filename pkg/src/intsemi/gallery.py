"""Worked examples: Gaussian bounds, the beta family, fractional powers, the C[0,1] family."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _quad
from .core_ops import (
    AdmissibilityError,
    FamilyError,
    GridSpec,
    MatrixFamily,
    OperatorFamily,
    ResolventSetError,
    ScalarFamily,
    SingularFamily,
    make_family,
)


# ---------------------------------------------------------------------------
# Gaussian semigroup on L^p(R^n)


@dataclass(frozen=True)
class GaussianBoundQuery:
    p: float
    n_dim: int
    z: complex

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.n_dim < 1:
            raise ValueError("n_dim must be a positive integer")
        if not complex(self.z).real > 0:
            raise AdmissibilityError("Gaussian bounds need Re z > 0")

    @property
    def inv_p(self) -> float:
        return 0.0 if math.isinf(self.p) else 1.0 / self.p

    @property
    def exponent(self) -> float:
        return self.n_dim * abs(self.inv_p - 0.5)


def gaussian_bounds(q: GaussianBoundQuery) -> tuple[float, float]:
    """``2^{-n/2p} (|z|/Re z)^e <= ||T_p(z)|| <= (|z|/Re z)^e`` with ``e = n|1/p - 1/2|``."""
    z = complex(q.z)
    upper = (abs(z) / z.real) ** q.exponent
    lower = 2.0 ** (-q.n_dim * q.inv_p / 2) * upper
    return lower, upper


def gaussian_norm_envelope(p, n_dim):
    """Vectorised upper bound ``z -> (|z|/Re z)^{n|1/p-1/2|}``, used as the norm proxy."""
    e = GaussianBoundQuery(p, n_dim, 1.0).exponent

    def fn(z):
        z = np.asarray(z, dtype=complex)
        return (np.abs(z) / z.real) ** e

    return fn


# ---------------------------------------------------------------------------
# beta family


def c_beta(beta) -> float:
    """``sup_y y^{beta/2} e^{-y} = (beta/2)^{beta/2} e^{-beta/2}``; 1 at beta = 0."""
    if beta == 0:
        return 1.0
    h = beta / 2
    return h ** h * math.exp(-h)


@dataclass
class BetaFamilyReport:
    beta: float
    classification: str
    c_beta: float
    rate_once_integrated: float | None

    def to_json(self):
        return asdict(self)


def beta_classify(beta) -> BetaFamilyReport:
    if beta < 0:
        raise FamilyError(f"beta must be >= 0, got {beta}")
    if beta < 2:
        cls = "C0"
    elif beta < 4:
        cls = "class-(1,A)"
    elif beta == 4:
        cls = "Abel-summable-only"
    else:
        cls = "no-resolvent"
    if beta <= 2:
        rate = 1.0
    elif beta <= 4:
        rate = 2.0 - beta / 2
    else:
        rate = None
    return BetaFamilyReport(float(beta), cls, c_beta(beta), rate)


def beta_norm_bounds(beta, z) -> tuple[float, float]:
    """Bounds for ``||T(z)||`` of the beta family on the whole line.

    ``e^{-Re z} max(1, C |z| / (Re z)^{beta/2}) <= ||T(z)|| <= e^{-Re z} (1 + C |z| / (Re z)^{beta/2})``
    with ``C = c_beta(beta)``; the lower value is attained at x = 0 and at
    the maximiser of ``|x|^beta e^{-x^2 Re z}``.
    """
    z = complex(z)
    if not z.real > 0:
        raise AdmissibilityError("need Re z > 0")
    core = c_beta(beta) * abs(z) / z.real ** (beta / 2)
    e = math.exp(-z.real)
    return e * max(1.0, core), e * (1.0 + core)


def beta_s1_closed_form(beta, z, x) -> np.ndarray:
    """``s_1(x, z) = int_0^z e^{s a(x)} ds`` for ``a(x) = -(1+x^2) I + |x|^beta N``.

    Returns shape ``x.shape + (2, 2)``.
    """
    z = complex(z)
    if z.real < 0:
        raise AdmissibilityError("need Re z >= 0")
    if z.real == 0 and z.imag != 0 and beta > 2:
        raise AdmissibilityError("S_1 has boundary values on iR only for beta <= 2")
    x = np.asarray(x, dtype=float)
    m = 1.0 + x * x
    e = np.exp(-z * m)
    diag = (1 - e) / m
    off = np.abs(x) ** beta * (-z * e / m + (1 - e) / m ** 2)
    out = np.zeros(x.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = out[..., 1, 1] = diag
    out[..., 0, 1] = off
    return out


def beta_rate_sweep(betas, grid: GridSpec | None = None, t=None):
    """Rows (beta, class, rate, fitted rate) for a list of beta values."""
    from .estimates import fit_origin_rate
    from .fracint import family_trace

    grid = grid or GridSpec(-1000.0, 1000.0, 4001, spacing="log")
    t = np.geomspace(1e-4, 0.1, 121) if t is None else t
    rows = []
    for b in betas:
        rep = beta_classify(b)
        row = rep.to_json()
        if b <= 4:
            fam = make_family("beta_multiplication", {"beta": b}, grid)
            fit = fit_origin_rate(family_trace(fam, 1, t), omega=0.0)
            row.update(fitted_rate=fit.alpha_hat, fit_window=list(fit.window))
        else:
            row.update(fitted_rate=None, fit_window=None)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# fractional powers B^{-z}


def _as_family(B) -> OperatorFamily:
    if isinstance(B, OperatorFamily):
        return B
    arr = np.atleast_2d(np.asarray(B, dtype=complex))
    if arr.shape == (1, 1):
        return ScalarFamily(arr[0, 0])
    return MatrixFamily(arr)


def _spectrum(fam) -> np.ndarray:
    if isinstance(fam, ScalarFamily):
        return np.array([fam.a])
    return np.asarray(fam.eigenvalues)


def sectorial_constant(fam, lam=None) -> float:
    """``max (1 - lam) ||R(lam, B)||`` over sampled ``lam <= 0``."""
    lam = -np.concatenate(([0.0], np.geomspace(1e-3, 1e3, 25))) if lam is None else lam
    try:
        vals = [(1 - l) * float(fam.norm(fam.resolvent(complex(l)))) for l in lam]
    except ResolventSetError as exc:
        raise FamilyError(f"(-inf, 0] is not in the resolvent set: {exc}") from exc
    out = max(vals)
    if not math.isfinite(out):
        raise FamilyError("resolvent is unbounded on (-inf, 0]")
    return out


def keyhole_nodes(spectrum, n=16):
    """Counter-clockwise keyhole around the spectrum that avoids (-inf, 0].

    Big circle of radius ``2 max|spec| + 1``, the two lines ``Im lam = +-d``
    over ``Re lam <= 0`` and a half circle of radius d around 0 on the
    right, with ``d = dist(spectrum, (-inf, 0]) / 2``.
    """
    spec = np.asarray(spectrum, dtype=complex)
    d = 0.5 * float(np.min([_dist_to_negative_axis(s) for s in spec]))
    if d <= 0:
        raise FamilyError("spectrum touches (-inf, 0]")
    Rb = 2.0 * float(np.max(np.abs(spec))) + 1.0
    x0 = math.sqrt(Rb * Rb - d * d)
    a0 = math.atan2(d, -x0)  # upper end angle, close to pi
    nodes, weights = [], []
    # big circle, from angle -a0 to a0
    th, w = _quad.composite_legendre(np.linspace(-a0, a0, 33), n)
    lam = Rb * np.exp(1j * th)
    nodes.append(lam)
    weights.append(1j * lam * w)
    # upper line, from -x0 + id to id
    xs, wl = _quad.composite_legendre(_line_edges(x0, d), n)
    nodes.append(-xs[::-1] + 1j * d)
    weights.append(wl[::-1].astype(complex))
    # half circle around 0, clockwise from pi/2 to -pi/2
    th, w = _quad.composite_legendre(np.linspace(-math.pi / 2, math.pi / 2, 9), n)
    lam = d * np.exp(1j * th[::-1])
    nodes.append(lam)
    weights.append(-1j * lam * w[::-1])
    # lower line, from -id back to -x0 - id
    nodes.append(-xs - 1j * d)
    weights.append(-wl.astype(complex))
    lam = np.concatenate(nodes)
    wts = np.concatenate(weights) / (2j * math.pi)
    return lam, wts


def _line_edges(x0, d):
    """Panels on [0, x0], geometric away from the vertex region."""
    inner = np.geomspace(d, x0, 40) if x0 > d else np.array([x0])
    return np.unique(np.concatenate(([0.0], inner)))


def _dist_to_negative_axis(s) -> float:
    s = complex(s)
    return abs(s.imag) if s.real <= 0 else abs(s)


def fractional_power_semigroup(B, z, check=True):
    """``B^{-z} = (1/2 pi i) int lam^{-z} R(lam, B) dlam`` over a keyhole contour."""
    z = complex(z)
    if not z.real > 0:
        raise AdmissibilityError("fractional powers need Re z > 0")
    fam = _as_family(B)
    if check:
        sectorial_constant(fam)
    lam, w = keyhole_nodes(_spectrum(fam))
    R = fam.resolvent(lam)
    coef = w * lam ** (-z)
    return np.tensordot(coef, R, axes=(0, 0))


def fractional_power_norm_constant(B, z_grid):
    """``max ||B^{-z}|| sin(pi Re z) / |sin(pi z)|`` over a grid with 0 < Re z < 1."""
    fam = _as_family(B)
    ratios = []
    for z in z_grid:
        z = complex(z)
        if not 0 < z.real < 1:
            raise ValueError("z grid must lie in 0 < Re z < 1")
        n = float(fam.norm(fractional_power_semigroup(fam, z, check=False)))
        ratios.append(n * math.sin(math.pi * z.real) / abs(np.sin(math.pi * z)))
    return float(max(ratios)), np.array(ratios)


# ---------------------------------------------------------------------------
# singular family on C[0,1]


def default_f_grid():
    """Test functions of x in [0, 1]; two of them vanish at 0."""
    return {
        "one": lambda x: np.ones_like(x),
        "1+x": lambda x: 1 + x,
        "cos(3x)": lambda x: np.cos(3 * x),
        "x": lambda x: x,
        "x(1-x)": lambda x: x * (1 - x),
    }


def singular_range_defect(beta, t=1.0, f_grid=None, lam=1e3, grid: GridSpec | None = None) -> dict:
    """Indicators of non-dense range and failed Abel summability.

    For each f: ``tail``, the largest ``|[T(t) f](x)|`` over sample points with
    0 < x < 0.01 (tends to 0, so the range sits in {g(0) = 0} for
    beta > 0), and ``abel_defect = ||lam R(lam) f - f||``.
    """
    if beta < 0:
        raise FamilyError("beta must be >= 0")
    if not t > 0:
        raise AdmissibilityError("need t > 0")
    fam = make_family("singular_c01", {"beta": beta}, grid)
    x = fam.x
    f_grid = f_grid or default_f_grid()
    T = fam.semigroup(complex(t))
    near0 = np.nonzero(fam.ell[1:] > -math.log(1e-2))[0] + 1
    rows = []
    for name, f in f_grid.items():
        fv = np.asarray(f(x), dtype=complex)
        g = T.apply(fv)
        row = {"f": name, "f0": float(abs(fv[0])), "tail": float(np.max(np.abs(g[near0])))}
        try:
            Rf = fam.resolvent(complex(lam)).apply(fv)
            row["abel_defect"] = float(np.max(np.abs(lam * Rf - fv)))
        except ResolventSetError:
            row["abel_defect"] = math.inf
        rows.append(row)
    nonzero = [r["abel_defect"] for r in rows if r["f0"] > 0]
    zero = [r["abel_defect"] for r in rows if r["f0"] == 0]
    return {
        "beta": beta, "t": t, "lambda": lam,
        "degenerate": beta == 0,
        "rows": rows,
        "abel_defect_f0_nonzero": min(nonzero) if nonzero else None,
        "abel_defect_f0_zero": max(zero) if zero else None,
        "max_tail": max(r["tail"] for r in rows),
    }


def singular_degenerate(grid: GridSpec | None = None) -> bool:
    """beta = 0: ``T(t) 1 = 0`` although ``1 != 0``, so T(t) is not injective."""
    fam = make_family("singular_c01", {"beta": 0.0}, grid)
    one = np.ones(fam.x.size, dtype=complex)
    return bool(np.max(np.abs(fam.semigroup(1.0).apply(one))) == 0.0)


def singular_norm_exponent(beta, re_z=None, im_z=0.0, grid: GridSpec | None = None) -> dict:
    """Fit ``||T(z)|| ~ (Re z)^{-p}`` as Re z -> 0 and report p."""
    fam = make_family("singular_c01", {"beta": beta}, grid)
    re_z = np.geomspace(1e-8, 1e-6, 15) if re_z is None else np.asarray(re_z, dtype=float)
    norms = np.array([float(fam.norm(fam.semigroup(complex(r, im_z)))) for r in re_z])
    slope = float(np.polyfit(np.log(re_z), np.log(norms), 1)[0])
    return {"beta": beta, "exponent": -slope, "re_z": re_z, "norms": norms}


__all__ = [
    "GaussianBoundQuery", "gaussian_bounds", "gaussian_norm_envelope", "c_beta", "BetaFamilyReport",
    "beta_classify", "beta_norm_bounds", "beta_s1_closed_form", "beta_rate_sweep",
    "fractional_power_semigroup", "fractional_power_norm_constant", "sectorial_constant",
    "keyhole_nodes", "singular_range_defect", "singular_degenerate", "singular_norm_exponent",
    "default_f_grid",
]
