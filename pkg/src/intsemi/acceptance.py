"""The acceptance suite: ten quantitative checks, each with a runtime budget."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core_ops import GridSpec, make_family


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    measured: dict
    runtime: float = 0.0
    budget: float = math.inf
    expected_failure: bool = False
    notes: list = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.expected_failure:
            return "XFAIL" if not self.passed else "XPASS"
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        meas = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return (f"[{self.status}] C{self.cid} {self.name}: {meas}; "
                f"runtime {self.runtime:.2f}s (budget {self.budget:g}s)")


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _timed(cid, name, budget, fn, **kw):
    t0 = time.perf_counter()
    passed, measured = fn(**kw)
    dt = time.perf_counter() - t0
    res = CriterionResult(cid, name, bool(passed and dt < budget), measured, dt, budget)
    if dt >= budget:
        res.notes.append("runtime budget exceeded")
    return res


# ---------------------------------------------------------------------------


def _c1(tol=1e-7):
    from .core_ops import ScalarFamily
    from .fracint import frac_integrate_lambda, power_law, resolvent_function

    grid = [0.1, 0.3, 0.5, 0.7, 0.9]
    lam = np.geomspace(1.0, 100.0, 30)
    tests = {"power_law": power_law(3.0), "scalar_resolvent": resolvent_function(ScalarFamily(-1.0), 1.0)}
    worst = 0.0
    for r in tests.values():
        for a in grid:
            ra = frac_integrate_lambda(r, a)
            for b in grid:
                lhs = np.asarray(frac_integrate_lambda(ra, b)(lam)).ravel()
                rhs = np.asarray(frac_integrate_lambda(r, a + b)(lam)).ravel()
                worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
    return worst < tol, {"max_rel_dev": worst, "tol": tol}


def _c2(tol=1e-9):
    from .estimates import hy_scan

    fam = make_family("scalar", {"a": -1.0})
    r0 = hy_scan(fam, kappa=0, alpha=0, omega=-1)
    r1 = hy_scan(fam, kappa=0, alpha=0.5, omega=-1)
    ok = (abs(r0.sup_value - 1.0) < tol and r0.verdict == "bounded"
          and r1.verdict == "trivial-forced" and r1.lambda_growth >= 10)
    return ok, {"sup": r0.sup_value, "verdict": r0.verdict, "verdict_alpha_0.5": r1.verdict,
                "growth": r1.lambda_growth}


def _c3(tol=0.1):
    from .estimates import fit_origin_rate
    from .fracint import family_trace

    expected = {1: 1.0, 2: 1.0, 2.5: 0.75, 3: 0.5, 3.5: 0.25}
    grid = GridSpec(-1000.0, 1000.0, 4001, spacing="log")
    t = np.geomspace(1e-4, 0.1, 121)
    fitted = {}
    for b in list(expected) + [4]:
        fam = make_family("beta_multiplication", {"beta": b}, grid)
        fitted[b] = fit_origin_rate(family_trace(fam, 1, t), omega=0.0).alpha_hat
    ok = all(abs(fitted[b] - e) <= tol for b, e in expected.items()) and fitted[4] <= 0.05
    return ok, {"fitted": [fitted[b] for b in sorted(fitted)], "expected": [expected[b] for b in sorted(expected)] + ["<=0.05"]}


EULER_N = (8, 32, 128, 512)


def _c4(tol_scalar=2e-3, tol_beta=1e-2):
    from .euler import euler_convergence_study

    runs = {
        "scalar": (make_family("scalar", {"a": -1.0}), tol_scalar),
        "matrix": (make_family("matrix", {"matrix": [[-1.0, 1.0], [0.0, -1.0]]}), tol_scalar),
        "beta1": (make_family("beta_multiplication", {"beta": 1.0}), tol_beta),
    }
    final, ok = {}, True
    for name, (fam, tol) in runs.items():
        run = euler_convergence_study(fam, 1.0, 1, EULER_N)
        final[name] = run.errors[-1]
        ok = ok and run.decreasing and run.errors[-1] < tol
    return ok, {f"err512_{k}": v for k, v in final.items()}


def _c5(tol=1e-6):
    from .euler import PnkSpec, verify_pnk_identity

    worst = 0.0
    for n in range(6, 31):
        for k in range(1, 5):
            for lam, t in ((1.0, 1.0), (2.0, 0.5)):
                worst = max(worst, verify_pnk_identity(PnkSpec(n, k), lam, t))
    return worst < tol, {"max_rel_residual": worst, "tol": tol}


def contour_points():
    """20 points of the open right half-plane sector |arg z| <= pi/3."""
    r = [0.1, 0.5, 1.0, 2.0, 5.0]
    th = [-math.pi / 3, -math.pi / 8, math.pi / 8, math.pi / 3]
    return np.array([ri * np.exp(1j * t) for ri in r for t in th])


def _c6(tol=1e-5):
    from .fracint import TimeTrace
    from .transforms import contour_invert, contour_trace, laplace_forward

    fams = {
        "scalar": make_family("scalar", {"a": -1.0}),
        "matrix": make_family("matrix", {"matrix": [[-1.0, 2.0], [0.0, -3.0]]}),
        "beta2": make_family("beta_multiplication", {"beta": 2.0}, GridSpec(-8.0, 8.0, 201)),
    }
    z = contour_points()
    worst_inv, worst_rt = 0.0, 0.0
    for fam in fams.values():
        S = contour_invert(fam, z, 0.0)
        T = fam.semigroup(z)
        err = np.atleast_1d(fam.norm(S - T)) / np.atleast_1d(fam.norm(T))
        worst_inv = max(worst_inv, float(err.max()))
        w = max(fam.omega, 0.0)
        trace = contour_trace(fam, 0.0, np.linspace(0.05, 2.0, 8))
        for lam in w + np.geomspace(1.0, 100.0, 4):
            L = laplace_forward(trace, lam, 0.0)
            R = fam.resolvent(complex(lam))
            worst_rt = max(worst_rt, float(fam.norm(L - R) / fam.norm(R)))
    return (worst_inv < tol and worst_rt < tol), {"max_rel_inversion": worst_inv, "max_rel_roundtrip": worst_rt}


def _c7():
    from .estimates import sector_scan
    from .gallery import gaussian_norm_envelope

    fam = make_family("beta_multiplication", {"beta": 3.0}, GridSpec(-1000.0, 1000.0, 2001, spacing="log"))
    good = sector_scan(fam, "E1", (1.0, 0.5))
    bad = sector_scan(fam, "E1", (1.0, 0.2))
    re_v = np.real(bad.violations)
    clustered = bool(bad.violations) and bad.singular_slope < -0.05 and float(np.median(re_v)) < 1e-2
    gauss = []
    for p, n in ((1, 1), (1, 2), (4, 1)):
        e = n * abs(1 / p - 0.5)
        rep = sector_scan(gaussian_norm_envelope(p, n), "E1", (e, 0.0))
        gauss.append(rep.verdict == "pass" and abs(rep.best_M - 1) < 1e-12 and rep.best_omega == 0.0)
    ok = (good.verdict == "pass" and math.isfinite(good.best_M) and bad.verdict == "fail" and clustered
          and all(gauss))
    return ok, {"E1(1,0.5)": good.verdict, "M": good.best_M, "omega": good.best_omega,
                "E1(1,0.2)": bad.verdict, "n_violations": len(bad.violations),
                "median_Re_violation": float(np.median(re_v)) if len(re_v) else float("nan"),
                "gaussian_pass": all(gauss)}


def _c8():
    from .estimates import boundary_values

    fam = make_family("beta_multiplication", {"beta": 2.0}, GridSpec(-8.0, 8.0, 401))
    t = np.linspace(0.1, 5.0, 25)
    n2 = np.array([float(fam.norm(boundary_values(fam, ti, 2.0))) for ti in t])
    M = float(np.max(n2 / t ** 2))
    wide = make_family("beta_multiplication", {"beta": 2.0}, GridSpec(-1000.0, 1000.0, 4001, spacing="log"))
    tt = np.concatenate((-t[::-1], t))
    n1 = np.atleast_1d(wide.norm(wide.integrated(1j * tt, 1)))
    ratio1 = float(np.max(n1 / (3 * np.abs(tt))))
    return (M < 10 and ratio1 <= 1.0), {"M_sigma2": M, "max_S1_over_3t": ratio1}


def _c9(tol=0.1):
    from .gallery import singular_range_defect, singular_norm_exponent

    exps = {b: singular_norm_exponent(b)["exponent"] for b in (0.25, 0.5, 0.75)}
    rep = singular_range_defect(0.5, lam=1e3)
    defect = next(r["abel_defect"] for r in rep["rows"] if r["f"] == "one")
    ok = all(abs(e - b) <= tol for b, e in exps.items()) and defect >= 0.9
    return ok, {"exponents": [exps[b] for b in sorted(exps)], "abel_defect": defect}


def _c10(tol=0.01):
    from .transforms import post_widder

    sc = make_family("scalar", {"a": -1.0})
    b2 = make_family("beta_multiplication", {"beta": 2.0})
    out, ok = {}, True
    for name, fam in (("scalar", sc), ("beta2", b2)):
        ref = fam.semigroup(1.0)

        def err(n):
            return float(fam.norm(post_widder(fam, 1.0, 0.0, n) - ref) / fam.norm(ref))

        e50 = err(50)
        seq = [err(n) for n in (10, 20, 40, 80)]
        ok = ok and e50 < tol and all(b < a for a, b in zip(seq, seq[1:]))
        out[f"rel_err50_{name}"] = e50
    return ok, out


CRITERIA = {
    1: ("fractional composition (r_a)_b = r_(a+b)", 10, _c1),
    2: ("Hille-Yosida cancellation and triviality", 30, _c2),
    3: ("origin-rate map of the beta family", 120, _c3),
    4: ("integrated Euler convergence", 120, _c4),
    5: ("P_(n,k) derivative identity", 5, _c5),
    6: ("contour inversion and Laplace round trip", 60, _c6),
    7: ("sector estimates E1", 60, _c7),
    8: ("boundary values on iR", 60, _c8),
    9: ("singular C[0,1] semigroup pathology", 30, _c9),
    10: ("Post-Widder inversion", 30, _c10),
}


def run_criterion(cid, **kw) -> CriterionResult:
    name, budget, fn = CRITERIA[cid]
    try:
        return _timed(cid, name, budget, fn, **kw)
    except Exception as exc:  # a crash is a failed row, not an aborted suite
        res = CriterionResult(cid, name, False, {"error": f"{type(exc).__name__}: {exc}"}, 0.0, budget)
        return res


def run_all(ids=None) -> list[CriterionResult]:
    return [run_criterion(c) for c in (ids or sorted(CRITERIA))]


__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all", "contour_points", "EULER_N"]
