"""Command-line front end.

Exit status: 0 when every verdict passes, 2 when violations were found,
1 on execution errors (bad config, module errors).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io, plotting
from .core_ops import FamilyError, GridSpec, family_from_json, make_family

COMMANDS = ("hy-scan", "rate-fit", "euler", "sector", "boundary", "gallery", "contour-check", "reproduce")

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema", "command"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": 1},
        "command": {"enum": list(COMMANDS)},
        "family": {"type": ["object", "string"]},
        "params": {"type": "object"},
        "out": {"type": "string"},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "full": {"type": "boolean"},
    },
}

DEFAULTS = {
    "out": "out", "tol": None, "seed": 0, "full": False,
    "family": "scalar", "a": -1.0, "beta": None, "matrix": None, "grid": None,
    "kappa": 0.0, "alpha": 0.0, "omega": None, "n_max": 32,
    "k": 1, "t0": 1.0, "n_list": "8,32,128,512", "reference": "closed",
    "t_min": 1e-4, "t_max": 0.1, "n_t": 121, "expected": None,
    "kind": "E1", "exponents": "1,0.5", "n_rays": 24, "n_radii": 40,
    "sigma": 2.0, "t_list": "0.1:5:25",
    "beta_sweep": "0.5:4:0.5",
    "z": None, "n_random": 10,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config handling


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return i
    return None


def load_config(path) -> dict:
    """Read and validate a JSON config; errors name the line and field."""
    import jsonschema

    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            field = "/".join(str(p) for p in e.absolute_path) or "<root>"
            key = str(e.absolute_path[-1]) if e.absolute_path else None
            if key is None and e.validator == "additionalProperties":
                key = next((k for k in cfg if k not in CONFIG_SCHEMA["properties"]), None)
                field = key or field
            line = _line_of(text, key) if key else 1
            msgs.append(f"{path}:{line or '?'}: field '{field}': {e.message}")
        raise ConfigError("\n".join(msgs))
    return cfg


def _merge(args, cfg):
    """CLI flags win over config values, which win over defaults."""
    merged = {}
    params = dict(cfg.get("params", {})) if cfg else {}
    for key, default in DEFAULTS.items():
        cli = getattr(args, key, None)
        if cli is not None and cli is not False:
            merged[key] = cli
        elif cfg and key in cfg:
            merged[key] = cfg[key]
        elif key in params:
            merged[key] = params[key]
        else:
            merged[key] = default
    return merged


# ---------------------------------------------------------------------------
# parsing helpers


def parse_list(text, cast=float):
    """``"1,2,3"`` or ``"start:stop:count"`` (count points, inclusive) for t lists."""
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    return [cast(v) for v in str(text).split(",") if v.strip()]


def parse_range(text):
    """``start:stop:count`` (inclusive linspace) or a comma list."""
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    if ":" in str(text):
        a, b, n = str(text).split(":")
        return np.linspace(float(a), float(b), int(n))
    return np.asarray(parse_list(text), dtype=float)


def parse_sweep(text):
    """``start:stop:step`` inclusive of stop."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    a, b, s = (float(v) for v in str(text).split(":"))
    n = int(math.floor((b - a) / s + 1e-9)) + 1
    return [round(a + i * s, 12) for i in range(n)]


def build_family(p):
    fam = p["family"]
    if isinstance(fam, dict) or (isinstance(fam, str) and (fam.lstrip().startswith("{") or fam.endswith(".json"))):
        return family_from_json(fam)
    params = {}
    if fam == "scalar":
        params["a"] = float(p["a"])
    elif fam == "matrix":
        if p["matrix"] is None:
            raise FamilyError("matrix family needs --matrix")
        params["matrix"] = json.loads(p["matrix"]) if isinstance(p["matrix"], str) else p["matrix"]
    else:
        params["beta"] = float(p["beta"] if p["beta"] is not None else 0.0)
    grid = None
    if p["grid"]:
        parts = str(p["grid"]).split(",")
        grid = GridSpec(float(parts[0]), float(parts[1]), int(parts[2]),
                        spacing=parts[3] if len(parts) > 3 else "linear")
    return make_family(fam, params, grid)


def _fmt(v):
    return f"{v:#.6g}" if isinstance(v, (float, np.floating)) else str(v)


# ---------------------------------------------------------------------------
# commands; each returns (status, summary lines)


def cmd_hy_scan(p, out):
    from .estimates import hy_scan

    fam = build_family(p)
    rep = hy_scan(fam, float(p["kappa"]), float(p["alpha"]), omega=p["omega"], n_max=int(p["n_max"]))
    io.write_json(rep.to_json(full=p["full"]), out / "hy_report.json")
    n = np.arange(rep.n_range[0], rep.n_range[1] + 1)
    io.write_csv(out / "hy_per_n.csv", ["n", "per_n_max"], zip(n, rep.per_n_max))
    plotting.emit_plot(out, "hy_per_n", n, rep.per_n_max, "n", "max_lambda_value", "per-n maxima of the scan")
    lines = [f"sup = {_fmt(rep.sup_value)}, verdict {rep.verdict}",
             f"argmax (n, lambda) = ({rep.argmax[0]}, {_fmt(rep.argmax[1])})",
             f"even-n verdict {rep.even_n['verdict']}, omega+0.5 verdict {rep.shifted_omega_verdict}"]
    return (0 if rep.verdict == "bounded" else 2), lines


def cmd_rate_fit(p, out):
    from .estimates import fit_origin_rate
    from .fracint import family_trace

    fam = build_family(p)
    t = np.geomspace(float(p["t_min"]), float(p["t_max"]), int(p["n_t"]))
    trace = family_trace(fam, int(p["k"]), t)
    fit = fit_origin_rate(trace, omega=float(p["omega"] or 0.0), t_range=(float(p["t_min"]), float(p["t_max"])))
    io.write_json(fit.to_json(), out / "rate_fit.json")
    io.write_csv(out / "trace_norms.csv", ["t", "norm"], zip(t, trace.norms()))
    if p["full"]:
        io.write_trace(trace, out / "trace.csv")
    plotting.emit_plot(out, "trace_norms", t, trace.norms(), "t", "norm", f"||S_{p['k']}(t)||", logx=True, logy=True)
    lines = [f"alpha_hat = {_fmt(fit.alpha_hat)} on [{_fmt(fit.window[0])}, {_fmt(fit.window[1])}], r2 = {_fmt(fit.r_squared)}"]
    status = 0
    if p["expected"] is not None:
        tol = p["tol"] or 0.1
        if abs(fit.alpha_hat - float(p["expected"])) > tol:
            status = 2
            lines.append(f"expected {p['expected']} +- {tol}: violated")
    return status, lines


def cmd_euler(p, out):
    from .euler import euler_convergence_study

    fam = build_family(p)
    n_list = parse_list(p["n_list"], int)
    run = euler_convergence_study(fam, float(p["t0"]), int(p["k"]), n_list, reference_method=p["reference"])
    io.write_euler_run(run, out / "euler.csv")
    plotting.emit_plot(out, "euler_errors", run.n_list, run.errors, "n", "error", "integrated Euler errors",
                       logx=True, logy=True)
    tol = p["tol"] if p["tol"] is not None else 2e-3
    lines = [f"n = {n}: error {_fmt(e)}" for n, e in zip(run.n_list, run.errors)]
    ok = run.decreasing and run.errors[-1] < tol
    if not run.decreasing:
        lines.append("errors not decreasing")
    if run.errors[-1] >= tol:
        lines.append(f"tolerance unachieved: final error {_fmt(run.errors[-1])} >= {tol:g}")
    return (0 if ok else 2), lines


def cmd_sector(p, out):
    from .estimates import SectorGrid, sector_scan

    fam = build_family(p)
    ex = tuple(parse_list(p["exponents"]))
    grid = SectorGrid(n_rays=int(p["n_rays"]), n_radii=int(p["n_radii"]), boundary=(p["kind"] == "E2"))
    rep = sector_scan(fam, p["kind"], ex, grid)
    io.write_json(rep.to_json(full=p["full"]), out / "sector_report.json")
    io.write_csv(out / "sector_violations.csv", ["re_z", "im_z"],
                 [(complex(z).real, complex(z).imag) for z in rep.violations])
    z = grid.points()
    if rep.ratios is not None and len(rep.ratios) >= z.size:
        order = np.argsort(z.real)
        plotting.emit_plot(out, "sector_ratios", z.real[order], rep.ratios[: z.size][order], "Re_z", "ratio",
                           f"{p['kind']}{ex} norm / bound", logx=True, logy=True)
    lines = [f"{p['kind']}{ex}: {rep.verdict}, M = {_fmt(rep.best_M)}, omega = {_fmt(rep.best_omega)}, "
             f"violations {len(rep.violations)}"]
    return (0 if rep.verdict == "pass" else 2), lines


def cmd_boundary(p, out):
    from .estimates import boundary_values

    fam = build_family(p)
    sigma = float(p["sigma"])
    t = parse_range(p["t_list"])
    norms = np.array([float(fam.norm(boundary_values(fam, ti, sigma))) for ti in t])
    io.write_csv(out / "boundary.csv", ["t", "norm"], zip(t, norms))
    plotting.emit_plot(out, "boundary_norms", t, norms, "t", "norm", f"||S_{sigma:g}(it)||")
    M = float(np.max(norms / np.abs(t) ** sigma)) if np.all(t != 0) else float("nan")
    return 0, [f"sigma = {sigma:g}: max ||S(it)|| / |t|^sigma = {_fmt(M)} over {t.size} points"]


def cmd_gallery(p, out):
    from .core_ops import ResolventSetError
    from .gallery import beta_classify, beta_rate_sweep

    betas = parse_sweep(p["beta_sweep"])
    rows = beta_rate_sweep([b for b in betas if b <= 4])
    manifest, csv_rows, ok = [], [], True
    by_beta = {r["beta"]: r for r in rows}
    for b in betas:
        rep = beta_classify(b)
        if b > 4:
            fam = make_family("beta_multiplication", {"beta": b}, GridSpec(-8, 8, 11))
            try:
                fam.check_lambda(1.0)
                verdict = "fail"
            except ResolventSetError:
                verdict = "pass"
            manifest.append({"family": "beta_multiplication", "parameter": {"beta": b},
                             "claim": "resolvent set is empty", "verdict": verdict})
            csv_rows.append((b, rep.classification, None, None, verdict))
            ok = ok and verdict == "pass"
            continue
        r = by_beta[float(b)]
        tol = 0.05 if b == 4 else 0.1
        verdict = "pass" if (r["fitted_rate"] <= 0.05 if b == 4 else abs(r["fitted_rate"] - r["rate_once_integrated"]) <= tol) else "fail"
        ok = ok and verdict == "pass"
        manifest.append({"family": "beta_multiplication", "parameter": {"beta": b},
                         "claim": f"||S_1(t)|| = O(t^{r['rate_once_integrated']:g}) at 0 ({rep.classification})",
                         "verdict": verdict, "measured": r["fitted_rate"], "window": r["fit_window"]})
        csv_rows.append((b, rep.classification, r["rate_once_integrated"], r["fitted_rate"], verdict))
    io.write_json({"rows": manifest}, out / "gallery_manifest.json")
    io.write_csv(out / "beta_sweep.csv", ["beta", "class", "rate", "fitted_rate", "verdict"], csv_rows)
    fit_b = [r[0] for r in csv_rows if r[3] is not None]
    fit_v = [r[3] for r in csv_rows if r[3] is not None]
    if fit_b:
        plotting.emit_plot(out, "beta_rates", fit_b, fit_v, "beta", "fitted_rate", "once-integrated origin rate")
    lines = [f"beta = {b:g}: {c}, rate {_fmt(r) if r is not None else '-'}, fitted {_fmt(f) if f is not None else '-'}, {v}"
             for b, c, r, f, v in csv_rows]
    return (0 if ok else 2), lines


def cmd_contour_check(p, out):
    from .transforms import contour_invert

    fam = build_family(p)
    sigma = float(p["sigma"])
    if p["z"]:
        z = np.array([complex(v.replace(" ", "")) for v in str(p["z"]).split(",")])
    else:
        rng = np.random.default_rng(int(p["seed"]))
        r = 10 ** rng.uniform(-1, 0.7, int(p["n_random"]))
        th = rng.uniform(-1.2, 1.2, int(p["n_random"]))
        z = r * np.exp(1j * th)
    S = contour_invert(fam, z, sigma)
    ref = fam.semigroup(z) if sigma == 0 else fam.integrated(z, int(sigma))
    if sigma != 0 and int(sigma) != sigma:
        raise FamilyError("contour-check compares with closed forms; use an integer sigma")
    err = np.atleast_1d(fam.norm(S - ref)) / np.atleast_1d(fam.norm(ref))
    io.write_csv(out / "contour_check.csv", ["re_z", "im_z", "rel_error"], zip(z.real, z.imag, err))
    tol = p["tol"] if p["tol"] is not None else 1e-6
    lines = [f"max relative error {_fmt(float(err.max()))} over {z.size} points (tol {tol:g})"]
    return (0 if err.max() < tol else 2), lines


def reproduce(out, beta=None, tol=None):
    """Run the acceptance suite and write a markdown report; returns (status, lines)."""
    from . import acceptance
    from .core_ops import ResolventSetError
    from .gallery import beta_classify

    results = []
    for cid in sorted(acceptance.CRITERIA):
        kw = {"tol_scalar": tol, "tol_beta": tol} if (cid == 4 and tol is not None) else {}
        res = acceptance.run_criterion(cid, **kw)
        if cid == 4 and tol is not None and not res.passed:
            res.notes.append("tolerance unachieved")
        results.append(res)
    if beta is not None:
        rep = beta_classify(beta)
        res = acceptance.CriterionResult(11, f"injected beta = {beta:g} ({rep.classification})", False, {})
        if beta > 4:
            res.expected_failure = True
            try:
                make_family("beta_multiplication", {"beta": beta}, GridSpec(-8, 8, 11)).resolvent(1.0)
                res.passed = True
                res.measured = {"resolvent": "exists"}
            except ResolventSetError as exc:
                res.measured = {"resolvent": "none", "reason": str(exc)}
        else:
            from .gallery import beta_rate_sweep

            row = beta_rate_sweep([beta])[0]
            res.measured = {"rate": row["rate_once_integrated"], "fitted": row["fitted_rate"]}
            tol_b = 0.05 if beta == 4 else 0.1
            res.passed = (row["fitted_rate"] <= 0.05) if beta == 4 else abs(row["fitted_rate"] - row["rate_once_integrated"]) <= tol_b
        results.append(res)
    md = ["# Acceptance report", "", "| # | check | status | measured | runtime (s) | notes |", "|---|---|---|---|---|---|"]
    for r in results:
        meas = "; ".join(f"{k} = {acceptance._fmt(v)}" for k, v in r.measured.items())
        md.append(f"| {r.cid} | {r.name} | {r.status} | {meas} | {r.runtime:.2f} | {', '.join(r.notes)} |")
    status = 0 if all(r.status in ("PASS", "XFAIL") for r in results) else 2
    md += ["", f"overall: {'pass' if status == 0 else 'violations found'}", ""]
    out.mkdir(parents=True, exist_ok=True)
    (out / "reproduce.md").write_text("\n".join(md))
    io.write_json([{"id": r.cid, "name": r.name, "status": r.status, "measured": r.measured,
                    "runtime_s": r.runtime, "notes": r.notes} for r in results], out / "reproduce.json")
    return status, [r.line() + (f" ({', '.join(r.notes)})" if r.notes else "") for r in results]


def cmd_reproduce(p, out):
    return reproduce(out, beta=p["beta"], tol=p["tol"])


HANDLERS = {
    "hy-scan": cmd_hy_scan, "rate-fit": cmd_rate_fit, "euler": cmd_euler, "sector": cmd_sector,
    "boundary": cmd_boundary, "gallery": cmd_gallery, "contour-check": cmd_contour_check,
    "reproduce": cmd_reproduce,
}


# ---------------------------------------------------------------------------


def _common(sp):
    sp.add_argument("--config", help="JSON run config (\"schema\": 1)")
    sp.add_argument("--out", help="output directory (default ./out)")
    sp.add_argument("--full", action="store_true", default=None, help="include full scan data in reports")
    sp.add_argument("--seed", type=int, help="seed for random test points")
    sp.add_argument("--tol", type=float, help="tolerance override")


def _family_args(sp):
    sp.add_argument("--family", help="scalar | matrix | beta_multiplication | singular_c01, or a JSON descriptor")
    sp.add_argument("--a", type=float, help="scalar generator value")
    sp.add_argument("--beta", type=float, help="beta parameter")
    sp.add_argument("--matrix", help="matrix as JSON, e.g. [[-1,1],[0,-1]]")
    sp.add_argument("--grid", help="xmin,xmax,n[,spacing] sample grid")


def build_parser():
    ap = argparse.ArgumentParser(prog="intsemi", description="Integrated semigroup numerics.")
    _common(ap)
    sub = ap.add_subparsers(dest="command")
    sp = sub.add_parser("hy-scan", help="Hille-Yosida sup scan")
    _common(sp), _family_args(sp)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp = sub.add_parser("rate-fit", help="origin rate of ||S_k(t)||")
    _common(sp), _family_args(sp)
    sp.add_argument("--k", type=int)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--t-min", dest="t_min", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--n-t", dest="n_t", type=int)
    sp.add_argument("--expected", type=float)
    sp = sub.add_parser("euler", help="integrated Euler convergence study")
    _common(sp), _family_args(sp)
    sp.add_argument("--k", type=int)
    sp.add_argument("--t0", type=float)
    sp.add_argument("--n-list", dest="n_list", help="comma-separated orders")
    sp.add_argument("--reference", choices=("closed", "contour"))
    sp = sub.add_parser("sector", help="sector estimate scan")
    _common(sp), _family_args(sp)
    sp.add_argument("--kind", choices=("E1", "E2", "E3"))
    sp.add_argument("--exponents", help="comma-separated exponents")
    sp.add_argument("--n-rays", dest="n_rays", type=int)
    sp.add_argument("--n-radii", dest="n_radii", type=int)
    sp = sub.add_parser("boundary", help="boundary values S_sigma(it)")
    _common(sp), _family_args(sp)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--t-list", dest="t_list", help="comma list or start:stop:count")
    sp = sub.add_parser("gallery", help="beta-family sweep")
    _common(sp)
    sp.add_argument("--beta-sweep", dest="beta_sweep", help="start:stop:step")
    sp = sub.add_parser("contour-check", help="contour inversion vs closed form")
    _common(sp), _family_args(sp)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--z", help="comma-separated complex points, e.g. 1,0.5+0.5j")
    sp.add_argument("--n-random", dest="n_random", type=int)
    sp = sub.add_parser("reproduce", help="run the acceptance suite, write a markdown report")
    _common(sp)
    sp.add_argument("--beta", type=float, help="inject an extra beta-family row")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        cfg = load_config(args.config) if args.config else None
        command = args.command or (cfg or {}).get("command")
        if command is None:
            ap.print_help()
            return 1
        if cfg and args.command is None:
            args = ap.parse_args([command] + argv)
        if cfg and cfg.get("command") != command:
            raise ConfigError(f"config command {cfg.get('command')!r} does not match {command!r}")
        p = _merge(args, cfg)
        if cfg and "family" in cfg and getattr(args, "family", None) is None:
            p["family"] = cfg["family"]
        if p["tol"] is not None and not p["tol"] > 0:
            raise ConfigError("tolerances must be positive")
        out = Path(p["out"])
        out.mkdir(parents=True, exist_ok=True)
        status, lines = HANDLERS[command](p, out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for line in lines:
        print(line)
    return status


if __name__ == "__main__":
    sys.exit(main())
