"""Command-line front end.

Subcommands: verify-manifold, analyze-curve, gen-legendre, check-spherical,
plot.  Options can come from a TOML config file (--config); any flag given
on the command line overrides the file.  Exit codes: 0 success, 1 invalid
input, 2 a numeric hypothesis failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import connection as cn
from . import curve as cv
from . import frenet as fr
from . import legendre as lg
from . import manifold as mf
from . import spherical as sp
from .errors import (ExprEvalError, GeometryError, HypothesisError,
                     ValidationError)

DEFAULT_SEED = 7
DEFAULT_PROBES = 100


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _pick(flag_value, cfg, *keys, default=None):
    """Flag wins; otherwise walk the config dict; otherwise default."""
    if flag_value is not None:
        return flag_value
    node = cfg
    for k in keys:
        if not isinstance(node, dict) or k not in node:
            return default
        node = node[k]
    return node


def build_manifold(args, cfg):
    name = _pick(args.manifold, cfg, "manifold", "name", default="q3")
    eps = int(_pick(args.epsilon, cfg, "manifold", "epsilon", default=1))
    if name in ("n3", "q3"):
        return mf.builtin_manifold(name, eps)
    mcfg = cfg.get("manifold", {})
    for key in ("metric", "phi", "eta", "xi"):
        if key not in mcfg:
            raise ValidationError(
                f"custom manifold {name!r} needs [manifold] {key} in the config file")
    return mf.structure_from_expressions(
        name=name, epsilon=eps,
        metric_rows=mcfg["metric"], phi_rows=mcfg["phi"],
        eta_entries=mcfg["eta"], xi_entries=mcfg["xi"],
        domain=mcfg.get("domain"), probe_box=mcfg.get("probe_box"),
    )


def build_curve(args, cfg):
    """Resolve the single configured curve source."""
    ccfg = cfg.get("curve", {})
    curve_flag = getattr(args, "curve", None)
    psi = _pick(getattr(args, "psi", None), cfg, "curve", "psi")
    sources = []
    if curve_flag is not None:
        sources.append("curve")
    elif any(k in ccfg for k in ("builtin", "csv", "x")):
        sources.append("config-curve")
    if psi is not None:
        sources.append("psi")
    if len(sources) != 1:
        raise ValidationError(
            f"exactly one curve source required, found {sources or 'none'}")

    s0 = float(_pick(getattr(args, "s0", None), cfg, "curve", "s0", default=0.0))
    lo = _pick(getattr(args, "s_from", None), cfg, "curve", "from")
    hi = _pick(getattr(args, "s_to", None), cfg, "curve", "to")

    if psi is not None:
        if lo is None or hi is None:
            raise ValidationError("the generator needs --from and --to")
        angle = lg.AngleFunction.from_text(str(psi), s0)
        return lg.generate_legendre_q3(angle, (float(lo), float(hi)))

    if curve_flag is not None:
        spec = str(curve_flag)
        if spec in ("upsilon1", "upsilon2"):
            return lg.builtin_legendre(spec)
        if spec.endswith(".csv"):
            return cv.curve_from_csv(spec)
        parts = [p for p in spec.strip().lstrip("(").rstrip(")").split(";") if p.strip()]
        if len(parts) != 3:
            raise ValidationError(
                "--curve takes a builtin name, a .csv path, or three "
                "';'-separated component expressions in s")
        dom_lo = float(lo) if lo is not None else -np.inf
        dom_hi = float(hi) if hi is not None else np.inf
        return cv.ExpressionCurve(parts, domain=(dom_lo, dom_hi), label=spec)

    if "builtin" in ccfg:
        return lg.builtin_legendre(str(ccfg["builtin"]))
    if "csv" in ccfg:
        return cv.curve_from_csv(str(ccfg["csv"]))
    dom_lo = float(lo) if lo is not None else -np.inf
    dom_hi = float(hi) if hi is not None else np.inf
    return cv.ExpressionCurve([ccfg["x"], ccfg["y"], ccfg["z"]],
                              domain=(dom_lo, dom_hi), label="config-curve")


def build_grid(args, cfg, curve):
    lo = _pick(getattr(args, "s_from", None), cfg, "curve", "from")
    hi = _pick(getattr(args, "s_to", None), cfg, "curve", "to")
    n = int(_pick(getattr(args, "n", None), cfg, "curve", "n", default=401))
    if lo is None or hi is None:
        lo, hi = curve.default_interval
    if isinstance(curve, cv.SampledCurve):
        g = curve.grid()
        mask = (g >= float(lo)) & (g <= float(hi))
        return g[mask] if mask.any() else g
    return cv.uniform_grid(float(lo), float(hi), n)


def _dump_json(payload, path):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _fmt(v):
    if v is None:
        return ""
    return f"{v:.12g}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify_manifold(args, cfg):
    M = build_manifold(args, cfg)
    tol = float(_pick(args.tol, cfg, "tolerances", "tol", default=1e-8))
    seed = int(_pick(args.seed, cfg, "output", "seed", default=DEFAULT_SEED))
    probes = mf.probe_points(M, n=DEFAULT_PROBES, seed=seed)

    ac = mf.check_almost_contact(M, probes, tol=1e-10)
    comp = mf.check_compatibility(M, probes, tol=1e-10)
    norm = cn.normality_report(M, probes, tol=1e-8)
    sig_ok = mf.metric_signature_ok(M, probes)
    phi_det_min = min(abs(mf.phi_kernel_determinant(M, p)) for p in probes)
    tf = max(cn.torsion_free_residual(M, p) for p in probes)
    fd_gap = 0.0
    if M.christoffel_closed is not None:
        fd_gap = max(
            float(np.abs(cn.christoffel(M, p, "closed_form")
                         - cn.christoffel(M, p, "finite_difference")).max())
            for p in probes[:25])
    qs_ok, qs_report = cn.check_quasi_sasakian(M, probes[:25], tol=1e-8)
    ab_samples = []
    for p in probes[:5]:
        ab = cn.alpha_beta(M, p)
        ab_samples.append({"point": [float(v) for v in p],
                           "alpha": ab.alpha, "beta": ab.beta})

    all_passed = (ac.passed and comp.passed and norm.passed and sig_ok
                  and phi_det_min > 1e-10 and tf < 1e-8)
    payload = {
        "manifold": M.name,
        "epsilon": M.epsilon,
        "seed": seed,
        "n_probes": len(probes),
        "tol": tol,
        "checks": {
            "almost_contact": ac.as_dict(),
            "compatibility": comp.as_dict(),
            "normality": norm.as_dict(),
            "signature_ok": bool(sig_ok),
            "phi_kernel_det_min": float(phi_det_min),
            "torsion_free_residual": float(tf),
            "closed_vs_fd_christoffel": float(fd_gap),
        },
        "alpha_beta_samples": ab_samples,
        "quasi_sasakian": bool(qs_ok),
        "quasi_sasakian_residuals": qs_report.as_dict(),
        "all_passed": bool(all_passed),
    }
    _dump_json(payload, args.out)
    return 0 if all_passed else 2


_CSV_COLUMNS = ["s", "x", "y", "z", "m", "speed2", "causal", "kappa_direct",
                "tau_direct", "kappa_formula", "tau_formula", "theta", "delta",
                "theta1", "etaN", "etaB", "frenet_residual", "status"]


def _analyze_row(M, curve, s):
    row = {c: None for c in _CSV_COLUMNS}
    row["s"] = s
    cs = cv.sample(M, curve, s)
    row.update(x=cs.position[0], y=cs.position[1], z=cs.position[2],
               m=cs.m, speed2=cs.speed2,
               causal=mf.causal_character(M, cs.position,
                                          mf.TangentVector(cs.velocity, cs.position)))
    status = "ok"
    try:
        fd = fr.frenet_direct(M, curve, s)
        row.update(kappa_direct=fd.kappa, tau_direct=fd.tau)
        row["frenet_residual"] = max(fr.frenet_equation_residuals(M, curve, s, data=fd))
    except GeometryError as err:
        status = type(err).__name__
    try:
        vf = fr.vframe(M, curve, s)
        row.update(theta=vf.theta, delta=vf.delta, theta1=vf.theta1)
        gkt = fr.general_kappa_tau(M, curve, s)
        row.update(kappa_formula=gkt.kappa, tau_formula=gkt.tau)
        reeb = fr.reeb_decomposition_general(M, curve, s)
        row.update(etaN=reeb.etaN, etaB=reeb.etaB)
    except GeometryError as err:
        status = type(err).__name__
    row["status"] = status
    return row


def cmd_analyze_curve(args, cfg):
    M = build_manifold(args, cfg)
    curve = build_curve(args, cfg)
    grid = build_grid(args, cfg, curve)
    tol = float(_pick(args.tol, cfg, "tolerances", "tol", default=1e-8))
    out = args.out or "analysis.csv"

    rows = [_analyze_row(M, curve, s) for s in grid]
    with open(out, "w", newline="") as fh:
        fh.write(",".join(_CSV_COLUMNS) + "\n")
        for row in rows:
            cells = [row["causal"] if c == "causal" else
                     (row["status"] if c == "status" else _fmt(row[c]))
                     for c in _CSV_COLUMNS]
            fh.write(",".join(cells) + "\n")

    ok = [r for r in rows if r["status"] == "ok"]
    gaps_k = [abs(r["kappa_direct"] - r["kappa_formula"]) for r in ok]
    gaps_t = [abs(r["tau_direct"] - r["tau_formula"]) for r in ok]
    leg = cv.is_legendre(M, curve, grid, tol=tol)
    unit_ok, unit_dev = cv.is_unit_speed(M, curve, grid, tol=tol)
    summary = {
        "manifold": M.name,
        "epsilon": M.epsilon,
        "curve": curve.label,
        "n_samples": len(rows),
        "n_flagged": len(rows) - len(ok),
        "legendre": {"is_legendre": bool(leg.is_legendre),
                     "max_abs_m": leg.max_abs_m,
                     "extra_residuals": leg.extra_residuals},
        "unit_speed": {"ok": bool(unit_ok), "max_deviation": unit_dev},
        "max_kappa_disagreement": max(gaps_k) if gaps_k else None,
        "max_tau_disagreement": max(gaps_t) if gaps_t else None,
        "max_frenet_residual": max(r["frenet_residual"] for r in ok) if ok else None,
        "csv": out,
    }
    _dump_json(summary, out.rsplit(".", 1)[0] + ".json")
    if args.fig:
        render_projections(curve, grid, args.fig, title=curve.label)
    return 0


def cmd_gen_legendre(args, cfg):
    M = build_manifold(args, cfg)
    if M.name != "q3":
        raise ValidationError("the Legendre generator targets the q3 chart")
    psi = _pick(args.psi, cfg, "curve", "psi")
    if psi is None:
        raise ValidationError("gen-legendre needs --psi")
    gen = build_curve(args, cfg)
    grid = build_grid(args, cfg, gen)
    out = args.out or "legendre.csv"

    kf, tf_, kd, td, status = [], [], [], [], []
    n_geo = 0
    for s in grid:
        try:
            k2 = lg.kappa_tau_k2(gen, s)
            kf.append(k2.kappa)
            tf_.append(k2.tau)
        except HypothesisError:
            kf.append(None)
            tf_.append(None)
        try:
            fd = fr.frenet_direct(M, gen, s)
            kd.append(fd.kappa)
            td.append(fd.tau)
            status.append("ok" if kf[-1] is not None else "geodesic")
        except GeometryError as err:
            kd.append(None)
            td.append(None)
            status.append(type(err).__name__)
            n_geo += 1

    with open(out, "w", newline="") as fh:
        fh.write("s,x,y,z,kappa_formula,tau_formula,kappa_direct,tau_direct,status\n")
        for k, s in enumerate(grid):
            p = gen.point(s)
            cells = [_fmt(v) for v in (s, *p, kf[k], tf_[k], kd[k], td[k])]
            fh.write(",".join(cells + [status[k]]) + "\n")

    pairs = [(a, b) for a, b in zip(kf, kd) if a is not None and b is not None]
    tpairs = [(a, b) for a, b in zip(tf_, td) if a is not None and b is not None]
    summary = {
        "psi": str(psi),
        "interval": [float(grid[0]), float(grid[-1])],
        "n_samples": len(grid),
        "geodesic_notice": n_geo > 0 or any(v is None for v in kf),
        "max_kappa_disagreement": max(abs(a - b) for a, b in pairs) if pairs else None,
        "max_tau_disagreement": max(abs(a - b) for a, b in tpairs) if tpairs else None,
        "csv": out,
    }
    _dump_json(summary, out.rsplit(".", 1)[0] + ".json")
    if args.fig:
        render_projections(gen, grid, args.fig, title=gen.label)
    return 0


def cmd_check_spherical(args, cfg):
    M = build_manifold(args, cfg)
    curve = build_curve(args, cfg)
    grid = build_grid(args, cfg, curve)
    tol = float(_pick(args.tol, cfg, "tolerances", "tol", default=1e-6))
    result = sp.classify_spherical(M, curve, grid, tol=tol)
    payload = {
        "manifold": M.name,
        "epsilon": M.epsilon,
        "curve": curve.label,
        "verdict": result.verdict,
        "max_abs_residual": result.max_abs_residual,
        "min_abs_residual": result.min_abs_residual,
        "center_variation_max": result.center_variation_max,
        "hypothesis": result.hypothesis,
        "residual_profile": [[s, r] for s, r in result.residual_profile],
    }
    _dump_json(payload, args.out)
    return 0


def render_projections(curve, grid, out, title="curve"):
    """Three orthographic chart-trace panels, written as deterministic SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "contactgeom"
    pts = np.array([curve.point(s) for s in grid])
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.6))
    for ax, (i, j) in zip(axes, [(0, 1), (0, 2), (1, 2)]):
        ax.plot(pts[:, i], pts[:, j], lw=1.2, color="#1f4e79")
        ax.plot(pts[0, i], pts[0, j], "o", ms=4, color="#c44536")
        ax.set_xlabel("xyz"[i])
        ax.set_ylabel("xyz"[j])
        ax.set_title(f"{'xyz'[i]}{'xyz'[j]} projection", fontsize=10)
        ax.grid(True, lw=0.3, alpha=0.5)
    fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_plot(args, cfg):
    curve = build_curve(args, cfg)
    grid = build_grid(args, cfg, curve)
    if len(grid) == 0:
        raise ValidationError("empty grid")
    out = args.out or "curve.svg"
    render_projections(curve, grid, out, title=curve.label)
    return 0


# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--config", default=None, help="TOML config file")
    sub.add_argument("--manifold", default=None, help="n3 | q3 | custom name")
    sub.add_argument("--epsilon", type=int, default=None, choices=(-1, 1))
    sub.add_argument("--curve", default=None,
                     help="upsilon1 | upsilon2 | path.csv | 'x;y;z' expressions")
    sub.add_argument("--psi", default=None, help="generator angle expression in s")
    sub.add_argument("--s0", type=float, default=None, help="generator anchor")
    sub.add_argument("--from", dest="s_from", type=float, default=None)
    sub.add_argument("--to", dest="s_to", type=float, default=None)
    sub.add_argument("--n", type=int, default=None, help="grid point count")
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--out", default=None, help="output path ('-' = stdout for JSON)")
    sub.add_argument("--fig", default=None, help="optional SVG figure path")
    sub.add_argument("--seed", type=int, default=None, help="probe RNG seed")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="contactgeom",
        description="Verification and curve analysis on almost contact "
                    "pseudo-metric 3-manifolds")
    subs = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "verify-manifold": cmd_verify_manifold,
        "analyze-curve": cmd_analyze_curve,
        "gen-legendre": cmd_gen_legendre,
        "check-spherical": cmd_check_spherical,
        "plot": cmd_plot,
    }
    for name in handlers:
        _add_common(subs.add_parser(name))
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return handlers[args.command](args, cfg)
    except (ValidationError, ExprEvalError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except HypothesisError as err:
        print(f"numeric hypothesis failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
