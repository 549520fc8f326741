"""Command-line front end: one subcommand per verification, reports on stdout or --out.

Exit status: 0 when every record passes, 1 on any failed or inconclusive
check, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .closed_forms import identities
from .curvature import FrameError, StructureError, curvature, ricci_components
from .exterior import ExactPoly
from .holonomy import (
    ConventionError,
    build_omega,
    check_closed,
    complex_structure,
    holonomy_dimension,
    nondegeneracy,
)
from .liealg import build_algebra
from .metrics import (
    MetricAnsatz,
    OdeIntegrationError,
    ProfileFormatError,
    boundary_slope,
    canonical_C,
    dump_profile,
    family_G,
    integrate_ode,
    load_profile,
    ode_residual,
    profile_W,
    refit_C,
)
from .report import Report


class UsageError(ValueError):
    pass


def _threads() -> int:
    raw = os.environ.get("HOLONOMY_LAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise UsageError(f"HOLONOMY_LAB_THREADS must be an integer, got {raw!r}") from exc
    return min(8, os.cpu_count() or 1)


def _pmap(fn, items):
    items = list(items)
    if len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(fn, items))


def parse_alpha(text: str, exact: bool):
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse alpha {text!r}") from exc
    if not 0 <= value <= 1:
        raise UsageError("alpha must lie in [0, 1]")
    return value if exact else float(value)


def parse_grid(text: str) -> list[float]:
    """``"1.5,2,3"`` or ``"start:stop:count"`` (inclusive, evenly spaced)."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            start, stop, count = float(start), float(stop), int(count)
            if count < 1:
                raise ValueError
            if count == 1:
                return [start]
            step = (stop - start) / (count - 1)
            return [start + k * step for k in range(count)]
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}") from exc
    if not grid:
        raise UsageError("grid is empty")
    return grid


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise UsageError(f"{name} must be positive")
    return value


def _fmt(x):
    return str(x) if isinstance(x, Fraction) else x


# --- subcommands ----------------------------------------------------------------


def cmd_verify_ricci(args) -> Report:
    tol = _positive("--ricci-tol", args.ricci_tol)
    if args.profile:
        try:
            profile, sample_rs = load_profile(Path(args.profile).read_text())
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        except ProfileFormatError as exc:
            raise UsageError(str(exc)) from exc
        metric = MetricAnsatz(profile)
        rs = parse_grid(args.r) if args.r else sample_rs
        params = {"profile": profile.label, "n": profile.n, "alpha": _fmt(profile.alpha), "r": rs}
    else:
        if args.n is None or args.alpha is None:
            raise UsageError("verify-ricci needs --n and --alpha (or --profile)")
        alpha = parse_alpha(args.alpha, exact=False)
        metric = family_G(args.n, alpha)
        rs = parse_grid(args.r or "1.05,1.5,2,3,5")
        params = {"n": args.n, "alpha": alpha, "r": rs}
    if min(rs) <= 1:
        raise UsageError("grid points must exceed 1")
    report = Report("verify-ricci", "numeric", params)
    n, alpha = metric.n, metric.alpha

    def work(r):
        try:
            data = curvature(metric, r)
            comps = ricci_components(data, tol=max(tol, 1e-9))
        except (FrameError, StructureError, ZeroDivisionError) as exc:
            return r, None, None, str(exc)
        return r, data, comps, None

    for r, data, comps, err in _pmap(work, rs):
        p = {"n": n, "alpha": _fmt(alpha), "r": r}
        if err is not None:
            report.add("ricci_flat", p, None, tol, False, error=err)
            continue
        value = data.scaled_ricci()
        frame = comps.frame
        report.add(
            "ricci_flat",
            p,
            value,
            tol,
            value <= tol,
            components={"R_0": frame["grr"], "R_f": frame["lam"], "R_c": frame["nu"], "R_a": frame["sigma"], "R_b": frame["Sigma"]},
            max_riem=data.max_riem,
        )
        if args.profile:
            a = float(alpha) ** 2
            prods = [
                frame["sigma"] * (r * r - a) ** 2 * (r * r + a),
                frame["Sigma"] * (r * r + a) ** 2 * (r * r - a),
                frame["nu"] * r * r * (r**4 - a * a),
            ]
            # natural size of each product; keeps the check meaningful when Ric ≈ 0
            ref = (1 + data.max_riem) * (r * r + a) ** 3
            spread = (max(prods) - min(prods)) / ref
            report.add("ricci_products_agree", p, spread, 1e-9, spread <= 1e-9, products=prods)
            q = float(ode_residual(metric.profile, r))
            rel = abs(prods[0] + q) / ref
            report.add("ricci_products_equal_minus_Qtilde", p, rel, 1e-9, rel <= 1e-9, Q_tilde=q)
    return report


def _corrupted_omega(n, alpha, kind):
    r = ExactPoly.r()
    s = ExactPoly.const(alpha * alpha)
    if kind == "sigma":
        return build_omega(n, alpha, sigma_coeff=r * r - 2 * s)
    if kind == "swap":
        return build_omega(n, alpha, sigma_coeff=-(r * r + s), Sigma_coeff=r * r - s)
    return build_omega(n, alpha)


def cmd_verify_kahler(args) -> Report:
    if args.n is None or args.alpha is None:
        raise UsageError("verify-kahler needs --n and --alpha")
    alpha = parse_alpha(args.alpha, exact=True)
    rs = parse_grid(args.r or "1.5,2,3")
    params = {"n": args.n, "alpha": str(alpha), "corrupt": args.corrupt, "r": rs}
    report = Report("verify-kahler", "exact", params)
    omega = _corrupted_omega(args.n, alpha, args.corrupt)
    alg = build_algebra(args.n)
    closed, residual = check_closed(omega, alg)
    p = {"n": args.n, "alpha": str(alpha)}
    detail = {} if closed else {"residual": residual.render(alg.names)}
    report.add("d_omega_zero", p, len(residual.terms), 0, closed, **detail)
    signs = set()
    for r in rs:
        rr = Fraction(r).limit_denominator(10**6)
        top = nondegeneracy(omega, rr)
        signs.add(top > 0)
        report.add("omega_top_power_nonzero", {**p, "r": str(rr)}, str(top), "!= 0", top != 0)
    report.add("omega_orientation_constant", p, len(signs), 1, len(signs) == 1)
    if args.corrupt == "none":
        metric = family_G(args.n, alpha)
        for r in rs:
            try:
                J, scale = complex_structure(omega, metric, float(r))
            except ConventionError as exc:
                report.add("j_squared_minus_identity", {**p, "r": r}, None, 1e-10, False, error=str(exc))
                continue
            err = float(np.max(np.abs(J @ J + np.eye(len(J)))))
            report.add("j_squared_minus_identity", {**p, "r": r}, err, 1e-10, err <= 1e-10, scale=scale)
    return report


def cmd_holonomy(args) -> Report:
    if args.n is None or args.alpha is None:
        raise UsageError("holonomy needs --n and --alpha")
    alpha = parse_alpha(args.alpha, exact=False)
    points = parse_grid(args.points or "1.3,2.1,3.7")
    rank_tol = _positive("--rank-tol", args.rank_tol)
    params = {"n": args.n, "alpha": alpha, "points": points, "rank_tol": rank_tol}
    report = Report("holonomy", "numeric", params)
    try:
        est = holonomy_dimension(family_G(args.n, alpha), points, rank_tol=rank_tol)
    except (FrameError, ConventionError) as exc:
        report.add("holonomy_dim", params, None, None, False, error=str(exc))
        return report
    target = est.target_sp if alpha == 1 else est.target_su
    p = {"n": args.n, "alpha": alpha}
    report.add(
        "holonomy_dim",
        p,
        est.dim,
        target,
        est.dim == target and est.conclusive,
        target_su=est.target_su,
        target_sp=est.target_sp,
        single_point_dims=est.single_point_dims,
        rounds=est.rounds,
        stable=est.stable,
    )
    report.add("spectral_gap", p, est.gap, 1e3, est.gap >= 1e3)
    report.add("j_commutes_with_curvature", p, est.max_j_commutator, 1e-9, est.max_j_commutator <= 1e-9,
               fraction=est.j_commuting_fraction)
    report.add("ricci_form_trace", p, est.max_ricci_form_trace, 1e-9, est.max_ricci_form_trace <= 1e-9)
    return report


def cmd_ode(args) -> Report:
    if args.n is None or args.alpha is None:
        raise UsageError("ode needs --n and --alpha")
    alpha = parse_alpha(args.alpha, exact=False)
    tol = _positive("--tol", args.tol)
    r0, r1 = args.r0, args.r1
    if not r1 > r0:
        raise UsageError("need --r1 > --r0")
    if r0 <= 1:
        raise UsageError("--r0 must exceed 1")
    closed = profile_W(args.n, alpha)
    C = canonical_C(args.n, alpha)
    if args.u0 is not None:
        u0 = args.u0
        C = refit_C(args.n, alpha, r0, u0)
        closed = profile_W(args.n, alpha, C)
    else:
        u0 = closed(r0)
    params = {"n": args.n, "alpha": alpha, "r0": r0, "r1": r1, "u0": u0, "tol": tol}
    report = Report("ode", "numeric", params)
    try:
        sol = integrate_ode(args.n, alpha, r0, u0, r1, tol=tol)
    except OdeIntegrationError as exc:
        report.add("ode_matches_closed_form", params, None, args.match_tol, False, error=str(exc))
        return report
    uc = closed(r1)
    err = abs(sol.u_end - uc) / (1 + abs(uc))
    report.add(
        "ode_matches_closed_form",
        {"n": args.n, "alpha": alpha, "r1": r1},
        err,
        args.match_tol,
        err <= args.match_tol,
        u_numeric=sol.u_end,
        u_closed=uc,
        C=float(C),
        C_canonical=float(canonical_C(args.n, alpha)),
        nfev=sol.nfev,
    )
    return report


def cmd_boundary(args) -> Report:
    if args.n is None or args.alpha is None:
        raise UsageError("boundary needs --n and --alpha")
    alpha = parse_alpha(args.alpha, exact=True)
    res = boundary_slope(args.n, alpha, method=args.method)
    expected = 2.0 if alpha == 1 else 2.0 * (args.n + 1)
    params = {"n": args.n, "alpha": str(alpha), "method": args.method}
    report = Report("boundary", "exact" if args.method == "series" else "numeric", params)
    err = abs(res.slope - expected)
    report.add("boundary_slope", params, res.slope, 1e-6, err <= 1e-6, expected=expected, flag=res.flag)
    return report


def cmd_identities(args) -> Report:
    ns = [args.n] if args.n is not None else [1, 2, 3, 4]
    alphas = [parse_alpha(a, exact=True) for a in (args.alpha or "0,1/3,1/2,9/10,1").split(",")]
    report = Report("identities", "exact", {"n": ns, "alpha": [str(a) for a in alphas]})
    jobs = [(n, a) for n in ns for a in alphas]
    for (n, a), result in zip(jobs, _pmap(lambda job: identities(*job), jobs)):
        for name, ok in result.items():
            if ok is None:
                continue
            report.add(name, {"n": n, "alpha": str(a)}, ok, True, ok)
    return report


# --- entry point ------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, help="family index (real dimension 4(n+1))")
    p.add_argument("--alpha", help="parameter in [0,1]; 'p/q' or decimal")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized controls")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holonomy-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"holonomy-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-ricci", help="Ricci-flatness on an r-grid")
    _add_common(p)
    p.add_argument("--r", help="grid: '1.5,2,3' or 'start:stop:count'")
    p.add_argument("--profile", help="JSON profile document (negative controls)")
    p.add_argument("--ricci-tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify_ricci)

    p = sub.add_parser("verify-kahler", help="exact closedness and nondegeneracy of Ω")
    _add_common(p)
    p.add_argument("--exact", action="store_true", help="exact mode (the only mode for this check)")
    p.add_argument("--r", help="radii for the nondegeneracy witness")
    p.add_argument("--corrupt", choices=("none", "sigma", "swap"), default="none",
                   help="negative control: perturb the σ coefficient or swap σ/Σ signs")
    p.set_defaults(func=cmd_verify_kahler)

    p = sub.add_parser("holonomy", help="dimension of the curvature-generated algebra")
    _add_common(p)
    p.add_argument("--points", help="radii at which curvature is sampled")
    p.add_argument("--rank-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_holonomy)

    p = sub.add_parser("ode", help="integrate the radial ODE and compare to the closed form")
    _add_common(p)
    p.add_argument("--r0", type=float, default=1.001)
    p.add_argument("--r1", type=float, default=4.0)
    p.add_argument("--u0", type=float, help="initial value (default: closed form at r0)")
    p.add_argument("--tol", type=float, default=1e-10, help="integrator tolerance")
    p.add_argument("--match-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_ode)

    p = sub.add_parser("boundary", help="opening rate of the η₁ circle at r = 1")
    _add_common(p)
    p.add_argument("--method", choices=("series", "richardson"), default="series")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("identities", help="exact closed-form identities (sympy)")
    _add_common(p)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("structure", help="dump the structure constants as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=None, command="structure")

    p = sub.add_parser("profile", help="export a closed-form profile as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--r", default="1.5,2,3")
    p.add_argument("--out")
    p.set_defaults(func=None, command="profile")
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(getattr(args, "seed", 0))
    try:
        if args.command == "structure":
            if args.n < 1:
                raise UsageError("n must be >= 1")
            _emit(build_algebra(args.n).to_json() + "\n", args.out)
            return 0
        if args.command == "profile":
            if args.n < 1:
                raise UsageError("n must be >= 1")
            prof = profile_W(args.n, parse_alpha(args.alpha, exact=True))
            _emit(dump_profile(prof, parse_grid(args.r)) + "\n", args.out)
            return 0
        if args.n is not None and args.n < 1:
            raise UsageError("n must be >= 1")
        report = args.func(args)
    except UsageError as exc:
        print(f"holonomy-lab: error: {exc}", file=sys.stderr)
        return 2
    _emit(report.render(args.format), args.out)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
