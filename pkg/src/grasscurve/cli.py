"""Command-line front end: verify curves, sample invariants, emit families,
run searches and scans, apply congruence moves.

Exit codes: 0 success, 1 domain failure (verification failed, move rejected),
2 input/parse errors.  All JSON output carries a schema_version field.
"""

import argparse
import json
import sys

import numpy as np

from . import invariants
from .curve import (
    CurveFormatError,
    curve_to_dict,
    load_curve,
    save_curve,
    verify,
)
from .families import family_d2n, family_dn
from .gauge import GaugeError, Mobius, apply_mobius, canonicalize_a1
from .invariants import NonImmersionError
from .solver import SearchProblem, feasibility_scan, search

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2


def _emit(payload: dict, args, text_lines) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    if args.format == "json":
        text = json.dumps(payload, indent=2)
    else:
        text = "\n".join(text_lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load(path: str):
    try:
        return load_curve(path)
    except (OSError, CurveFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        print(f"error: cannot parse complex number {text!r}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def cmd_verify(args) -> int:
    c = _load(args.curve)
    rep = verify(c, tol=args.tol)
    ram = None
    if c.d >= 2:
        ram = invariants.ramification(c)
    payload = {
        "report": rep.as_dict(),
        "degenerate": ram.degenerate if ram else None,
        "r_index": ram.r_index if ram else None,
    }
    lines = [
        f"curve: n={c.n} d={c.d}",
        f"is_cc: {rep.is_cc} (max residual {rep.max_residual:.3e}, tol {args.tol:g})",
        f"is_full: {rep.is_full} (rank {rep.fullness_rank} of {c.n})",
        f"degree_ok: {rep.degree_ok}",
        f"degenerate: {payload['degenerate']}",
        f"r_index: {payload['r_index']}",
    ]
    _emit(payload, args, lines)
    return EXIT_OK if rep.ok else EXIT_DOMAIN


def cmd_sample(args) -> int:
    c = _load(args.curve)
    model = invariants.curvature_model(c)
    g = invariants.g_vector(c) if c.d >= 2 else None
    xs = np.linspace(args.xmin, args.xmax, args.nx)
    ys = np.linspace(args.ymin, args.ymax, args.ny)
    rows = ["re,im,K,det_a1_sq,gauss_slack,flag"]
    for y in ys:
        for x in xs:
            z = complex(x, y)
            try:
                k = model.k_at(z)
                det = invariants.det_a1_sq(c, z, g=g) if g is not None else 0.0
                slack = 4.0 - k - 8.0 * det
                rows.append(f"{x:.12g},{y:.12g},{k:.12g},{det:.12g},{slack:.12g},ok")
            except NonImmersionError:
                rows.append(f"{x:.12g},{y:.12g},nan,nan,nan,non-immersion")
    text = "\n".join(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_family(args) -> int:
    if args.kind == "dn":
        c = family_dn(args.n)
    else:
        c = family_d2n(args.n)
    payload = curve_to_dict(c)
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_search(args) -> int:
    problem = SearchProblem(
        n=args.n,
        d=args.d,
        restarts=args.restarts,
        max_iters=args.max_iters,
        tol_feasible=args.tol,
        rng_seed=args.seed,
    )
    rep = search(problem, threads=args.threads)
    payload = {"search": rep.as_dict()}
    lines = [
        f"search n={args.n} d={args.d} restarts={rep.restarts_run}/{args.restarts}",
        f"feasible: {rep.feasible}",
        f"best residual (full candidates): {rep.best_residual}",
        f"best residual (any): {rep.best_any_residual:.3e}",
        f"note: {rep.evidence}",
    ]
    _emit(payload, args, lines)
    if rep.feasible and args.save_curve:
        save_curve(rep.best_curve, args.save_curve)
    return EXIT_OK


def cmd_scan(args) -> int:
    template = SearchProblem(
        n=args.n,
        d=max(args.d_min, 1),
        restarts=args.restarts,
        max_iters=args.max_iters,
        tol_feasible=args.tol,
        rng_seed=args.seed,
    )
    rows, _ = feasibility_scan(args.n, args.d_min, args.d_max, template, threads=args.threads)
    payload = {"scan": [r.as_dict() for r in rows]}
    lines = ["d,feasible,best_residual,best_any_residual,restarts_to_hit,evidence"]
    for r in rows:
        lines.append(
            f"{r.d},{r.feasible},{r.best_residual},{r.best_any_residual:.3e},"
            f"{r.restarts_to_hit},{r.evidence}"
        )
    _emit(payload, args, lines)
    return EXIT_OK


def cmd_mobius(args) -> int:
    c = _load(args.curve)
    m = Mobius(
        _parse_complex(args.a),
        _parse_complex(args.b),
        _parse_complex(args.c),
        _parse_complex(args.d),
    )
    try:
        moved = apply_mobius(c, m)
    except (GaugeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    text = json.dumps(curve_to_dict(moved), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_canon(args) -> int:
    c = _load(args.curve)
    try:
        canon = canonicalize_a1(c)
    except GaugeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    text = json.dumps(curve_to_dict(canon), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_probe(args) -> int:
    c = _load(args.curve)
    rep = invariants.tail_probe(c, tol=args.tol)
    payload = {"probe": rep.as_dict()}
    lines = [
        f"tau: {rep.tau}",
        f"lambda: " + ", ".join(f"lam_{k}={v:.6g}" for k, v in sorted(rep.lam.items())),
        f"residual: {rep.residual:.3e}",
        f"dim_bound_ok: {rep.dim_bound_ok}",
        f"flagged: {rep.flagged} {rep.message}",
    ]
    _emit(payload, args, lines)
    return EXIT_OK if not rep.flagged else EXIT_DOMAIN


def cmd_lemma_q(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    trials = 0
    for _ in range(args.trials):
        d = int(rng.integers(args.d_min, args.d_max + 1))
        rho = int(rng.integers(1, d + 1))
        n = int(rng.integers(2, 5))
        lam = {i: complex(rng.standard_normal(), rng.standard_normal()) for i in range(1, d + 1)}
        a1 = {
            i: rng.standard_normal(n) + 1j * rng.standard_normal(n)
            for i in range(1, d + 1)
        }
        q = invariants.lemma_q(d, rho, lam, a1)
        scale = max(max(abs(v) for v in lam.values()), 1.0) * max(
            max(np.linalg.norm(v) for v in a1.values()), 1.0
        ) ** 2
        worst = max(worst, q.norm() / scale)
        trials += 1
    payload = {"trials": trials, "worst_relative_norm": worst}
    lines = [f"trials: {trials}", f"worst |Q| / scale: {worst:.3e}"]
    _emit(payload, args, lines)
    return EXIT_OK if worst <= 1e-11 else EXIT_DOMAIN


def _add_common(sub, out=True):
    sub.add_argument("--format", choices=("json", "text"), default="text")
    if out:
        sub.add_argument("--out", default=None, help="write output to a file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="grasscurve",
        description="Constant-curvature holomorphic 2-spheres in G(2,n+2;C)",
    )
    sp = ap.add_subparsers(dest="command", required=True)

    p = sp.add_parser("verify", help="check the constant-curvature system on a curve file")
    p.add_argument("curve")
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sp.add_parser("sample", help="CSV of K, |det A_1|^2 and Gauss slack on a grid")
    p.add_argument("curve")
    p.add_argument("--nx", type=int, default=5)
    p.add_argument("--ny", type=int, default=5)
    p.add_argument("--xmin", type=float, default=-1.0)
    p.add_argument("--xmax", type=float, default=1.0)
    p.add_argument("--ymin", type=float, default=-1.0)
    p.add_argument("--ymax", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sp.add_parser("family", help="emit an explicit family curve as JSON")
    p.add_argument("--kind", choices=("dn", "d2n"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_family)

    p = sp.add_parser("search", help="feasibility search at one (n, d)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--save-curve", default=None, help="write the found curve JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_search)

    p = sp.add_parser("scan", help="feasibility scan over a degree range")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d-min", type=int, required=True)
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--threads", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sp.add_parser("mobius", help="reparametrize a curve by (az+b)/(cz+d)")
    p.add_argument("curve")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--d", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mobius)

    p = sp.add_parser("canon", help="SVD-canonical form of A_1")
    p.add_argument("curve")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_canon)

    p = sp.add_parser("probe", help="tail lambda-chain probe of the degree lower bound")
    p.add_argument("curve")
    p.add_argument("--tol", type=float, default=1e-8)
    _add_common(p)
    p.set_defaults(func=cmd_probe)

    p = sp.add_parser("lemma-q", help="randomized check that the telescoping sum vanishes")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-min", type=int, default=3)
    p.add_argument("--d-max", type=int, default=9)
    _add_common(p)
    p.set_defaults(func=cmd_lemma_q)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        raise exc
    except (CurveFormatError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GaugeError, NonImmersionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
