"""Command-line front end: ``pf norm | entropy | xi | criteria | kahane | check``.

Reports go to standard output as JSON (or CSV for sequence reports).  The
same arguments always produce byte-identical output; wall time is printed to
standard error and only embedded in the report with ``--timing``.

Exit codes: 0 success, 2 bad input, 3 resource cap exceeded, 4 invariant
violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from typing import Any, Sequence

import numpy as np

from . import __version__
from .algebra import delta, element_from_json, srw_element
from .boundary import furstenberg_entropy, harmonic_measure, nearest_neighbor_speed, xi_function, xi_srw_closed_form
from .checks import SUITES, run_suite
from .criteria import criteria_report
from .errors import InvariantViolation, PreconditionError, ResourceError
from .group import FreeGroup, enumerate_ball, memory_cap, parse_group
from .pnorm import TruncatedOperator, pf_norm
from .rademacher import kahane_constant_scan, standard_families
from .walks import avez_entropy, parse_measure, speed, srw_measure

EXIT_OK, EXIT_PRECONDITION, EXIT_RESOURCE, EXIT_INVARIANT = 0, 2, 3, 4
XI_SPHERE_LIMIT = 2000
XI_SAMPLE = 200


class ArgumentError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """Raise instead of printing usage, so errors become JSON objects."""

    def error(self, message):
        raise ArgumentError(message)


def clean(obj: Any) -> Any:
    """Make a report JSON-safe: numpy scalars to Python, infinities to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def parse_ps(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("inf", "infinity"):
            out.append(math.inf)
            continue
        try:
            out.append(float(tok))
        except ValueError as exc:
            raise PreconditionError(f"bad exponent {tok!r}") from exc
    return out


def parse_lengths(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise PreconditionError(f"bad length range {text!r}; use 0..8 or 0,2,4") from exc


def load_element(spec: str, group):
    if spec == "srw":
        return srw_element(group)
    if spec.startswith("delta:"):
        return delta(group, spec[6:])
    try:
        with open(spec) as fh:
            obj = json.load(fh)
    except FileNotFoundError as exc:
        raise PreconditionError(f"element file not found: {spec}") from exc
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"element file {spec} is not valid JSON: {exc}") from exc
    return element_from_json(obj, group)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(clean(r))
    return buf.getvalue()


def cmd_norm(args, cap):
    G = parse_group(args.group)
    f = load_element(args.element, G)
    T = TruncatedOperator(f, args.radius, m=args.amplify, cap=cap)
    results = []
    for p in parse_ps(args.p):
        est = pf_norm(
            f, p, args.radius, restarts=args.restarts, tol=args.tol, max_iter=args.max_iter, seed=args.seed, operator=T
        )
        results.append(est.to_dict())
    elems = T.N * T.d * T.m
    mem = 8 * (2 if T.dtype == np.complex128 else 1) * elems * 8 + 8 * T.N * len(f.terms)
    rows = [{k: r[k] for k in ("p", "q", "lower", "upper", "radius", "converged", "iterations")} for r in results]
    result = results[0] if len(results) == 1 else {"estimates": results}
    return result, rows, mem


def _measure(args):
    G = parse_group(args.group)
    return G, parse_measure(args.measure, G)


def cmd_entropy(args, cap):
    G, mu = _measure(args)
    rep = avez_entropy(mu, args.nmax, mc_samples=args.mc_samples, seed=args.seed, cap=cap)
    out = rep.to_dict(bits=args.bits)
    if mu.is_nearest_neighbor and isinstance(G, FreeGroup) and G.k >= 2 and not mu.is_degenerate:
        hf = furstenberg_entropy(mu, harmonic_measure(mu))
        out["boundary_entropy"] = hf / math.log(2) if args.bits else hf
        out["diagnostics"]["boundary_entropy_below_fekete"] = bool(hf <= rep.fekete_upper + 1e-9)
    sp = speed(mu, args.speed_nmax, cap=cap)
    out["speed"] = sp.to_dict(every=max(1, args.speed_nmax // 20))
    n_exact = rep.diagnostics["n_exact"]
    mem = 8 * G.ball_size(mu.radius * n_exact) * (len(mu.masses) + 2)
    rows = [
        {"n": n, "H": H, "H_over_n": r, "mean_length_over_n": s}
        for (n, H, r), (_, s) in zip(rep.h_sequence, rep.speed_sequence)
    ]
    return out, rows, mem


def cmd_xi(args, cap):
    G, mu = _measure(args)
    nu = harmonic_measure(mu)
    srw = mu == srw_measure(G)
    rng = np.random.default_rng(args.seed)
    rows = []
    for n in parse_lengths(args.lengths):
        if n < 0:
            raise PreconditionError("lengths must be >= 0")
        size = G.sphere_size(n)
        if size > XI_SPHERE_LIMIT:
            words = []
            for _ in range(XI_SAMPLE):
                w = [int(rng.integers(2 * G.k))]
                while len(w) < n:
                    c = int(rng.integers(2 * G.k - 1))
                    w.append(c + (c >= (w[-1] ^ 1)))
                words.append(G.from_codes(w))
            sampled = True
        else:
            ball = enumerate_ball(G, n, cap)
            words = [ball.value(i) for i in range(int(ball.offsets[n]), int(ball.offsets[n + 1]))]
            sampled = False
        vals = [xi_function(w, nu) for w in words]
        row = {"length": n, "count": len(words), "sampled": sampled, "min": min(vals), "max": max(vals)}
        row["closed_form"] = xi_srw_closed_form(n, G.k) if srw else None
        rows.append(row)
    result = {"boundary": nu.to_dict(), "xi_by_length": rows}
    return result, rows, 8 * XI_SPHERE_LIMIT


def cmd_criteria(args, cap):
    G, mu = _measure(args)
    if not isinstance(G, FreeGroup):
        raise PreconditionError("criteria are evaluated on free groups")
    sources = {}
    h, ell = args.h, args.ell
    nn = mu.is_nearest_neighbor and G.k >= 2 and not mu.is_degenerate
    if h is None:
        if nn:
            h = furstenberg_entropy(mu, harmonic_measure(mu))
            sources["h"] = "boundary-entropy"
        else:
            h = avez_entropy(mu, args.nmax, cap=cap).h_extrapolated
            sources["h"] = f"extrapolated-exact-powers(n<={args.nmax})"
    else:
        sources["h"] = "given"
    if ell is None:
        if nn:
            ell = nearest_neighbor_speed(mu)
            sources["ell"] = "closed-form" if mu.is_radial else "boundary-last-letter"
        else:
            ell = speed(mu, args.nmax, cap=cap).extrapolated
            sources["ell"] = f"two-step-increment-exact-powers(n<={args.nmax})"
    else:
        sources["ell"] = "given"
    rep = criteria_report(G.k, h, ell, args.hx, args.p).to_dict()
    rep["sources"] = sources
    return rep, None, 0


def cmd_kahane(args, cap):
    fams = standard_families(args.dim, args.n, seed=args.seed)
    rep = kahane_constant_scan(fams, args.p, trials=args.trials, seed=args.seed, space_p=args.space_p, exact_up_to=args.exact_up_to)
    if not rep["direction_holds"]:
        raise InvariantViolation("power-mean direction failed on a sample")
    return rep, None, 8 * args.trials * (args.n + args.dim)


def cmd_check(args, cap):
    results, times = run_suite(args.suite, seed=args.seed)
    failed = [r.name for r in results if not r.passed]
    rep = {
        "suite": args.suite,
        "passed": not failed,
        "n_checks": len(results),
        "n_failed": len(failed),
        "failed": failed,
        "checks": [r.to_dict() for r in results],
    }
    return rep, None, 0, times


COMMANDS = {
    "norm": cmd_norm,
    "entropy": cmd_entropy,
    "xi": cmd_xi,
    "criteria": cmd_criteria,
    "kahane": cmd_kahane,
    "check": cmd_check,
}


def build_parser() -> Parser:
    parser = Parser(prog="pf", description="p-norms of crossed-product convolution operators and random walks on free groups")
    parser.add_argument("--version", action="version", version=f"pf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    def common(sp, formats=("json",)):
        sp.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
        sp.add_argument("--format", choices=formats, default="json")
        sp.add_argument("--mem-cap", type=int, default=None, help="element cap (overrides PF_MEM_CAP)")
        sp.add_argument("--timing", action="store_true", help="embed wall time in the report (breaks byte-identity)")

    sp = sub.add_parser("norm", help="certified bounds for the PF_p norm of an element")
    sp.add_argument("--group", required=True, help="free:K, cyclic:N or product:G1,G2")
    sp.add_argument("--element", required=True, help="element JSON file, 'srw' or 'delta:<word>'")
    sp.add_argument("--p", required=True, help="exponent or comma-separated exponents")
    sp.add_argument("--radius", type=int, required=True)
    sp.add_argument("--amplify", type=int, default=1, help="amplification dimension m")
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=500)
    common(sp, ("json", "csv"))

    def measure_args(sp):
        sp.add_argument("--group", required=True)
        sp.add_argument("--measure", default="srw", help="'srw', 'lazy:<q>' or a measure JSON file")

    sp = sub.add_parser("entropy", help="Avez entropy and speed of a random walk")
    measure_args(sp)
    sp.add_argument("--nmax", type=int, default=12)
    sp.add_argument("--mc-samples", type=int, default=0)
    sp.add_argument("--speed-nmax", type=int, default=2000)
    sp.add_argument("--bits", action="store_true", help="report entropies in bits")
    common(sp, ("json", "csv"))

    sp = sub.add_parser("xi", help="Harish-Chandra function of the boundary representation by word length")
    measure_args(sp)
    sp.add_argument("--lengths", default="0..8", help="range a..b or list a,b,c")
    common(sp, ("json", "csv"))

    sp = sub.add_parser("criteria", help="evaluate the two p-thresholds for given entropies and speed")
    measure_args(sp)
    sp.add_argument("--hx", type=float, required=True, help="entropy of the compact space")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--h", type=float, default=None, help="override the Avez entropy")
    sp.add_argument("--ell", type=float, default=None, help="override the speed")
    sp.add_argument("--nmax", type=int, default=8, help="horizon when h or ell must be estimated")
    common(sp)

    sp = sub.add_parser("kahane", help="empirical Kahane-Khintchine moment ratios")
    sp.add_argument("--dim", type=int, default=8)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--space-p", type=float, default=2.0, help="l^p norm of the vector space (default 2)")
    sp.add_argument("--exact-up-to", type=int, default=12, help="enumerate all sign patterns up to this n")
    common(sp)

    sp = sub.add_parser("check", help="run invariant suites")
    sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    common(sp)
    return parser


def _emit_error(kind: str, message: str, code: int, **extra) -> int:
    err = {"error": {"type": kind, "message": message, "exit_code": code, **extra}, "tool": "pf", "version": __version__}
    sys.stdout.write(json.dumps(clean(err), indent=2) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ArgumentError as exc:
        return _emit_error("usage", str(exc), EXIT_PRECONDITION)
    config = {k: v for k, v in vars(args).items() if k not in ("timing",)}
    t0 = time.perf_counter()
    try:
        cap = memory_cap(args.mem_cap)
        config["mem_cap"] = cap
        out = COMMANDS[args.command](args, cap)
    except ResourceError as exc:
        return _emit_error("resource", str(exc), EXIT_RESOURCE, required=exc.required, cap=exc.cap)
    except InvariantViolation as exc:
        return _emit_error("invariant", str(exc), EXIT_INVARIANT)
    except PreconditionError as exc:
        return _emit_error("precondition", str(exc), EXIT_PRECONDITION)
    wall = time.perf_counter() - t0
    result, rows, mem = out[:3]
    print(f"wall_time_seconds: {wall:.3f}", file=sys.stderr)
    if args.format == "csv":
        if rows is None:
            return _emit_error("precondition", f"{args.command} has no sequence output; use --format json", EXIT_PRECONDITION)
        sys.stdout.write(rows_to_csv(rows))
    else:
        report = {
            "tool": "pf",
            "version": __version__,
            "command": args.command,
            "config": config,
            "seed": args.seed,
            "memory_estimate_bytes": int(mem),
            "result": result,
        }
        if args.timing:
            report["wall_time_seconds"] = wall
            if len(out) > 3:
                report["suite_times"] = out[3]
        sys.stdout.write(json.dumps(clean(report), indent=2, allow_nan=False) + "\n")
    if args.command == "check" and not result["passed"]:
        return EXIT_INVARIANT
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
