"""``switchstab`` command line: one JSON report per run on stdout.

Exit codes: 0 success, 1 input error, 2 method inapplicable, 3 resource
cap, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    NoContractionWarning,
    algorithm1_upper,
    best_response_upper,
    cone_lower_bound,
    rate_profile,
    subradius_norm_upper,
    sv_lower_bound,
)
from .ctsim import CtSystem, Schedule, greedy_feedback, sample_hold_simulate, shift_scaling_check
from .errors import HorizonTooLarge, LambdaNotCertifiable, MatrixFileError, MethodInapplicable
from .instances import get_instance, stanford_urbano_words
from .io import digest, load_input, serialize_matrix_set, tagged
from .lyapunov import AngularGrid, decrease_ratio, exceedance_fraction, v_hat, v_lambda
from .orbit import RationalDirection, density_gap, explore_orbit, mod4_invariant, rotation_check
from .svg import level_set_plot, line_plot

EXIT_OK, EXIT_INPUT, EXIT_INAPPLICABLE, EXIT_CAP, EXIT_NONCONVERGENCE = 0, 1, 2, 3, 4
THREADS_ENV = "SWITCHSTAB_THREADS"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); argparse's own default is 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _threads() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _write(path: str, text: str, written: list[str]) -> None:
    Path(path).write_text(text, encoding="utf-8")
    written.append(path)


def _csv(header: list[str], columns) -> str:
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(f"{float(v):.17g}" for v in row))
    return "\n".join(rows) + "\n"


def _word_text(labels, word) -> str:
    return "".join(labels[i] for i in word) if word else "Id"


def _parse_vector(text: str, dim: int, field: str) -> np.ndarray:
    try:
        x = np.array([float(s) for s in text.split(",")])
    except ValueError:
        raise InputError(f"{field} must be a comma-separated list of numbers") from None
    if x.shape != (dim,):
        raise InputError(f"{field} must have {dim} entries")
    if not np.all(np.isfinite(x)) or not np.any(x):
        raise InputError(f"{field} must be finite and nonzero")
    return x


def _parse_words(text: str, m: int) -> list[tuple[int, ...]]:
    """Comma-separated mode strings, 1-based, leftmost mode applied last (``21`` = A2 A1)."""
    words = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok or not tok.isdigit() or any(not 1 <= int(c) <= m for c in tok):
            raise InputError(f"--words entry {tok!r} must be a string of mode numbers 1..{m}")
        words.append(tuple(int(c) - 1 for c in tok))
    return words


# ---------------------------------------------------------------------------
# subcommands


def cmd_bounds(args) -> dict:
    name, ms, dig = load_input(args.input)
    labels = ms.labels
    payload: dict = {"method": args.method}
    if args.method == "sv":
        rep = sv_lower_bound(ms, args.t_max)
        payload["per_horizon"] = [{"t": t, "lower": tagged(v, "certified")} for t, v in rep.per_horizon]
        payload["best"] = tagged(rep.best, "certified")
    elif args.method == "cone":
        rep, cert = cone_lower_bound(ms, args.t_max)
        payload["horizon"] = args.t_max
        payload["lambda"] = tagged(cert.lam, "certified")
        payload["best"] = tagged(rep.best, "certified")
        payload["witness"] = tagged([float(v) for v in cert.v], "certified")
        payload["witness_residual"] = tagged(cert.residual(ms), "diagnostic")
    elif args.method == "alg1":
        reps = algorithm1_upper(ms, args.t_max, args.grid)
        status = "certified" if reps[0].is_certified else "diagnostic"
        payload["grid"] = args.grid
        payload["per_horizon"] = [
            {
                "t": r.horizon,
                "empirical": tagged(r.empirical, "empirical"),
                "certified": tagged(r.certified, status),
                "lipschitz_pad": tagged(r.lipschitz_pad, "diagnostic"),
            }
            for r in reps
        ]
        payload["best"] = tagged(min(r.certified for r in reps), status)
    else:
        words = _parse_words(args.words, len(ms)) if args.words else None
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NoContractionWarning)
            rep, bmap = best_response_upper(ms, args.t_bar, args.grid, words=words)
        payload["grid"] = args.grid
        payload["t_bar"] = rep.horizon
        payload["candidates"] = "listed" if words else "all words up to t_bar"
        payload["empirical"] = tagged(rep.empirical, "empirical")
        payload["certified"] = tagged(rep.certified, "certified")
        payload["lipschitz_pad"] = tagged(rep.lipschitz_pad, "diagnostic")
        payload["arcs"] = [
            {"start": a.start, "end": a.end, "word": _word_text(labels, a.word), "rate": tagged(a.rate, "certified")}
            for a in bmap.arcs
        ]
        payload["warnings"] = [str(w.message) for w in caught]
    return {"input": {"name": name, "digest": dig}, "payload": payload}


def cmd_lyap(args) -> dict:
    name, ms, dig = load_input(args.input)
    grid = AngularGrid(args.grid)
    if ms.dim != 2:
        raise MethodInapplicable("lyap needs a 2-dimensional system")
    if args.kind == "vhat":
        table = v_hat(ms, args.lam, grid, max_iter=args.max_iter, tol=args.tol)
    else:
        table = v_lambda(ms, args.lam, args.T, grid)
    if not table.converged:
        raise LambdaNotCertifiable(
            f"no convergence after {table.iterations} sweeps (increment {table.residual:.3g})"
        )
    ratio_mid = decrease_ratio(table, ms)
    ratio_nodes = decrease_ratio(table, ms, grid.angles)
    lo, hi = table.bounds()
    payload = {
        "kind": args.kind,
        "lambda": args.lam,
        "grid": args.grid,
        "converged": table.converged,
        "iterations": table.iterations,
        "final_increment": tagged(table.residual, "diagnostic"),
        "value_min": tagged(lo, "empirical"),
        "value_max": tagged(hi, "empirical"),
        "interpolation_error": tagged(table.interpolation_error(), "diagnostic"),
        "max_decrease_ratio": tagged(float(ratio_mid.max()), "empirical"),
        "exceedance_fraction": tagged(exceedance_fraction(ratio_mid, args.lam), "diagnostic"),
        "exceedance_fraction_nodes": tagged(exceedance_fraction(ratio_nodes, args.lam), "diagnostic"),
    }
    written: list[str] = []
    if args.csv:
        _write(args.csv, _csv(["angle", "value"], [grid.angles, table.values]), written)
    if args.plot:
        title = f"level set V = 1 ({args.kind}, lambda = {args.lam:g})"
        _write(args.plot, level_set_plot(grid.angles, table.values, title), written)
        ratio_path = str(Path(args.plot).with_name(Path(args.plot).stem + "-ratio.svg"))
        svg = line_plot(
            grid.midpoints, ratio_mid, "decrease ratio min_A V(Az)/V(z)", "angle", "ratio",
            hlines={f"lambda = {args.lam:g}": args.lam},
        )
        _write(ratio_path, svg, written)
    payload["files"] = written
    return {"input": {"name": name, "digest": dig}, "payload": payload}


def _rotation_payload(density_ns) -> dict:
    rot = rotation_check()
    return {
        "cos_2theta": tagged(rot.cos_2theta, "empirical"),
        "theta": tagged(rot.theta, "empirical"),
        "trace": tagged(rot.trace, "empirical"),
        "eigen_moduli": tagged(list(rot.eigen_moduli), "empirical"),
        "nonreal_eigenvalues": rot.nonreal,
        "density_gaps": [{"n": n, "max_gap": tagged(density_gap(n, rot.theta), "diagnostic")} for n in density_ns],
    }


def cmd_orbit(args) -> dict:
    queries = []
    for q in args.query or []:
        try:
            queries.append(RationalDirection.parse(q))
        except ValueError:
            raise InputError(f"--query {q!r} must look like p/q with integers") from None
    payload: dict = {}
    if not args.rotation:
        graph = explore_orbit(args.depth, node_cap=args.node_cap)
        payload["depth"] = args.depth
        payload["node_count"] = len(graph)
        payload["invariant_violations"] = sum(not mod4_invariant(d) for d in graph.nodes)
        payload["queries"] = [{"tangent": str(d), "present": d in graph} for d in queries]
        written: list[str] = []
        if args.edges:
            _write(args.edges, graph.to_edge_list(), written)
        payload["files"] = written
    payload["rotation"] = _rotation_payload(args.density_n)
    return {"input": None, "payload": payload}


def cmd_case_stanford(args) -> dict:
    inst = get_instance("stanford-urbano")
    ms = inst.matrix_set
    words = stanford_urbano_words()
    angles = 2 * math.pi * np.arange(args.grid) / args.grid
    profile = rate_profile(ms, words, angles)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoContractionWarning)
        br, _ = best_response_upper(ms, 0, args.grid, words=words)
    sv = sv_lower_bound(ms, args.t_sv)
    sub = subradius_norm_upper(ms, args.t_sub)
    alg1 = algorithm1_upper(ms, 4, 4096)[-1]
    payload = {
        "words": [_word_text(ms.labels, w) for w in words],
        "grid": args.grid,
        "max_F": tagged(float(profile.max()), "empirical"),
        "best_response_certified": tagged(br.certified, "certified"),
        "sv_lower_bound": tagged(sv.best, "certified"),
        "subradius_norm_bound": tagged(sub.value, "certified"),
        "subradius_norm_word": _word_text(ms.labels, sub.word),
        "reference_0.9^(1/4)": tagged(0.9**0.25, "diagnostic"),
        "algorithm1_t4_grid4096": tagged(alg1.certified, "certified"),
    }
    written: list[str] = []
    if args.csv:
        _write(args.csv, _csv(["alpha", "F"], [angles, profile]), written)
    if args.plot:
        svg = line_plot(angles, profile, "F(alpha) over 13 products", "alpha", "F", hlines={"1/2": 0.5})
        _write(args.plot, svg, written)
    payload["files"] = written
    return {"input": {"name": "stanford-urbano", "digest": digest(serialize_matrix_set(ms))}, "payload": payload}


def cmd_ct(args) -> dict:
    name, ms, dig = load_input(args.input)
    if not (args.delta > 0 and args.T >= args.delta):
        raise InputError("--delta must be positive and --T at least --delta")
    x0 = _parse_vector(args.x0, ms.dim, "--x0") if args.x0 else np.eye(ms.dim)[0]
    sys_ = CtSystem(ms)
    traj = sample_hold_simulate(sys_, greedy_feedback(sys_, args.delta), args.delta, x0, args.T)
    norms = traj.norms
    elapsed = float(traj.sample_times[-1])
    final = float(norms[-1])
    decay = (final / norms[0]) ** (args.delta / elapsed) if final > 0 else 0.0
    payload: dict = {
        "delta": args.delta,
        "T": args.T,
        "steps": len(traj.choices),
        "final_norm": tagged(final, "empirical"),
        "max_norm": tagged(float(norms.max()), "empirical"),
        "per_step_decay": tagged(decay, "empirical"),
        "diverged": traj.diverged,
        "modes_used": sorted({ms.labels[int(c)] for c in traj.choices}),
    }
    if args.shift_gamma is not None:
        durations = np.diff(traj.sample_times)
        sched = Schedule(tuple((int(c), float(h)) for c, h in zip(traj.choices, durations)))
        rep = shift_scaling_check(sys_, args.shift_gamma, sched, x0)
        payload["shift_check"] = {
            "gamma": args.shift_gamma,
            "max_rel_error": tagged(rep.max_rel_error, "diagnostic"),
            "passed": rep.passed,
        }
    written: list[str] = []
    if args.csv:
        _write(args.csv, traj.to_csv(), written)
    payload["files"] = written
    return {"input": {"name": name, "digest": dig}, "payload": payload}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="switchstab", description="Stabilization-radius bounds and Lyapunov tools for switched systems.")
    p.add_argument("--version", action="version", version=f"switchstab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="lower or upper bound on the stabilization radius")
    b.add_argument("input", help="instance name or matrix-set JSON file")
    b.add_argument("--method", choices=["sv", "cone", "alg1", "best-response"], required=True)
    b.add_argument("--t-max", type=int, default=4, help="horizon for sv, cone, alg1")
    b.add_argument("--t-bar", type=int, default=9, help="longest candidate product for best-response")
    b.add_argument("--grid", type=int, default=4096, help="directions on the full circle")
    b.add_argument("--words", help="best-response candidates, e.g. 2,21,211 (mode numbers from 1)")
    b.set_defaults(func=cmd_bounds)

    ly = sub.add_parser("lyap", help="control-Lyapunov value table")
    ly.add_argument("input")
    ly.add_argument("--kind", choices=["vhat", "vlam"], default="vhat")
    ly.add_argument("--lambda", dest="lam", type=float, required=True)
    ly.add_argument("--grid", type=int, default=4096, help="nodes on [0, pi)")
    ly.add_argument("--tol", type=float, default=1e-9)
    ly.add_argument("--max-iter", type=int, default=100_000)
    ly.add_argument("--T", type=int, default=24, help="horizon for vlam")
    ly.add_argument("--csv", help="write angle,value table here")
    ly.add_argument("--plot", help="write the level set here; the ratio plot goes to <stem>-ratio.svg")
    ly.set_defaults(func=cmd_lyap)

    o = sub.add_parser("orbit", help="integer orbit of the x1 axis")
    o.add_argument("--depth", type=int, default=12)
    o.add_argument("--query", action="append", help="tangent p/q to look up (repeatable)")
    o.add_argument("--rotation", action="store_true", help="only the rotation and density analysis")
    o.add_argument("--density-n", type=int, action="append", help="point counts for the density gap")
    o.add_argument("--node-cap", type=int, default=10**6)
    o.add_argument("--edges", help="write the edge list here")
    o.set_defaults(func=cmd_orbit)

    c = sub.add_parser("case-stanford", help="one-shot reproduction of the planar case study")
    c.add_argument("--grid", type=int, default=8192)
    c.add_argument("--t-sv", type=int, default=6)
    c.add_argument("--t-sub", type=int, default=10)
    c.add_argument("--csv", help="write alpha,F here")
    c.add_argument("--plot", help="write the F(alpha) plot here")
    c.set_defaults(func=cmd_case_stanford)

    t = sub.add_parser("ct", help="continuous-time sample-and-hold greedy feedback")
    t.add_argument("input")
    t.add_argument("--delta", type=float, default=0.1)
    t.add_argument("--T", type=float, default=1.0)
    t.add_argument("--x0", help="comma-separated initial state (default e1)")
    t.add_argument("--shift-gamma", type=float)
    t.add_argument("--csv", help="write the trajectory here")
    t.set_defaults(func=cmd_ct)
    return p


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, allow_nan=False) + "\n")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "density_n", "absent") is None:
        args.density_n = [100, 1000, 10000]
    doc: dict = {"command": args.command, "argv": argv, "version": __version__}
    start = time.perf_counter()
    code = EXIT_OK
    try:
        doc["threads"] = _threads()
        doc.update(args.func(args))
    except (InputError, MatrixFileError, ValueError, OSError) as exc:
        code, kind = EXIT_INPUT, "input error"
        doc["error"] = {"kind": kind, "message": str(exc)}
    except MethodInapplicable as exc:
        code = EXIT_INAPPLICABLE
        doc["error"] = {"kind": "method inapplicable", "message": str(exc)}
    except HorizonTooLarge as exc:
        code = EXIT_CAP
        doc["error"] = {"kind": "resource cap", "message": str(exc)}
    except LambdaNotCertifiable as exc:
        code = EXIT_NONCONVERGENCE
        doc["error"] = {"kind": "lambda not certifiable", "message": str(exc)}
    doc["timing"] = {"wall_time_s": round(time.perf_counter() - start, 6)}
    _emit(doc)
    if code:
        print(f"switchstab: {doc['error']['kind']}: {doc['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
