"""Command-line front end: ``graphgic {gen-graph,solve,bench,coherence}``.

Machine-readable output (JSON, CSV, edge lists) goes to stdout or ``--out``;
diagnostics go to stderr. Exit status is 0 on success, 1 on bad input or a
failed method, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import ExperimentSpec, SpecError, emit_report, run_experiment
from .coherence import monotonicity_violations, mutual_coherence
from .filters import FilterError, build_filter, draw_support, simulate_instance
from .gic import GicConfig, GicEvaluator, RankError, aic, bic
from .graph import (
    EdgeListError,
    GraphError,
    adjacency_matrix,
    generate_named,
    laplacian,
    load_edge_list,
    normalize_gso_to_max_eig,
    save_edge_list,
)
from .recovery import EnumerationError, exhaustive_gic, gfoc, gm_gic, graph_bnb_gic, lasso, omp

SOLVE_METHODS = ("exhaustive", "gm-gic", "g-bnb", "gfoc", "omp", "lasso")


class CliError(Exception):
    """Bad input detected by the CLI; reported on stderr with exit status 1."""


def _parse_graph_arg(text: str) -> tuple[str, dict]:
    """``kind`` or ``kind:key=value,key=value``."""
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise CliError(f"bad graph parameter {item!r}; expected key=value")
        params[key.strip()] = float(val) if any(c in val for c in ".eE") else int(val)
    return kind.strip(), params


def _load_graph(args):
    if args.edge_list:
        path = Path(args.edge_list)
        if not path.is_file():
            raise CliError(f"edge list not found: {path}")
        return load_edge_list(path.read_text())
    if args.graph:
        kind, params = _parse_graph_arg(args.graph)
        return generate_named(kind, params, args.seed)
    raise CliError("give --edge-list PATH or --graph KIND[:k=v,...]")


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise CliError(f"bad number list {text!r}") from exc


def _read_vector(path: str) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"measurement file not found: {p}")
    vals = []
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError as exc:
            raise CliError(f"{p}: line {lineno}: not a number: {line!r}") from exc
    return np.array(vals)


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _gso(g, args):
    if args.gso == "adjacency":
        gso = adjacency_matrix(g)
    else:
        gso = laplacian(g, weighted=args.gso == "laplacian-weighted")
    return gso if args.eig_target is None else normalize_gso_to_max_eig(gso, args.eig_target)


# --- subcommands -----------------------------------------------------------


def cmd_gen_graph(args) -> int:
    g = _load_graph(args)
    _write(save_edge_list(g), args.out)
    print(f"graph: {g.n} nodes, {len(g.edges)} edges", file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    g = _load_graph(args)
    coeffs = _parse_floats(args.coeffs) if args.coeffs else [1.0] * (args.psi + 1)
    if args.coeffs and len(coeffs) != args.psi + 1:
        raise CliError(f"--coeffs has {len(coeffs)} values but --psi {args.psi} needs {args.psi + 1}")
    f = build_filter(_gso(g, args), coeffs, g.dist)
    psi = f.psi
    truth = None
    if args.measurement:
        y = _read_vector(args.measurement)
        if y.size != g.n:
            raise CliError(f"measurement has {y.size} values but the graph has {g.n} nodes")
    else:
        rng = np.random.default_rng(args.seed)
        if args.support:
            support = [int(k) for k in args.support.replace(",", " ").split()]
        else:
            support = draw_support(g, args.scenario, args.sparsity, rng)
        inst = simulate_instance(f, support, "std-normal", args.snr, args.sigma, rng)
        y, truth = inst.y, inst.support
    penalty = aic if args.penalty == "aic" else bic(g.n)
    cfg = GicConfig(penalty=penalty, sparsity=args.sparsity, sigma_n=args.sigma, screening_zeta=args.zeta)
    ev = GicEvaluator(f.h, y)

    t0 = time.perf_counter()
    m = args.method
    if m == "exhaustive":
        res = exhaustive_gic(ev, cfg, max_subsets=args.max_subsets)
    elif m == "gm-gic":
        res = gm_gic(ev, cfg, g, psi, dist=g.dist, max_subsets=args.max_subsets)
    elif m == "g-bnb":
        res = graph_bnb_gic(ev, cfg)
    elif m == "omp":
        res = omp(ev, cfg)
    elif m == "lasso":
        res = lasso(ev, cfg, lam=args.lam)
    else:
        if not args.init:
            raise CliError("--method gfoc needs --init with the starting support")
        res = gfoc(ev, cfg, g, [int(k) for k in args.init.replace(",", " ").split()], radius=args.radius, dist=g.dist)
    if args.gfoc and m != "gfoc":
        corr = gfoc(ev, cfg, g, res.support, radius=args.radius, dist=g.dist, method=f"{res.method}+gfoc")
        corr.evals += res.evals
        res = corr
    elapsed = time.perf_counter() - t0

    payload = res.to_dict()
    if truth is not None:
        payload["true_support"] = list(truth)
    _write(json.dumps(payload) + "\n", args.out)
    print(f"{res.method}: support {list(res.support)}, GIC {res.gic_value:.6g}, "
          f"{res.evals} evaluations, {elapsed:.3f} s", file=sys.stderr)
    return 0 if res.converged else 1


def cmd_bench(args) -> int:
    path = Path(args.spec)
    if not path.is_file():
        raise CliError(f"spec file not found: {path}")
    spec = ExperimentSpec.from_json(path)
    if args.seed is not None:
        spec.rng_seed = args.seed
    t0 = time.perf_counter()
    report = run_experiment(spec, jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    _write(emit_report(report, args.format), args.out)
    for r in report.rows:
        print(f"{r.method} @ {r.axis_name}={r.axis_value}: F {r.fscore_mean:.3f}, MSE {r.mse_mean:.4f}, "
              f"evals {r.evals_mean:.1f}, failures {r.failures}/{r.trials}", file=sys.stderr)
    print(f"wall time {elapsed:.1f} s", file=sys.stderr)
    return 0


def cmd_coherence(args) -> int:
    g = _load_graph(args)
    rep = mutual_coherence(laplacian(g))
    payload = rep.to_dict()
    if args.monotonicity:
        bad = monotonicity_violations(g)
        payload["monotonicity_violations"] = len(bad)
        payload["monotonicity_examples"] = [list(v) for v in bad[:5]]
    _write(json.dumps(payload) + "\n", args.out)
    return 0


# --- parser ----------------------------------------------------------------


def _graph_opts(p):
    p.add_argument("--graph", help="generator spec KIND[:key=value,...], e.g. sbm:clusters=2,per_cluster=70")
    p.add_argument("--edge-list", help="edge list file ('n' then 'u v [w]' lines)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", help="write the payload here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphgic", description="Sparse graph-signal support recovery with the GIC.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a graph and print its edge list")
    _graph_opts(p)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("solve", help="recover a sparse support from a measurement")
    _graph_opts(p)
    p.add_argument("--measurement", help="measurement file, one value per line; simulated if omitted")
    p.add_argument("--method", choices=SOLVE_METHODS, default="gm-gic")
    p.add_argument("--psi", type=int, default=None, help="filter degree (default 1, or from --coeffs)")
    p.add_argument("--coeffs", help="filter coefficients h_0..h_psi (default all ones)")
    p.add_argument("--gso", choices=("laplacian-unweighted", "laplacian-weighted", "adjacency"),
                   default="laplacian-unweighted")
    p.add_argument("--eig-target", type=float, help="rescale the GSO to this largest eigenvalue")
    p.add_argument("--sparsity", type=int, default=1, help="maximum support size s")
    p.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation (default 1)")
    p.add_argument("--zeta", type=float, help="screening threshold on single-node energies (default sigma)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.01, help="Lasso weight (default 0.01)")
    p.add_argument("--penalty", choices=("aic", "bic"), default="aic")
    p.add_argument("--gfoc", action="store_true", help="apply the neighbor-swap correction afterwards")
    p.add_argument("--radius", type=int, default=1, help="swap radius for the correction (default 1)")
    p.add_argument("--init", help="starting support for --method gfoc")
    p.add_argument("--max-subsets", type=int, default=5_000_000, help="enumeration guard for exhaustive searches")
    p.add_argument("--support", help="true support when simulating (default: random draw)")
    p.add_argument("--scenario", choices=("localized", "mixed"), default="localized")
    p.add_argument("--snr", type=float, default=20.0, help="SNR in dB when simulating")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a Monte-Carlo experiment from a JSON spec")
    p.add_argument("spec", help="experiment spec (JSON)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="report file (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, default=None, help="override the spec's rng_seed")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("coherence", help="mutual coherence of the graph Laplacian")
    _graph_opts(p)
    p.add_argument("--monotonicity", action="store_true", help="also count projection-ordering violations")
    p.set_defaults(func=cmd_coherence)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "solve":
        if args.psi is None:
            args.psi = len(_parse_floats(args.coeffs)) - 1 if args.coeffs else 1
    try:
        return args.func(args)
    except (CliError, SpecError, EdgeListError, GraphError, FilterError, EnumerationError, RankError,
            ValueError, KeyError, OSError) as exc:
        print(f"graphgic {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
