"""Monte-Carlo benchmark of the recovery methods.

An :class:`ExperimentSpec` (usually read from JSON) fixes the graph, filter,
signal and noise models, a sweep axis, and the methods to run. Every trial
draws from its own random stream, derived from ``(rng_seed, point, trial)``,
so results do not depend on scheduling and parallel runs reproduce serial
ones exactly.

Example spec::

    {
      "graph": {"kind": "sbm", "params": {"clusters": 2, "per_cluster": 70, "p_intra": 0.0857}},
      "filter": {"psi": 4, "gso": "laplacian-unweighted", "eig_target": 12},
      "signal": {"scenario": "localized", "s": 4, "pool": {"cluster": 0}},
      "noise": {"sigma_n": 0.01, "snr_db": [20]},
      "methods": [{"name": "gm-gic"}, {"name": "omp", "gfoc": true}],
      "trials": 300,
      "rng_seed": 1
    }
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .filters import build_filter, decaying_coeffs, draw_support, simulate_instance
from .gic import GicConfig, GicEvaluator, LinearPenalty, aic, bic
from .graph import (
    Graph,
    GsoMatrix,
    adjacency_matrix,
    generate_named,
    laplacian,
    load_edge_list,
    normalize_gso_to_max_eig,
)
from .recovery import exhaustive_gic, gfoc, gm_gic, graph_bnb_gic, lasso, omp

METHODS = ("gic", "gm-gic", "g-bnb", "omp", "lasso")
CSV_COLUMNS = (
    "method",
    "axis_name",
    "axis_value",
    "fscore_mean",
    "fscore_se",
    "mse_mean",
    "mse_se",
    "evals_mean",
    "failures",
    "trials",
)
FILTER_AXES = ("psi",)
NOISE_AXES = ("snr_db", "sigma_n")


class SpecError(ValueError):
    """Invalid experiment specification."""


def f_score(truth: Iterable[int], estimate: Iterable[int]) -> float:
    """``2tp / (2tp + fp + fn)`` between two supports (1 when both are empty)."""
    t, e = set(truth), set(estimate)
    tp = len(t & e)
    denom = 2 * tp + len(e - t) + len(t - e)
    return 1.0 if denom == 0 else 2 * tp / denom


def mse(x_true, x_hat) -> float:
    """Squared distance between the unit-normalized signals.

    A zero estimate scores 1, the squared norm of the normalized truth.
    """
    x = np.asarray(x_true, dtype=float)
    xh = np.asarray(x_hat, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("true signal is zero; MSE of normalized signals is undefined")
    nh = np.linalg.norm(xh)
    if nh == 0:
        return 1.0
    d = x / nx - xh / nh
    return float(d @ d)


@dataclass
class MethodSpec:
    name: str
    gfoc: bool = False
    zeta: float | None = None
    lam: float = 0.01
    radius: int = 1
    max_subsets: int | None = None

    @classmethod
    def from_dict(cls, d: dict | str) -> "MethodSpec":
        if isinstance(d, str):
            d = {"name": d}
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        unknown = set(d) - {"name", "gfoc", "zeta", "lam", "radius", "max_subsets"}
        if unknown:
            raise SpecError(f"unknown method option(s) {sorted(unknown)}")
        m = cls(**d)
        if m.name not in METHODS:
            raise SpecError(f"unknown method {m.name!r}; choose from {', '.join(METHODS)}")
        return m

    def labels(self) -> list[str]:
        return [self.name, f"{self.name}+gfoc"] if self.gfoc else [self.name]

    def to_dict(self) -> dict:
        d = {"name": self.name, "gfoc": self.gfoc, "lambda": self.lam, "radius": self.radius}
        if self.zeta is not None:
            d["zeta"] = self.zeta
        if self.max_subsets is not None:
            d["max_subsets"] = self.max_subsets
        return d


@dataclass
class ExperimentSpec:
    """Everything needed to replay a benchmark.

    ``graph`` is ``{"kind": ..., "params": {...}}`` for a generator or
    ``{"edge_list": path}``. ``filter`` holds ``psi``, optional ``coeffs``
    (a list, or ``{"decay": r}``; all ones by default), ``gso`` and
    ``eig_target``. ``signal`` holds ``scenario``, ``s``, ``values`` and an
    optional node ``pool`` (a list, or ``{"cluster": c}`` for SBM graphs).
    ``sweep`` names one axis (``snr_db``, ``sigma_n``, ``psi`` or any graph
    parameter) and its values; without it the SNR grid is swept.
    """

    graph: dict
    filter: dict
    signal: dict
    noise: dict
    methods: list[MethodSpec]
    trials: int
    rng_seed: int = 0
    sweep: dict | None = None
    regenerate_graph: bool = False
    penalty: str = "aic"
    base_dir: Path | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentSpec":
        d = dict(d)
        known = {"graph", "filter", "signal", "noise", "methods", "trials", "rng_seed", "sweep",
                 "regenerate_graph", "penalty"}
        unknown = set(d) - known
        if unknown:
            raise SpecError(f"unknown spec field(s) {sorted(unknown)}")
        missing = {"graph", "filter", "signal", "noise", "methods", "trials"} - set(d)
        if missing:
            raise SpecError(f"missing spec field(s) {sorted(missing)}")
        d["methods"] = [MethodSpec.from_dict(m) for m in d["methods"]]
        return cls(**d, base_dir=base_dir)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)

    def to_dict(self) -> dict:
        d = {
            "graph": self.graph,
            "filter": self.filter,
            "signal": self.signal,
            "noise": self.noise,
            "methods": [m.to_dict() for m in self.methods],
            "trials": self.trials,
            "rng_seed": self.rng_seed,
            "regenerate_graph": self.regenerate_graph,
            "penalty": self.penalty,
        }
        if self.sweep is not None:
            d["sweep"] = self.sweep
        return d

    def validate(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise SpecError("trials must be a positive integer")
        if not self.methods:
            raise SpecError("at least one method is required")
        if "psi" not in self.filter:
            raise SpecError("filter.psi is required")
        if "s" not in self.signal:
            raise SpecError("signal.s is required")
        if not ("kind" in self.graph or "edge_list" in self.graph):
            raise SpecError("graph needs 'kind' or 'edge_list'")
        if self.penalty not in ("aic", "bic"):
            raise SpecError("penalty must be 'aic' or 'bic'")
        if self.sweep is None:
            grid = self.noise.get("snr_db")
            grid = [grid] if isinstance(grid, (int, float)) else grid
            if not grid:
                raise SpecError("noise.snr_db must be a nonempty grid")
        else:
            if "axis" not in self.sweep or not self.sweep.get("values"):
                raise SpecError("sweep needs an axis and a nonempty list of values")
            if self.sweep["axis"] not in FILTER_AXES + NOISE_AXES and "kind" not in self.graph:
                raise SpecError(f"cannot sweep {self.sweep['axis']!r} on a fixed edge list")
            if self.sweep["axis"] != "snr_db":
                snr = self.noise.get("snr_db")
                if not isinstance(snr, (int, float)) and (not isinstance(snr, list) or len(snr) != 1):
                    raise SpecError("noise.snr_db must be a single value when sweeping another axis")

    def grid(self) -> tuple[str, list]:
        if self.sweep is None:
            snr = self.noise["snr_db"]
            return "snr_db", [snr] if isinstance(snr, (int, float)) else list(snr)
        return self.sweep["axis"], list(self.sweep["values"])

    def labels(self) -> list[str]:
        return [lab for m in self.methods for lab in m.labels()]


@dataclass
class PointSummary:
    method: str
    axis_name: str
    axis_value: float
    fscore_mean: float
    fscore_se: float
    mse_mean: float
    mse_se: float
    evals_mean: float
    failures: int
    trials: int

    def row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


@dataclass
class BenchmarkReport:
    rows: list[PointSummary] = field(default_factory=list)
    wall_seconds: float | None = None

    def get(self, method: str, axis_value=None) -> PointSummary:
        for r in self.rows:
            if r.method == method and (axis_value is None or r.axis_value == axis_value):
                return r
        raise KeyError((method, axis_value))


# --- per-trial execution -------------------------------------------------


def _point_params(spec: ExperimentSpec, axis: str, value) -> tuple[dict, dict, dict]:
    graph = json.loads(json.dumps(spec.graph))
    filt = dict(spec.filter)
    noise = dict(spec.noise)
    if isinstance(noise.get("snr_db"), list) and len(noise["snr_db"]) == 1:
        noise["snr_db"] = noise["snr_db"][0]
    if axis in NOISE_AXES:
        noise[axis] = value
    elif axis in FILTER_AXES:
        filt[axis] = value
    else:
        graph.setdefault("params", {})[axis] = value
    return graph, filt, noise


def _make_graph(gspec: dict, base_dir: Path | None, seed) -> Graph:
    if "edge_list" in gspec:
        p = Path(gspec["edge_list"])
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return load_edge_list(p.read_text())
    return generate_named(gspec["kind"], gspec.get("params", {}), seed)


def _make_gso(g: Graph, fspec: dict) -> GsoMatrix:
    kind = fspec.get("gso", "laplacian-unweighted")
    if kind == "laplacian-unweighted":
        gso = laplacian(g)
    elif kind == "laplacian-weighted":
        gso = laplacian(g, weighted=True)
    elif kind == "adjacency":
        gso = adjacency_matrix(g)
    else:
        raise SpecError(f"unsupported GSO kind {kind!r}")
    target = fspec.get("eig_target")
    return gso if target is None else normalize_gso_to_max_eig(gso, float(target))


def _coeffs(fspec: dict) -> list[float]:
    psi = int(fspec["psi"])
    c = fspec.get("coeffs")
    if c is None:
        return [1.0] * (psi + 1)
    if isinstance(c, dict):
        return decaying_coeffs(psi, float(c["decay"]), float(c.get("h0", 1.0)))
    if len(c) != psi + 1:
        raise SpecError(f"{len(c)} coefficients given for psi={psi}")
    return [float(v) for v in c]


def _pool(g: Graph, gspec: dict, sspec: dict):
    pool = sspec.get("pool")
    if pool is None:
        return None
    if isinstance(pool, dict):
        per = gspec.get("params", {}).get("per_cluster")
        if per is None:
            raise SpecError("a cluster pool needs an SBM graph with per_cluster")
        c = int(pool["cluster"])
        return range(c * per, (c + 1) * per)
    return [int(k) for k in pool]


def _run_method(m: MethodSpec, ev: GicEvaluator, cfg: GicConfig, g: Graph, psi: int):
    if m.zeta is not None:
        cfg = GicConfig(cfg.penalty, cfg.sparsity, cfg.sigma_n, m.zeta, cfg.rank_tolerance)
    kw = {} if m.max_subsets is None else {"max_subsets": m.max_subsets}
    if m.name == "gic":
        return exhaustive_gic(ev, cfg, **kw)
    if m.name == "gm-gic":
        return gm_gic(ev, cfg, g, psi, dist=g.dist, **kw)
    if m.name == "g-bnb":
        return graph_bnb_gic(ev, cfg)
    if m.name == "omp":
        return omp(ev, cfg)
    return lasso(ev, cfg, lam=m.lam)


def _trial_metrics(x_true, support, res, n):
    x_hat = res.full_signal(n)
    if not np.all(np.isfinite(x_hat)):
        raise FloatingPointError("non-finite estimate")
    return f_score(support, res.support), mse(x_true, x_hat), res.evals


def _run_trial(task):
    """One Monte-Carlo trial; returns ``{label: (fscore, mse, evals) or None}``."""
    spec, axis, value, point, trial, fixed_graph = task
    gspec, fspec, nspec = _point_params(spec, axis, value)
    ss = np.random.SeedSequence([spec.rng_seed, point, trial])
    graph_seq, signal_seq = ss.spawn(2)
    g = fixed_graph if fixed_graph is not None else _make_graph(gspec, spec.base_dir, np.random.default_rng(graph_seq))
    rng = np.random.default_rng(signal_seq)
    psi = int(fspec["psi"])
    f = build_filter(_make_gso(g, fspec), _coeffs(fspec), g.dist)
    s = int(spec.signal["s"])
    support = draw_support(g, spec.signal.get("scenario", "localized"), s, rng, _pool(g, gspec, spec.signal))
    sigma = float(nspec.get("sigma_n", 0.01))
    inst = simulate_instance(f, support, spec.signal.get("values", "std-normal"), float(nspec["snr_db"]), sigma, rng)
    penalty: LinearPenalty = aic if spec.penalty == "aic" else bic(g.n)
    cfg = GicConfig(penalty=penalty, sparsity=s, sigma_n=sigma)
    base = GicEvaluator(f.h, inst.y)
    out = {}
    for m in spec.methods:
        ev = base.fresh()
        try:
            res = _run_method(m, ev, cfg, g, psi)
            out[m.name] = _trial_metrics(inst.x, support, res, g.n)
        except Exception:  # noqa: BLE001 - failures are tallied, not fatal
            out[m.name] = None
            res = None
        if m.gfoc:
            label = f"{m.name}+gfoc"
            if res is None:
                out[label] = None
                continue
            try:
                corr = gfoc(ev, cfg, g, res.support, radius=m.radius, dist=g.dist, method=label)
                fs, err, _ = _trial_metrics(inst.x, support, corr, g.n)
                out[label] = (fs, err, res.evals + corr.evals)
            except Exception:  # noqa: BLE001
                out[label] = None
    return out


def _mean_se(v: Sequence[float]) -> tuple[float, float]:
    if not v:
        return math.nan, math.nan
    a = np.asarray(v, dtype=float)
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    return float(a.mean()), se


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> BenchmarkReport:
    """Run every trial of every grid point and aggregate per method.

    ``jobs > 1`` spreads trials over worker processes; the report is the same
    as a serial run.
    """
    axis, values = spec.grid()
    labels = spec.labels()
    tasks = []
    for point, value in enumerate(values):
        fixed = None
        if not spec.regenerate_graph:
            gspec = _point_params(spec, axis, value)[0]
            seq = np.random.SeedSequence([spec.rng_seed, point])
            fixed = _make_graph(gspec, spec.base_dir, np.random.default_rng(seq))
        tasks.extend((spec, axis, value, point, t, fixed) for t in range(spec.trials))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_run_trial(t) for t in tasks]

    report = BenchmarkReport()
    for point, value in enumerate(values):
        chunk = results[point * spec.trials:(point + 1) * spec.trials]
        for label in labels:
            ok = [r[label] for r in chunk if r[label] is not None]
            fs, fs_se = _mean_se([o[0] for o in ok])
            er, er_se = _mean_se([o[1] for o in ok])
            ev_mean = _mean_se([o[2] for o in ok])[0]
            report.rows.append(PointSummary(
                label, axis, value, fs, fs_se, er, er_se, ev_mean, spec.trials - len(ok), spec.trials,
            ))
    return report


def emit_report(report: BenchmarkReport, fmt: str = "csv") -> str:
    """Render a report as CSV (one row per method and grid point) or JSON."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in report.rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.row().items()})
        return buf.getvalue()
    if fmt == "json":
        return json.dumps({"columns": list(CSV_COLUMNS), "rows": [r.row() for r in report.rows]}, indent=2) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report_json(text: str) -> BenchmarkReport:
    d = json.loads(text)
    return BenchmarkReport([PointSummary(**row) for row in d["rows"]])
