"""Undirected graphs, hop distances, neighborhoods and Laplacian shift operators."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

#: Hop distance reported for node pairs in different connected components.
UNREACHABLE = np.iinfo(np.int32).max

GSO_KINDS = ("laplacian-unweighted", "laplacian-weighted", "adjacency", "custom")


class GraphError(ValueError):
    """Raised when an edge set violates the graph invariants."""


class EdgeListError(ValueError):
    """Raised when edge-list text cannot be parsed."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with positive edge weights.

    Nodes are ``0..n-1``. Edges are stored canonically as ``(u, v, w)`` with
    ``u < v``, sorted. Use :func:`build_graph` rather than the constructor.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    adjacency: tuple[tuple[tuple[int, float], ...], ...] = field(repr=False)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.adjacency], dtype=int)

    @property
    def d_max(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @property
    def d_min(self) -> int:
        return int(self.degrees.min()) if self.n else 0

    def neighbors(self, k: int) -> tuple[int, ...]:
        return tuple(m for m, _ in self.adjacency[k])

    @cached_property
    def dist(self) -> np.ndarray:
        """All-pairs hop distances (see :func:`geodesic_table`)."""
        table = geodesic_table(self)
        table.flags.writeable = False
        return table

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))


@dataclass(frozen=True)
class GsoMatrix:
    """A graph shift operator together with a tag describing how it was made."""

    s: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        if self.kind not in GSO_KINDS:
            raise ValueError(f"unknown GSO kind {self.kind!r}")
        s = np.array(self.s, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("GSO must be a square matrix")
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.s.shape[0]


def build_graph(n: int, edges: Iterable[Sequence]) -> Graph:
    """Validate an edge list and build a :class:`Graph`.

    Each edge is ``(u, v)`` or ``(u, v, w)``; a missing weight means 1.
    """
    if n < 0:
        raise GraphError(f"node count must be non-negative, got {n}")
    seen: dict[tuple[int, int], float] = {}
    for e in edges:
        if len(e) == 2:
            u, v, w = int(e[0]), int(e[1]), 1.0
        else:
            u, v, w = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}): node index out of range for n={n}")
        if u == v:
            raise GraphError(f"edge ({u}, {v}): self-loop")
        if not (w > 0) or not math.isfinite(w):
            raise GraphError(f"edge ({u}, {v}): weight must be positive, got {w}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"edge ({u}, {v}): duplicate edge")
        seen[key] = w
    canon = tuple(sorted((u, v, w) for (u, v), w in seen.items()))
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, w in canon:
        adj[u].append((v, w))
        adj[v].append((u, w))
    adjacency = tuple(tuple(sorted(a)) for a in adj)
    return Graph(n=n, edges=canon, adjacency=adjacency)


def geodesic_table(g: Graph) -> np.ndarray:
    """Hop counts between all node pairs via one BFS per source.

    Weights are ignored. Unreachable pairs get :data:`UNREACHABLE`.
    """
    n = g.n
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    nbrs = [g.neighbors(k) for k in range(n)]
    for src in range(n):
        row = dist[src]
        row[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = row[u] + 1
            for v in nbrs[u]:
                if row[v] == UNREACHABLE:
                    row[v] = du
                    queue.append(v)
    return dist


def neighborhood(g: Graph, seeds: Iterable[int], radius: int, dist=None) -> tuple[int, ...]:
    """Closed ``radius``-hop neighborhood of a node set, as a sorted tuple."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    seeds = sorted(set(int(k) for k in seeds))
    if not seeds:
        return ()
    dist = g.dist if dist is None else dist
    within = (dist[seeds] <= radius).any(axis=0)
    return tuple(int(m) for m in np.flatnonzero(within))


def neighborhood_cardinality_bound(s: int, d_max: int, psi: int) -> int:
    """Worst-case size of the ``2*psi``-hop neighborhood of ``s`` nodes."""
    if s < 1 or d_max < 0 or psi < 1:
        raise ValueError("need s >= 1, d_max >= 0, psi >= 1")
    return s * sum(d_max**j for j in range(2 * psi + 1))


def laplacian(g: Graph, weighted: bool = False) -> GsoMatrix:
    """Combinatorial graph Laplacian, unweighted (hop) or weighted."""
    L = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        c = w if weighted else 1.0
        L[u, v] = L[v, u] = -c
        L[u, u] += c
        L[v, v] += c
    return GsoMatrix(L, "laplacian-weighted" if weighted else "laplacian-unweighted")


def adjacency_matrix(g: Graph) -> GsoMatrix:
    A = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        A[u, v] = A[v, u] = w
    return GsoMatrix(A, "adjacency")


def max_eigenvalue(s: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest (algebraic) eigenvalue of a symmetric matrix by power iteration.

    The matrix is shifted by its Gershgorin lower bound so that the dominant
    eigenvalue of the shifted matrix is the largest one of ``s``. Iteration
    stops once the residual ``||M v - lam v||`` is below ``tol`` times the
    Gershgorin norm bound, which bounds the eigenvalue error by the same
    amount. If that does not happen within ``max_iter`` steps (tiny spectral
    gap) the value is taken from a dense symmetric eigensolver instead.
    """
    s = np.asarray(s, dtype=float)
    n = s.shape[0]
    if n == 0 or not s.any():
        return 0.0
    radii = np.abs(s).sum(axis=1) - np.abs(np.diag(s))
    shift = max(0.0, -float((np.diag(s) - radii).min()))
    m = s + shift * np.eye(n)
    scale = float(np.abs(m).sum(axis=1).max())
    # fixed-seed Gaussian start: structured vectors such as linspace can be
    # exactly orthogonal to the top eigenvector of symmetric graphs (e.g. C4)
    v = np.random.default_rng(0x5EED).standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = m @ v
        lam = float(v @ w)
        if np.linalg.norm(w - lam * v) <= tol * scale:
            return lam - shift
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return -shift
        v = w / nw
    return float(np.linalg.eigvalsh(s).max())


def normalize_gso_to_max_eig(gso: GsoMatrix, target: float) -> GsoMatrix:
    """Rescale a symmetric GSO so that its largest eigenvalue equals ``target``."""
    if target <= 0:
        raise ValueError("target must be positive")
    if not gso.s.any():
        return gso
    lam = max_eigenvalue(gso.s)
    if lam <= 0:
        raise ValueError("largest eigenvalue is not positive; cannot normalize")
    return GsoMatrix(gso.s * (target / lam), gso.kind)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def generate_sbm(
    clusters: int,
    per_cluster: int,
    p_intra: float,
    link_nodes: int = 2,
    rng_seed=None,
) -> Graph:
    """Stochastic block model with chained clusters.

    Cluster ``c`` holds nodes ``c*N .. (c+1)*N - 1``. Pairs inside a cluster
    are linked with probability ``p_intra``. Consecutive clusters ``c`` and
    ``c+1`` are joined by ``link_nodes`` bridge edges between their
    lowest-indexed nodes (``c*N + i`` to ``(c+1)*N + i``). No other
    inter-cluster edges exist.
    """
    if clusters < 1 or per_cluster < link_nodes or link_nodes < 0:
        raise ValueError("need clusters >= 1 and per_cluster >= link_nodes >= 0")
    rng = _rng(rng_seed)
    N = per_cluster
    iu, ju = np.triu_indices(N, k=1)
    edges = []
    for c in range(clusters):
        keep = rng.random(iu.size) < p_intra
        base = c * N
        edges.extend((base + int(i), base + int(j)) for i, j in zip(iu[keep], ju[keep]))
    for c in range(clusters - 1):
        for i in range(link_nodes):
            edges.append((c * N + i, (c + 1) * N + i))
    return build_graph(clusters * N, edges)


def generate_named(kind: str, params: dict | None = None, rng_seed=None) -> Graph:
    """Standard test topologies with unit weights.

    ``cycle`` and ``path`` take ``n``; ``grid2d`` takes ``rows`` and ``cols``;
    ``erdos_renyi`` takes ``n`` and ``p``; ``sbm`` forwards to :func:`generate_sbm`.
    """
    params = dict(params or {})
    if kind == "cycle":
        n = int(params["n"])
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        return build_graph(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "path":
        n = int(params["n"])
        if n < 1:
            raise ValueError("path needs n >= 1")
        return build_graph(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "grid2d":
        r, c = int(params["rows"]), int(params["cols"])
        if r < 1 or c < 1:
            raise ValueError("grid2d needs rows, cols >= 1")
        edges = []
        for i in range(r):
            for j in range(c):
                k = i * c + j
                if j + 1 < c:
                    edges.append((k, k + 1))
                if i + 1 < r:
                    edges.append((k, k + c))
        return build_graph(r * c, edges)
    if kind == "erdos_renyi":
        n, p = int(params["n"]), float(params["p"])
        if n < 1:
            raise ValueError("erdos_renyi needs n >= 1")
        rng = _rng(rng_seed)
        iu, ju = np.triu_indices(n, k=1)
        keep = rng.random(iu.size) < p
        return build_graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))
    if kind == "sbm":
        return generate_sbm(
            int(params.get("clusters", 2)),
            int(params.get("per_cluster", 70)),
            float(params.get("p_intra", 6 / int(params.get("per_cluster", 70)))),
            int(params.get("link_nodes", 2)),
            rng_seed,
        )
    raise ValueError(f"unknown graph kind {kind!r}")


def load_edge_list(text: str) -> Graph:
    """Parse the edge-list format: a node count line, then ``u v w`` lines.

    Blank lines and ``#`` comments are ignored.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if n is None:
            if len(tok) != 1:
                raise EdgeListError(lineno, "expected the node count on its own line")
            try:
                n = int(tok[0])
            except ValueError:
                raise EdgeListError(lineno, f"bad node count {tok[0]!r}") from None
            continue
        if len(tok) not in (2, 3):
            raise EdgeListError(lineno, f"expected 'u v w', got {line!r}")
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise EdgeListError(lineno, f"bad node id in {line!r}") from None
        try:
            w = float(tok[2]) if len(tok) == 3 else 1.0
        except ValueError:
            raise EdgeListError(lineno, f"bad weight {tok[2]!r}") from None
        edges.append((u, v, w))
    if n is None:
        raise EdgeListError(1, "missing node count")
    return build_graph(n, edges)


def save_edge_list(g: Graph) -> str:
    lines = [str(g.n)]
    lines.extend(f"{u} {v} {w!r}" for u, v, w in g.edges)
    return "\n".join(lines) + "\n"
