"""Screened, partitioned local GIC search."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..gic import GicConfig, GicEvaluator, glrt_screen
from ..graph import Graph
from .exhaustive import DEFAULT_MAX_SUBSETS, EnumerationError, search_subsets, subset_count
from .result import RecoveryResult, finish


def partition_candidates(graph: Graph, dist: np.ndarray | None, d_hat: Sequence[int], psi: int) -> list[tuple[int, ...]]:
    """Split ``d_hat`` into groups pairwise more than ``2*psi`` hops apart.

    Two candidates are linked when they are within ``2*psi`` hops; the groups
    are the connected components of that auxiliary graph, ordered by their
    smallest node.
    """
    nodes = np.array(sorted(set(int(k) for k in d_hat)), dtype=np.intp)
    if nodes.size == 0:
        return []
    dist = graph.dist if dist is None else dist
    sub = dist[np.ix_(nodes, nodes)]
    linked = (sub >= 1) & (sub <= 2 * psi)
    _, labels = connected_components(csr_matrix(linked), directed=False)
    groups: dict[int, list[int]] = {}
    for node, lab in zip(nodes.tolist(), labels.tolist()):
        groups.setdefault(lab, []).append(node)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def gm_gic(
    ev: GicEvaluator,
    cfg: GicConfig,
    graph: Graph,
    psi: int,
    dist: np.ndarray | None = None,
    max_subsets: int = DEFAULT_MAX_SUBSETS,
) -> RecoveryResult:
    """Screen, partition, search each part, then correct the sparsity level.

    1. keep nodes whose single-node energy exceeds ``cfg.zeta``;
    2. split them with :func:`partition_candidates`;
    3. run the exhaustive GIC inside every part (at most ``s`` nodes each);
    4. run it once more over subsets of the union of the part estimates.
    """
    start = ev.evals
    s = cfg.sparsity
    d_hat = glrt_screen(ev, cfg)
    parts = partition_candidates(graph, dist, d_hat, psi)
    total = sum(subset_count(len(p), s) for p in parts)
    if total > max_subsets:
        raise EnumerationError(f"local searches need {total} subsets (limit {max_subsets}); raise zeta")
    temp: list[int] = []
    for part in parts:
        local, _, _ = search_subsets(ev, cfg, part, s)
        temp.extend(local)
    support, _, _ = search_subsets(ev, cfg, temp, s)
    return finish(
        ev, cfg, support, "gm-gic", start,
        info={"screened": len(d_hat), "parts": len(parts), "largest_part": max(map(len, parts), default=0)},
    )
