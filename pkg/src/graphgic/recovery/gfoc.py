"""Local neighbor-swap correction of an estimated support."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..gic import GicConfig, GicEvaluator, RankError, as_support, gic
from ..graph import Graph
from .result import RecoveryResult, finish


def truncate_support(ev: GicEvaluator, omega: Sequence[int], s: int) -> tuple[int, ...]:
    """Keep the ``s`` entries of ``omega`` with largest |LS coefficient|."""
    omega = as_support(omega)
    if len(omega) <= s:
        return omega
    try:
        x = ev.lstsq(omega)
    except RankError:
        x = np.linalg.lstsq(ev.h[:, omega], ev.y, rcond=None)[0]
    keep = np.argsort(-np.abs(x), kind="stable")[:s]
    return as_support(omega[i] for i in keep)


def gfoc(
    ev: GicEvaluator,
    cfg: GicConfig,
    graph: Graph,
    omega_in: Sequence[int],
    radius: int = 1,
    dist: np.ndarray | None = None,
    method: str | None = None,
) -> RecoveryResult:
    """Try to swap each support node for a nearby node when that raises the GIC.

    The nodes of the (truncated) input are visited in increasing order. For
    node ``k`` every neighbor ``m`` with ``1 <= hops(k, m) <= radius`` is
    tried in place of ``k`` in the current working support; the best one is
    kept only if it strictly beats the current GIC. Swaps are applied
    immediately, so later nodes see earlier changes, and two nodes may collapse
    onto the same neighbor. Rank-deficient trial supports score ``-inf``.
    """
    start = ev.evals
    name = method or "gfoc"
    omega = truncate_support(ev, omega_in, cfg.sparsity)
    if not omega:
        return finish(ev, cfg, omega, name, start)

    def obj(sup) -> float:
        try:
            return gic(ev, sup, cfg)
        except RankError:
            return -np.inf

    if radius == 1:
        near = graph.neighbors
    else:
        dist = graph.dist if dist is None else dist

        def near(k):
            return tuple(int(m) for m in np.flatnonzero((dist[k] >= 1) & (dist[k] <= radius)))

    current = set(omega)
    current_val = obj(current)
    swaps = 0
    for k in omega:
        rest = current - {k}
        best_m, best_val = None, -np.inf
        for m in sorted(near(k)):
            val = obj(rest | {m})
            if val > best_val:
                best_m, best_val = m, val
        if best_m is not None and best_val > current_val:
            current = rest | {best_m}
            current_val = best_val
            swaps += 1
    return finish(ev, cfg, current, name, start, info={"swaps": swaps})
