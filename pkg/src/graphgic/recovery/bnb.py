"""Branch and bound over node-inclusion vectors with a graph-ordering heuristic bound."""

from __future__ import annotations

import heapq
from itertools import count
from typing import Sequence

import numpy as np

from ..gic import GicConfig, GicEvaluator, RankError, gic, node_ordering
from .result import RecoveryResult, finish


def _converged(lower: float, upper: float, rtol: float) -> bool:
    return upper - lower <= rtol * max(1.0, abs(upper))


def graph_bnb_gic(
    ev: GicEvaluator,
    cfg: GicConfig,
    ordering: Sequence[int] | None = None,
    max_iter: int | None = None,
    rtol: float = 1e-9,
) -> RecoveryResult:
    """Best-bound-within-shallowest-depth branch and bound on the GIC.

    Nodes are decided one at a time in ``ordering`` (default: decreasing
    single-node energy). A leaf that has decided the first ``depth`` nodes and
    included ``S1`` of them has

    * lower bound ``gic(S1)`` (a feasible support), and
    * heuristic upper bound ``gic(S1) + (s - |S1|) * max(g, 0)`` where ``g`` is
      the single-node GIC of the next undecided node.

    Leaves with ``|S1| = s`` or no undecided node left are terminal (bounds
    coincide). Each iteration splits the shallowest non-terminal leaf (largest
    upper bound first, then smallest ``S1``), then drops leaves whose upper
    bound falls below the best lower bound. The loop stops when the best lower
    and upper bounds meet; the leaf holding the best lower bound is returned.
    The upper bound is not guaranteed valid, so the result may be suboptimal.
    """
    start = ev.evals
    s = cfg.sparsity
    order = node_ordering(ev) if ordering is None else [int(k) for k in ordering]
    n = len(order)
    single = np.nan_to_num(ev.single_energies(), nan=-np.inf)
    gain = [max(float(cfg.score(single[k], 1)), 0.0) for k in order]
    if max_iter is None:
        max_iter = 10 * 2**s * max(n, 1)

    tie = count()
    leaves: dict[int, tuple[int, tuple[int, ...], float, float]] = {}
    select_heap: list = []
    upper_heap: list = []
    best_lower = -np.inf
    best_s1: tuple[int, ...] = ()
    rank_skipped = 0

    def add(depth: int, s1: tuple[int, ...]):
        nonlocal best_lower, best_s1, rank_skipped
        try:
            lower = gic(ev, s1, cfg)
        except RankError:
            rank_skipped += 1
            return
        terminal = len(s1) >= s or depth >= n
        upper = lower if terminal else lower + (s - len(s1)) * gain[depth]
        lid = next(tie)
        leaves[lid] = (depth, s1, lower, upper)
        heapq.heappush(upper_heap, (-upper, lid))
        if not terminal:
            heapq.heappush(select_heap, (depth, -upper, s1, lid))
        if lower > best_lower or (lower == best_lower and (len(s1), s1) < (len(best_s1), best_s1)):
            best_lower, best_s1 = lower, s1

    def global_upper() -> float:
        while upper_heap[0][1] not in leaves:
            heapq.heappop(upper_heap)
        return -upper_heap[0][0]

    add(0, ())
    upper = global_upper()
    it = 0
    converged = True
    while not _converged(best_lower, upper, rtol):
        if it >= max_iter:
            converged = False
            break
        picked = None
        while select_heap:
            _, _, _, lid = heapq.heappop(select_heap)
            leaf = leaves.get(lid)
            if leaf is None:
                continue
            if leaf[3] < best_lower:  # pruned
                del leaves[lid]
                continue
            picked = lid
            break
        if picked is None:
            break
        depth, s1, _, _ = leaves.pop(picked)
        k = order[depth]
        add(depth + 1, s1)
        add(depth + 1, tuple(sorted(s1 + (k,))))
        upper = global_upper()
        it += 1

    return finish(
        ev, cfg, best_s1, "g-bnb", start, converged=converged,
        info={"iterations": it, "lower": float(best_lower), "upper": float(upper), "rank_skipped": rank_skipped},
    )
