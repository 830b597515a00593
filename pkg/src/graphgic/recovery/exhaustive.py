"""Exhaustive GIC search over all small subsets of a candidate node set."""

from __future__ import annotations

import itertools
import warnings
from math import comb
from typing import Sequence

import numpy as np

from ..gic import GicConfig, GicEvaluator
from .result import RecoveryResult, finish

DEFAULT_MAX_SUBSETS = 5_000_000
_CHUNK = 100_000


class EnumerationError(RuntimeError):
    """Raised when an exhaustive search would enumerate too many subsets."""


def subset_count(m: int, s: int) -> int:
    """Number of non-empty subsets of an ``m``-set with at most ``s`` elements."""
    return sum(comb(m, j) for j in range(1, min(s, m) + 1))


def combination_blocks(m: int, j: int, chunk: int = _CHUNK):
    """Yield all ``j``-subsets of ``range(m)`` as int arrays, in lexicographic order.

    Rows are grouped by their first ``j - 1`` entries, so blocks hold roughly
    ``chunk`` rows each.
    """
    if j < 1 or j > m:
        return
    if j == 1:
        yield np.arange(m)[:, None]
        return
    prefixes = itertools.combinations(range(m - 1), j - 1)
    while True:
        pre = np.array(list(itertools.islice(prefixes, max(1, chunk // max(1, m - j + 1)))), dtype=np.intp)
        if pre.size == 0:
            return
        pre = pre.reshape(-1, j - 1)
        counts = m - 1 - pre[:, -1]
        keep = counts > 0
        pre, counts = pre[keep], counts[keep]
        if pre.size == 0:
            continue
        total = int(counts.sum())
        # last entry runs from prefix[-1] + 1 to m - 1 within each group
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        last = np.repeat(pre[:, -1] + 1, counts) + offsets
        yield np.column_stack([np.repeat(pre, counts, axis=0), last])


def search_subsets(ev: GicEvaluator, cfg: GicConfig, candidates: Sequence[int], s: int):
    """Best support among subsets of ``candidates`` with at most ``s`` nodes.

    The empty support (GIC 0) is the starting incumbent. Ties go to the
    smaller cardinality, then the lexicographically first support.
    Returns ``(support, gic, n_rank_deficient)``.
    """
    cands = np.array(sorted(set(int(k) for k in candidates)), dtype=np.intp)
    best: tuple[int, ...] = ()
    best_val = 0.0
    skipped = 0
    for j in range(1, min(s, cands.size) + 1):
        for block in combination_blocks(cands.size, j):
            chunk = cands[block]
            vals = cfg.score(ev.energies(chunk), j)
            bad = np.isnan(vals)
            if bad.any():
                skipped += int(bad.sum())
                vals[bad] = -np.inf
            i = int(np.argmax(vals))
            if vals[i] > best_val:
                best, best_val = tuple(int(k) for k in chunk[i]), float(vals[i])
    return best, best_val, skipped


def exhaustive_gic(
    ev: GicEvaluator,
    cfg: GicConfig,
    candidate_set: Sequence[int] | None = None,
    max_subsets: int = DEFAULT_MAX_SUBSETS,
) -> RecoveryResult:
    """Maximize the GIC over every subset of ``candidate_set`` of size <= s.

    Rank-deficient subsets are skipped and tallied in ``info["rank_skipped"]``.
    """
    cands = range(ev.n) if candidate_set is None else candidate_set
    cands = sorted(set(int(k) for k in cands))
    total = subset_count(len(cands), cfg.sparsity)
    if total > max_subsets:
        raise EnumerationError(
            f"exhaustive search over {len(cands)} nodes with s={cfg.sparsity} needs {total} subsets "
            f"(limit {max_subsets})"
        )
    start = ev.evals
    support, _, skipped = search_subsets(ev, cfg, cands, cfg.sparsity)
    if skipped:
        warnings.warn(f"{skipped} rank-deficient supports skipped", RuntimeWarning, stacklevel=2)
    return finish(ev, cfg, support, "gic", start, info={"rank_skipped": skipped})
