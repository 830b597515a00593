"""Greedy and convex baselines: orthogonal matching pursuit and the Lasso."""

from __future__ import annotations

import numpy as np

from ..gic import GicConfig, GicEvaluator, as_support
from .result import RecoveryResult, finish


def omp(
    ev: GicEvaluator,
    cfg: GicConfig,
    max_card: int | None = None,
    residual_threshold: float | None = None,
) -> RecoveryResult:
    """Orthogonal matching pursuit.

    Adds the column best correlated (after normalization) with the residual
    and refits by least squares. Stops at ``max_card`` atoms (default
    ``cfg.sparsity``) or once ``||r||^2 <= residual_threshold`` (default
    ``n * sigma_n**2``, the expected noise energy).
    """
    start = ev.evals
    H, y = ev.h, ev.y
    s = cfg.sparsity if max_card is None else max_card
    thr = H.shape[0] * cfg.sigma_n**2 if residual_threshold is None else residual_threshold
    # a zero residual always stops, even with thr = 0
    floor = max(thr, 1e-24 * float(y @ y))
    norms = np.sqrt(np.einsum("ij,ij->j", H, H))
    usable = norms > 0
    support: list[int] = []
    r = y.copy()
    while len(support) < s and float(r @ r) > floor:
        score = np.full(H.shape[1], -np.inf)
        score[usable] = np.abs(H[:, usable].T @ r) / norms[usable]
        score[support] = -np.inf
        k = int(np.argmax(score))
        if not np.isfinite(score[k]):
            break
        support.append(k)
        cols = sorted(support)
        r = y - H[:, cols] @ ev.lstsq(cols)
    return finish(ev, cfg, support, "omp", start, info={"residual": float(r @ r)})


def lasso_cd(H: np.ndarray, y: np.ndarray, lam: float, max_iter: int = 100_000, tol: float = 1e-8):
    """Cyclic coordinate descent for ``0.5 ||y - Hx||^2 + lam ||x||_1``.

    Sweeps cycle over the active set until it settles, then a full sweep
    confirms. Convergence means the largest coordinate change in a full
    sweep is at most ``tol * max|x|``. Returns ``(x, converged, sweeps)``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    n = H.shape[1]
    G = H.T @ H
    diag = np.diag(G).copy()
    cols = [G[:, j] for j in range(n)]
    inv_d = [1.0 / d if d > 0 else 0.0 for d in diag]
    g = H.T @ y  # H^T r, kept current
    x = [0.0] * n
    live = [j for j in range(n) if diag[j] > 0]
    active = live
    full = True
    for sweep in range(1, max_iter + 1):
        delta_max = 0.0
        for j in active:
            old = x[j]
            z = old + float(g[j]) * inv_d[j]
            t = lam * inv_d[j]
            new = z - t if z > t else (z + t if z < -t else 0.0)
            if new != old:
                d = new - old
                x[j] = new
                g -= d * cols[j]
                if abs(d) > delta_max:
                    delta_max = abs(d)
        settled = delta_max <= tol * max(max(map(abs, x)), 1e-300)
        if full and settled:
            return np.array(x), True, sweep
        if settled:
            active, full = live, True
        else:
            active, full = [j for j in range(n) if x[j] != 0.0], False
            if not active:
                active, full = live, True
    return np.array(x), False, max_iter


def lasso(
    ev: GicEvaluator,
    cfg: GicConfig,
    lam: float = 0.01,
    max_iter: int = 100_000,
    tol: float = 1e-8,
) -> RecoveryResult:
    """Lasso support: the up-to-``s`` largest nonzero coefficients, refit by LS."""
    start = ev.evals
    x, ok, sweeps = lasso_cd(ev.h, ev.y, lam, max_iter, tol)
    nz = np.flatnonzero(x)
    top = nz[np.argsort(-np.abs(x[nz]), kind="stable")][: cfg.sparsity]
    return finish(ev, cfg, as_support(top), "lasso", start, converged=ok, info={"sweeps": sweeps})
