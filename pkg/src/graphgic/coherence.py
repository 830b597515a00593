"""Column geometry of graph Laplacians: inner products, coherence, projections.

For an unweighted Laplacian ``L`` the inner product of two columns depends
only on degrees and shared neighbors, which gives closed-form bounds on the
mutual coherence in terms of the extreme degrees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, GsoMatrix, laplacian

# Agreement required between the closed form and the direct dot product.
INNER_PRODUCT_TOL = 1e-12
MONOTONICITY_TOL = 1e-12


@dataclass(frozen=True)
class CoherenceReport:
    """Mutual coherence of a matrix and, for unweighted Laplacians, its bounds.

    ``lower_bound``/``upper_bound``/``d_min``/``d_max`` are ``None`` for
    other matrices.
    """

    mu: float
    argmax_pair: tuple[int, int]
    upper_bound: float | None = None
    lower_bound: float | None = None
    d_min: int | None = None
    d_max: int | None = None

    def within_bounds(self, tol: float = 1e-12) -> bool:
        if self.lower_bound is None:
            return True
        return self.lower_bound - tol <= self.mu <= self.upper_bound + tol

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "argmax_pair": list(self.argmax_pair),
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "d_min": self.d_min,
            "d_max": self.d_max,
        }


def shared_neighbors(g: Graph, k: int, m: int) -> int:
    """Number of common neighbors of ``k`` and ``m``."""
    return len(set(g.neighbors(k)) & set(g.neighbors(m)))


def laplacian_inner_product(g: Graph, k: int, m: int, lap: np.ndarray | None = None) -> float:
    """``L_k^T L_m`` for the unweighted Laplacian, by the degree/shared-neighbor formula.

    ``d(k) + d(k)^2`` on the diagonal, ``d_in - d(k) - d(m)`` for adjacent
    nodes, ``d_in`` at distance two and zero beyond. The value is checked
    against the dot product of the actual columns.
    """
    deg = g.degrees
    d = int(g.dist[k, m])
    if k == m:
        val = float(deg[k] + deg[k] ** 2)
    elif d == 1:
        val = float(shared_neighbors(g, k, m) - deg[k] - deg[m])
    elif d == 2:
        val = float(shared_neighbors(g, k, m))
    else:
        val = 0.0
    L = laplacian(g).s if lap is None else lap
    direct = float(L[:, k] @ L[:, m])
    if abs(direct - val) > INNER_PRODUCT_TOL:
        raise AssertionError(f"closed form {val} disagrees with column product {direct} at ({k}, {m})")
    return val


def _unweighted_laplacian_degrees(a: np.ndarray) -> np.ndarray | None:
    """Degrees if ``a`` is a (possibly scaled) unweighted Laplacian, else None."""
    if a.shape[0] != a.shape[1] or not np.allclose(a, a.T):
        return None
    off = a - np.diag(np.diag(a))
    nz = off != 0
    deg = nz.sum(axis=0)
    if not nz.any():
        return None
    # all off-diagonal entries share one negative value c, and the diagonal is -c * degree
    c = off[nz]
    if not np.allclose(c, c[0]) or c[0] >= 0:
        return None
    if not np.allclose(np.diag(a), -c[0] * deg):
        return None
    return deg


def mutual_coherence(matrix) -> CoherenceReport:
    """Largest normalized absolute inner product between distinct columns.

    ``matrix`` is an array or a :class:`~graphgic.graph.GsoMatrix`. Degree
    bounds are filled in when it is an unweighted Laplacian (any positive
    scaling). Ties go to the lexicographically first pair.
    """
    kind = None
    if isinstance(matrix, GsoMatrix):
        kind = matrix.kind
        a = np.asarray(matrix.s, dtype=float)
    else:
        a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError("need a matrix with at least two columns")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise ValueError(f"zero column at index {int(np.flatnonzero(norms == 0)[0])}")
    u = a / norms
    gram = np.abs(u.T @ u)
    np.fill_diagonal(gram, -np.inf)
    k, m = np.unravel_index(int(np.argmax(gram)), gram.shape)
    k, m = min(k, m), max(k, m)
    mu = float(gram[k, m])

    deg = None
    if kind in (None, "laplacian-unweighted"):
        deg = _unweighted_laplacian_degrees(a)
    if deg is None:
        return CoherenceReport(mu, (int(k), int(m)))
    dmin, dmax = int(deg.min()), int(deg.max())
    return CoherenceReport(
        mu,
        (int(k), int(m)),
        upper_bound=2 * dmax / (dmin + dmin**2),
        lower_bound=dmin / (dmax + dmax**2),
        d_min=dmin,
        d_max=dmax,
    )


def projection_energy(lap: np.ndarray, m: int, k: int) -> float:
    """Energy of column ``k`` projected onto column ``m``: ``(L_m^T L_k)^2 / ||L_m||^2``."""
    lm = lap[:, m]
    return float((lm @ lap[:, k]) ** 2 / (lm @ lm))


def projection_monotonicity_check(g: Graph, m: int, k: int, j: int, lap: np.ndarray | None = None):
    """Compare the projections of columns ``k`` and ``j`` onto probe column ``m``.

    ``k`` must be strictly closer to ``m`` than ``j``. Returns
    ``(holds, energy_k, energy_j)`` where ``holds`` means the closer node's
    energy is at least the farther one's. This does not hold on every graph:
    a leaf next to a high-degree hub is a counterexample.
    """
    dist = g.dist
    if not dist[k, m] < dist[j, m]:
        raise ValueError(f"node {k} must be strictly closer to {m} than node {j}")
    L = laplacian(g).s if lap is None else lap
    ek = projection_energy(L, m, k)
    ej = projection_energy(L, m, j)
    return ek >= ej - MONOTONICITY_TOL, ek, ej


def monotonicity_violations(g: Graph, limit: int | None = None) -> list[tuple[int, int, int, float, float]]:
    """All ``(m, k, j, energy_k, energy_j)`` where the closer node projects less.

    Only pairs with ``j`` within two hops of ``m`` can violate, since farther
    columns are orthogonal to ``L_m``.
    """
    L = laplacian(g).s
    dist = g.dist
    n = g.n
    out = []
    for m in range(n):
        e = np.array([projection_energy(L, m, k) for k in range(n)])
        near = np.flatnonzero(dist[m] <= 2)
        for j in near:
            closer = np.flatnonzero(dist[m] < dist[m, j])
            bad = closer[e[closer] < e[j] - MONOTONICITY_TOL]
            for k in bad:
                out.append((m, int(k), int(j), float(e[k]), float(e[j])))
                if limit is not None and len(out) >= limit:
                    return out
    return out
