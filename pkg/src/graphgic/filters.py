"""Polynomial graph filters and the noisy measurement model ``y = H x + w``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph, GsoMatrix, _rng

ZERO_PATTERN_TOL = 1e-10
SUPPORT_RETRIES = 1000


class FilterError(ValueError):
    pass


@dataclass(frozen=True)
class GraphFilter:
    """``H = sum_i coeffs[i] * S**i`` with degree ``psi = len(coeffs) - 1``."""

    h: np.ndarray
    psi: int
    coeffs: tuple[float, ...]
    gso: GsoMatrix

    @property
    def n(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class Instance:
    filter: GraphFilter
    x: np.ndarray
    support: tuple[int, ...]
    sigma_n: float
    y: np.ndarray
    snr_db: float


def decaying_coeffs(psi: int, rate: float, h0: float = 1.0) -> list[float]:
    """Coefficients with ``|h_i| = rate * |h_{i+1}|``, i.e. ``h_i = h0 / rate**i``."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return [h0 / rate**i for i in range(psi + 1)]


def build_filter(gso: GsoMatrix, coeffs: Sequence[float], dist: np.ndarray | None = None) -> GraphFilter:
    """Evaluate the filter polynomial by Horner's rule.

    When ``dist`` is given, entries between nodes more than ``psi`` hops apart
    are checked to vanish.
    """
    coeffs = tuple(float(c) for c in coeffs)
    psi = len(coeffs) - 1
    n = gso.n
    if psi < 1:
        raise FilterError("filter degree must be at least 1 (need two or more coefficients)")
    if psi > n - 1:
        raise FilterError(f"filter degree {psi} must be at most |V| - 1 = {n - 1}")
    S = gso.s
    eye = np.eye(n)
    H = coeffs[-1] * eye
    for c in reversed(coeffs[:-1]):
        H = H @ S + c * eye
    if dist is not None:
        far = dist > psi
        if far.any():
            leak = float(np.abs(H[far]).max())
            if leak > ZERO_PATTERN_TOL:
                raise FilterError(f"filter leaks beyond {psi} hops (max |H| = {leak:.3g}); is the GSO local?")
    H.flags.writeable = False
    return GraphFilter(h=H, psi=psi, coeffs=coeffs, gso=gso)


def filter_column_orthogonality(f: GraphFilter, k: int, m: int, dist: np.ndarray | None = None) -> float:
    """Inner product of filter columns ``k`` and ``m``.

    Columns of nodes more than ``2*psi`` hops apart share no nonzero rows, so
    the product is exactly zero there; with ``dist`` this is checked.
    """
    val = float(f.h[:, k] @ f.h[:, m])
    if dist is not None and dist[k, m] > 2 * f.psi and val != 0.0:
        raise FilterError(f"columns {k} and {m} are {dist[k, m]} hops apart but not orthogonal ({val:.3g})")
    return val


def _draw_values(kind: str, size: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "std-normal":
        return rng.standard_normal(size)
    if kind == "uniform-split":
        mag = rng.uniform(0.5, 1.0, size)
        return np.where(rng.random(size) < 0.5, -mag, mag)
    raise ValueError(f"unknown value distribution {kind!r}")


def simulate_instance(
    f: GraphFilter,
    support: Sequence[int],
    value_dist: str = "std-normal",
    snr_db: float = 20.0,
    sigma_n: float = 0.01,
    rng_seed=None,
    noiseless: bool = False,
) -> Instance:
    """Draw a sparse signal on ``support`` and a measurement at the given SNR.

    SNR is ``||Hx||^2 / (n * sigma_n^2)``; the drawn signal is rescaled to hit
    it exactly. With ``noiseless=True`` the returned ``y`` equals ``Hx``.
    """
    support = tuple(sorted(set(int(k) for k in support)))
    if not support:
        raise ValueError("support must be non-empty")
    if not sigma_n > 0:
        raise ValueError("sigma_n must be positive")
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    rng = _rng(rng_seed)
    n = f.n
    x = np.zeros(n)
    x[list(support)] = _draw_values(value_dist, len(support), rng)
    hx = f.h @ x
    energy = float(hx @ hx)
    if energy == 0.0:
        raise FilterError("the filtered signal vanishes; support lies in the filter null space")
    target = 10.0 ** (snr_db / 10.0) * n * sigma_n**2
    scale = np.sqrt(target / energy)
    x *= scale
    hx = f.h @ x
    if noiseless:
        y = hx.copy()
    else:
        y = hx + sigma_n * rng.standard_normal(n)
    realized = 10.0 * np.log10(float(hx @ hx) / (n * sigma_n**2))
    return Instance(filter=f, x=x, support=support, sigma_n=float(sigma_n), y=y, snr_db=float(realized))


def _localized(g: Graph, seed: int, s: int, rng: np.random.Generator, pool=None) -> tuple[int, ...] | None:
    nbrs = [m for m in g.neighbors(seed) if pool is None or m in pool]
    if len(nbrs) < s - 1:
        return None
    picked = rng.choice(len(nbrs), size=s - 1, replace=False) if s > 1 else []
    return tuple(sorted({seed, *(nbrs[i] for i in picked)}))


def draw_support(g: Graph, scenario: str, s: int, rng_seed=None, pool: Sequence[int] | None = None) -> tuple[int, ...]:
    """Random support of size ``s`` following one of two placement scenarios.

    ``localized``: a random node and ``s - 1`` of its neighbors.
    ``mixed``: two random seed nodes; the first grows ``ceil(s/2) - 1`` and the
    second ``floor(s/2) - 1`` random neighbors, and the draw is retried until
    all ``s`` nodes are distinct.

    ``pool`` restricts every chosen node (e.g. to one SBM cluster).
    """
    rng = _rng(rng_seed)
    if s < 1:
        raise ValueError("s must be positive")
    cand = np.arange(g.n) if pool is None else np.array(sorted(set(int(k) for k in pool)))
    pool_set = None if pool is None else set(cand.tolist())
    if cand.size == 0:
        raise ValueError("empty node pool")
    if scenario == "localized":
        for _ in range(SUPPORT_RETRIES):
            seed = int(rng.choice(cand))
            out = _localized(g, seed, s, rng, pool_set)
            if out is not None:
                return out
    elif scenario == "mixed":
        if s < 2:
            raise ValueError("mixed scenario needs s >= 2")
        sizes = ((s + 1) // 2, s // 2)
        for _ in range(SUPPORT_RETRIES):
            seeds = rng.choice(cand, size=2, replace=False) if cand.size >= 2 else None
            if seeds is None:
                break
            groups = [_localized(g, int(k), size, rng, pool_set) for k, size in zip(seeds, sizes)]
            if any(grp is None for grp in groups):
                continue
            union = set(groups[0]) | set(groups[1])
            if len(union) == s:
                return tuple(sorted(union))
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    raise FilterError(f"could not place a {scenario} support of size {s} after {SUPPORT_RETRIES} tries")
