"""Projection energies, least squares on a support, and the GIC objective.

All projections go through a QR factorization of ``H[:, omega]``. A
:class:`GicEvaluator` owns ``H`` and ``y`` and counts every distinct
projected-energy computation, which is the complexity measure reported by the
recovery methods.

Energies are raw ``||P_omega y||^2``. The GIC divides them by the noise
variance before subtracting the penalty, so that penalties such as AIC
(``2 * |omega|``) are in the units they are designed for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

# Upper bound on floats held by one batched QR call.
_BATCH_FLOATS = 4_000_000
# Below this fraction of ||h_d||^2 the one-column update loses too many digits
# and the support is refactored from scratch.
_UPDATE_FLOOR = 1e-6
# Merge cached key blocks once there are this many.
_MAX_BLOCKS = 8


class RankError(np.linalg.LinAlgError):
    """Raised when ``H[:, omega]`` is numerically rank deficient."""


@dataclass(frozen=True)
class LinearPenalty:
    """``rho(c) = nu * c``; ``nu = 2`` is AIC, ``nu = log(n)`` is BIC."""

    nu: float = 2.0

    def __call__(self, c: int) -> float:
        return self.nu * c


aic = LinearPenalty(2.0)


def bic(n: int) -> LinearPenalty:
    return LinearPenalty(float(np.log(n)))


@dataclass(frozen=True)
class GicConfig:
    """Tuning shared by the GIC-based methods.

    ``screening_zeta`` thresholds the raw single-node energies
    ``||P_m y||^2``; it defaults to ``sigma_n``.
    """

    penalty: Callable[[int], float] = aic
    sparsity: int = 1
    sigma_n: float = 1.0
    screening_zeta: float | None = None
    rank_tolerance: float = 1e-10

    def __post_init__(self):
        if self.sparsity < 1:
            raise ValueError("sparsity must be at least 1")
        if not self.sigma_n > 0:
            raise ValueError("sigma_n must be positive")
        if self.penalty(0) != 0:
            raise ValueError("penalty must vanish at cardinality 0")

    @property
    def zeta(self) -> float:
        return self.sigma_n if self.screening_zeta is None else self.screening_zeta

    def score(self, energy, card):
        """GIC from a raw projected energy and a support size."""
        return energy / self.sigma_n**2 - self.penalty(card)


def as_support(omega: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(set(int(k) for k in omega)))


class _SizeStore:
    """Cache for supports of one size, keyed by packed int64 codes.

    Scalar inserts go to a dict; batch inserts are kept as sorted key blocks
    so that whole arrays of supports can be looked up with ``searchsorted``.
    """

    def __init__(self):
        self.pending: dict[int, float] = {}
        self.blocks: list[tuple[np.ndarray, np.ndarray]] = []

    def get(self, key: int):
        val = self.pending.get(key)
        if val is not None:
            return val
        for keys, vals in self.blocks:
            i = np.searchsorted(keys, key)
            if i < keys.size and keys[i] == key:
                return float(vals[i])
        return None

    def put(self, key: int, val: float):
        self.pending[key] = val

    def _flush(self):
        if self.pending:
            keys = np.fromiter(self.pending.keys(), dtype=np.int64, count=len(self.pending))
            vals = np.fromiter(self.pending.values(), dtype=float, count=len(self.pending))
            self.pending = {}
            self.put_many(keys, vals)

    def get_many(self, keys: np.ndarray):
        """Values for ``keys`` and a mask of which were found."""
        self._flush()
        out = np.full(keys.size, np.nan)
        found = np.zeros(keys.size, dtype=bool)
        for bk, bv in self.blocks:
            i = np.minimum(np.searchsorted(bk, keys), bk.size - 1)
            hit = (bk[i] == keys) & ~found
            out[hit] = bv[i[hit]]
            found |= hit
        return out, found

    def put_many(self, keys: np.ndarray, vals: np.ndarray):
        order = np.argsort(keys, kind="stable")
        self.blocks.append((keys[order], vals[order]))
        if len(self.blocks) > _MAX_BLOCKS:
            k = np.concatenate([b[0] for b in self.blocks])
            v = np.concatenate([b[1] for b in self.blocks])
            order = np.argsort(k, kind="stable")
            self.blocks = [(k[order], v[order])]


class GicEvaluator:
    """Projected energies of ``y`` onto column subsets of ``H``, with counting.

    With ``cache=True`` each distinct support is computed once and
    :attr:`evals` equals the number of distinct non-empty supports queried.
    Not thread safe.
    """

    def __init__(self, h: np.ndarray, y: np.ndarray, cache: bool = True, rank_tolerance: float = 1e-10):
        self.h = np.asarray(h, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if self.h.ndim != 2 or self.y.shape != (self.h.shape[0],):
            raise ValueError(f"shape mismatch: H {self.h.shape}, y {self.y.shape}")
        self.n = self.h.shape[1]
        self.cache = cache
        self.rank_tolerance = rank_tolerance
        self.evals = 0
        self._stores: dict[int, _SizeStore] = {}
        self._single: np.ndarray | None = None
        self._col_sq = np.einsum("ij,ij->j", self.h, self.h)
        self._corr = self.h.T @ self.y

    def fresh(self) -> "GicEvaluator":
        """A new evaluator on the same data with an empty cache and counter."""
        return GicEvaluator(self.h, self.y, self.cache, self.rank_tolerance)

    def _packable(self, j: int) -> bool:
        return self.n ** j < 2**62

    def _pack(self, idx: np.ndarray) -> np.ndarray:
        keys = np.zeros(idx.shape[0], dtype=np.int64)
        for c in range(idx.shape[1]):
            keys = keys * self.n + idx[:, c]
        return keys

    def _scalar_key(self, key: tuple[int, ...]) -> int:
        code = 0
        for k in key:
            code = code * self.n + k
        return code

    def _store_for(self, j: int) -> _SizeStore:
        st = self._stores.get(j)
        if st is None:
            st = self._stores[j] = _SizeStore()
        return st

    def _factor(self, key: tuple[int, ...]):
        A = self.h[:, key]
        q, r = np.linalg.qr(A)
        d = np.abs(np.diag(r))
        if d.min() <= self.rank_tolerance * np.linalg.norm(A):
            return None
        return q, r

    def energy(self, omega: Sequence[int]) -> float:
        key = as_support(omega)
        if not key:
            return 0.0
        if key[-1] >= self.n or key[0] < 0:
            raise IndexError(f"support {list(key)} out of range for {self.n} nodes")
        st = self._store_for(len(key))
        code = self._scalar_key(key)
        val = st.get(code) if self.cache else None
        if val is None:
            qr = self._factor(key)
            if qr is None:
                val = np.nan
            else:
                c = qr[0].T @ self.y
                val = float(c @ c)
            self.evals += 1
            if self.cache:
                st.put(code, val)
        if np.isnan(val):
            raise RankError(f"H restricted to {list(key)} is rank deficient")
        return val

    def single_energies(self) -> np.ndarray:
        """``||P_k y||^2`` for every node, computed in closed form.

        Counts one evaluation per node not already cached. Zero columns give NaN.
        """
        if self._single is None:
            with np.errstate(divide="ignore", invalid="ignore"):
                e = np.where(self._col_sq > 0, self._corr**2 / self._col_sq, np.nan)
            self._single = self.energies(np.arange(self.n)[:, None], _values=e)
        return self._single

    def energies(self, supports, _values: np.ndarray | None = None) -> np.ndarray:
        """Energies for many equal-size supports at once.

        ``supports`` is a 2-D integer array (or a list of tuples) whose rows
        are sorted, duplicate-free node indices of one common size.
        Rank-deficient supports come back as NaN instead of raising.
        """
        idx = np.asarray(supports, dtype=np.intp)
        if idx.ndim != 2:
            if idx.size == 0:
                return np.zeros(0)
            raise ValueError("supports must be a 2-D array of equal-size index rows")
        m, j = idx.shape
        if m == 0:
            return np.zeros(0)
        if j == 0:
            return np.zeros(m)
        if idx.min() < 0 or idx.max() >= self.n:
            raise IndexError("support index out of range")
        if not self.cache or not self._packable(j):
            return self._energies_uncached(idx, _values)
        keys = self._pack(idx)
        st = self._store_for(j)
        out, found = st.get_many(keys)
        if not found.all():
            miss_keys, first, inv = np.unique(keys[~found], return_index=True, return_inverse=True)
            miss_rows = np.flatnonzero(~found)
            rows = miss_rows[first]
            vals = _values[rows] if _values is not None else self._batched(idx[rows])
            st.put_many(miss_keys, vals)
            self.evals += miss_keys.size
            out[miss_rows] = vals[inv.ravel()]
        return out

    def _energies_uncached(self, idx, values):
        if self.cache:
            # huge supports: fall back to one scalar key per row
            out = np.empty(idx.shape[0])
            for i, row in enumerate(idx):
                try:
                    out[i] = self.energy(tuple(int(k) for k in row))
                except RankError:
                    out[i] = np.nan
            return out
        self.evals += idx.shape[0]
        return values[np.arange(idx.shape[0])] if values is not None else self._batched(idx)

    def _batched(self, idx: np.ndarray) -> np.ndarray:
        """Energies of the supports in ``idx`` (rows), without caching.

        Supports sharing their first ``j - 1`` columns share one QR of that
        prefix; the last column enters through a rank-one update.
        """
        m, j = idx.shape
        if j == 1:
            c = idx[:, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                e = self._corr[c] ** 2 / self._col_sq[c]
            e[~(self._col_sq[c] > 0)] = np.nan
            return e
        cols = np.unique(idx)
        # rows where no candidate column is nonzero carry nothing onto col(H_omega)
        rows = np.flatnonzero(np.any(self.h[:, cols] != 0, axis=1))
        if rows.size == 0:
            return np.full(m, np.nan)
        hr = self.h[rows]
        yr = self.y[rows]
        out = np.empty(m)
        chunk = max(1, _BATCH_FLOATS // (rows.size * j))
        for start in range(0, m, chunk):
            out[start:start + chunk] = self._batched_chunk(hr, yr, idx[start:start + chunk])
        return out

    def _qr_energy(self, hr, yr, idx):
        A = np.moveaxis(hr[:, idx], 0, 1)  # (batch, rows, j)
        q, r = np.linalg.qr(A)
        diag = np.abs(np.diagonal(r, axis1=1, axis2=2)).min(axis=1)
        scale = np.sqrt(np.einsum("bij,bij->b", A, A))
        c = np.einsum("bij,i->bj", q, yr)
        e = np.einsum("bj,bj->b", c, c)
        e[diag <= self.rank_tolerance * scale] = np.nan
        return e, q

    def _batched_chunk(self, hr, yr, idx):
        if self._packable(idx.shape[1]):
            _, first, inv = np.unique(self._pack(idx[:, :-1]), return_index=True, return_inverse=True)
            prefixes = idx[first, :-1]
        else:
            prefixes, inv = np.unique(idx[:, :-1], axis=0, return_inverse=True)
        inv = inv.ravel()
        if prefixes.shape[0] * 2 > idx.shape[0]:
            return self._qr_energy(hr, yr, idx)[0]
        pe, q = self._qr_energy(hr, yr, prefixes)
        last = idx[:, -1]
        qy = np.einsum("bij,i->bj", q, yr)[inv]  # (m, j-1)
        t = np.einsum("bij,ib->bj", q[inv], hr[:, last])  # Q_prefix^T h_last
        resid_sq = self._col_sq[last] - np.einsum("bj,bj->b", t, t)
        num = self._corr[last] - np.einsum("bj,bj->b", t, qy)
        with np.errstate(divide="ignore", invalid="ignore"):
            e = pe[inv] + num**2 / resid_sq
        weak = ~(resid_sq > _UPDATE_FLOOR * self._col_sq[last]) | np.isnan(pe[inv])
        if weak.any():
            e[weak] = self._qr_energy(hr, yr, idx[weak])[0]
        return e

    def exact_energy(self, omega: Sequence[int]) -> float:
        """``||P_omega y||^2`` from a fresh QR; neither cached nor counted.

        Batched energies may come from a rank-one update and differ from this
        in the last few digits. Results are reported with this value so that
        they do not depend on how the search reached a support.
        """
        key = as_support(omega)
        if not key:
            return 0.0
        qr = self._factor(key)
        if qr is None:
            raise RankError(f"H restricted to {list(key)} is rank deficient")
        c = qr[0].T @ self.y
        return float(c @ c)

    def lstsq(self, omega: Sequence[int]) -> np.ndarray:
        """LS coefficients on ``omega`` by QR (does not count as an evaluation)."""
        key = as_support(omega)
        if not key:
            return np.zeros(0)
        qr = self._factor(key)
        if qr is None:
            raise RankError(f"H restricted to {list(key)} is rank deficient")
        q, r = qr
        return np.linalg.solve(r, q.T @ self.y)


def projected_energy(ev: GicEvaluator, omega: Sequence[int]) -> float:
    """``||P_omega y||^2``; zero for the empty support."""
    return ev.energy(omega)


def gic(ev: GicEvaluator, omega: Sequence[int], cfg: GicConfig) -> float:
    omega = as_support(omega)
    return cfg.score(ev.energy(omega), len(omega))


def ls_recover(ev: GicEvaluator, omega: Sequence[int]) -> np.ndarray:
    """Least-squares signal values on ``omega`` (in sorted index order)."""
    return ev.lstsq(omega)


def glrt_screen(ev: GicEvaluator, cfg: GicConfig) -> tuple[int, ...]:
    """Nodes whose single-column projected energy exceeds the screening threshold."""
    e = ev.single_energies()
    with np.errstate(invalid="ignore"):
        return tuple(int(k) for k in np.flatnonzero(e > cfg.zeta))


def node_ordering(ev: GicEvaluator) -> list[int]:
    """Nodes by decreasing single-node energy, ties by increasing id."""
    e = np.nan_to_num(ev.single_energies(), nan=-np.inf)
    return [int(k) for k in np.lexsort((np.arange(e.size), -e))]
