from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..gic import GicConfig, GicEvaluator, RankError, as_support, gic


@dataclass
class RecoveryResult:
    """Output of a recovery method.

    ``x_hat`` holds the least-squares values on ``support`` (same order) and
    ``evals`` the number of distinct projected-energy computations spent.
    """

    support: tuple[int, ...]
    x_hat: np.ndarray
    gic_value: float
    evals: int
    method: str
    converged: bool = True
    info: dict = field(default_factory=dict)

    def full_signal(self, n: int) -> np.ndarray:
        x = np.zeros(n)
        x[list(self.support)] = self.x_hat
        return x

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "support": list(self.support),
            "x_hat": [float(v) for v in self.x_hat],
            "gic": float(self.gic_value),
            "evals": int(self.evals),
            "converged": bool(self.converged),
            **{k: v for k, v in self.info.items() if isinstance(v, (int, float, str, bool, list))},
        }


def finish(ev: GicEvaluator, cfg: GicConfig, support, method: str, evals0: int = 0, **kw) -> RecoveryResult:
    """Package a support into a result.

    The support is charged to ``ev`` like any other query, but its reported
    GIC comes from a direct QR so that it is reproducible on a fresh evaluator.
    """
    support = as_support(support)
    gic(ev, support, cfg)
    value = cfg.score(ev.exact_energy(support), len(support))
    try:
        x_hat = ev.lstsq(support)
    except RankError:
        x_hat = np.full(len(support), np.nan)
    return RecoveryResult(support, x_hat, value, ev.evals - evals0, method, **kw)
