"""Support recovery methods sharing one :class:`~graphgic.gic.GicEvaluator` API."""

from .baselines import lasso, lasso_cd, omp
from .bnb import graph_bnb_gic
from .exhaustive import EnumerationError, exhaustive_gic, subset_count
from .gfoc import gfoc, truncate_support
from .gmgic import gm_gic, partition_candidates
from .result import RecoveryResult

__all__ = [
    "EnumerationError",
    "RecoveryResult",
    "exhaustive_gic",
    "gfoc",
    "gm_gic",
    "graph_bnb_gic",
    "lasso",
    "lasso_cd",
    "omp",
    "partition_candidates",
    "subset_count",
    "truncate_support",
]
