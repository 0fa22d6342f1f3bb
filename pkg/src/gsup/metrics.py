"""Purity, impurity and c-impurity for comparing a clustering against true classes.

Counts are deliberately left unnormalised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix


@dataclass(frozen=True)
class LabelPair:
    """True class ids and predicted cluster ids for the same ``n`` points.

    Ids are opaque; any hashable-by-numpy values work (ints, strings).
    """

    truth: np.ndarray
    predicted: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.truth).ravel()
        p = np.asarray(self.predicted).ravel()
        if len(t) != len(p):
            raise ValueError(f"label lengths differ: {len(t)} vs {len(p)}")
        if len(t) == 0:
            raise ValueError("need at least one point")
        object.__setattr__(self, "truth", t)
        object.__setattr__(self, "predicted", p)

    @property
    def n(self) -> int:
        return len(self.truth)


def confusion(pair: LabelPair) -> np.ndarray:
    """Dense table ``M[i, j] = |c_i ∩ ω_j|`` (true classes by rows)."""
    _, t = np.unique(pair.truth, return_inverse=True)
    _, p = np.unique(pair.predicted, return_inverse=True)
    t, p = t.ravel(), p.ravel()
    return coo_matrix((np.ones(pair.n, dtype=np.int64), (t, p)), shape=(t.max() + 1, p.max() + 1)).toarray()


def purity_number(pair: LabelPair) -> int:
    """Sum over output clusters of the largest overlap with any true class."""
    return int(confusion(pair).max(axis=0).sum())


def impurity(pair: LabelPair) -> int:
    """Points not in their output cluster's majority class; 0 iff every cluster is class-pure."""
    return pair.n - purity_number(pair)


def c_impurity(pair: LabelPair) -> int:
    """Impurity with the roles swapped; counts points split away from their class's main cluster."""
    return pair.n - int(confusion(pair).max(axis=1).sum())
