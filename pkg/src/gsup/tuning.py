"""Scale selection: scan tau, record the cluster count, find the phase transition and plateau."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from . import constants as C
from ._parallel import Pool
from .gammasup import GammaSupConfig, check_data, gamma_sup
from .qcore import TuningParams


@dataclass
class TauScanResult:
    """Cluster count ``K(tau)`` over an ascending grid.

    ``counts`` counts every cluster; ``core_counts`` only those with at
    least ``min_size`` members (equal to ``counts`` when ``min_size`` is 1).
    ``plateau`` is ``(start, stop, K)`` on ``core_counts`` with grid indices
    ``start..stop-1``, or None. ``transition_tau`` is the first tau with
    ``counts < n``.
    """

    taus: np.ndarray
    counts: np.ndarray
    converged: np.ndarray
    n: int
    transition_tau: float | None
    plateau: tuple[int, int, int] | None
    core_counts: np.ndarray | None = None
    min_size: int = 1

    @property
    def recommended_tau(self) -> float | None:
        """Left end of the plateau."""
        return None if self.plateau is None else float(self.taus[self.plateau[0]])

    @property
    def stable_index(self) -> int | None:
        """Plateau grid index where the total count changes least.

        Compares ``log K`` at the two neighbouring grid points. The left end
        of a plateau sits at the edge of the transition; when outliers are
        absorbed gradually along the plateau this picks the point where the
        total count is steadiest. Plateau ends only count as interior
        points when a neighbour exists.
        """
        if self.plateau is None:
            return None
        start, stop, _ = self.plateau
        logk = np.log(self.counts.astype(float))
        best, best_change = None, np.inf
        for i in range(max(start, 1), min(stop, len(logk) - 1)):
            change = abs(logk[i + 1] - logk[i - 1])
            if change < best_change:
                best, best_change = i, change
        return start if best is None else best

    @property
    def stable_tau(self) -> float | None:
        i = self.stable_index
        return None if i is None else float(self.taus[i])

    def table(self) -> np.ndarray:
        return np.column_stack([self.taus, self.counts])


def mean_nn_distance(x: np.ndarray) -> float:
    """Mean distance from each row to its nearest distinct row."""
    u = np.unique(x, axis=0)
    if len(u) < 2:
        return 0.0
    d, _ = cKDTree(u).query(u, k=2)
    return float(d[:, 1].mean())


def diameter(x: np.ndarray) -> float:
    """Largest pairwise distance, exact, in row blocks."""
    x = x - x.mean(axis=0)
    sq = np.einsum("ij,ij->i", x, x)
    best = 0.0
    for a in range(0, len(x), C.DENSE_BLOCK):
        d2 = sq[a : a + C.DENSE_BLOCK, None] + sq[None, :] - 2.0 * (x[a : a + C.DENSE_BLOCK] @ x.T)
        best = max(best, float(d2.max()))
    return float(np.sqrt(max(best, 0.0)))


def default_grid(data, n_points: int = C.DEFAULT_GRID_POINTS) -> np.ndarray:
    """Log-spaced grid from a tenth of the mean nearest-neighbour distance to twice the diameter."""
    x = check_data(data)
    lo = C.GRID_LOW_FACTOR * mean_nn_distance(x)
    hi = C.GRID_HIGH_FACTOR * diameter(x)
    if not (lo > 0 and hi > lo):
        raise ValueError("data too degenerate for an automatic tau grid")
    return np.geomspace(lo, hi, n_points)


def find_plateau(counts, n: int, min_len: int = C.PLATEAU_MIN_LEN) -> tuple[int, int, int] | None:
    """Longest maximal run of equal counts with ``1 < K < n``; earliest wins ties."""
    counts = np.asarray(counts)
    best = None
    i = 0
    while i < len(counts):
        j = i
        while j + 1 < len(counts) and counts[j + 1] == counts[i]:
            j += 1
        k = int(counts[i])
        if 1 < k < n and j - i + 1 >= min_len and (best is None or j - i + 1 > best[1] - best[0]):
            best = (i, j + 1, k)
        i = j + 1
    return best


def scan_tau(
    data,
    taus=None,
    s: float = C.DEFAULT_S,
    base: GammaSupConfig | None = None,
    workers: int = 1,
    min_size: int = 1,
) -> TauScanResult:
    """Run gamma-SUP at every tau of an ascending grid and summarise ``K(tau)``.

    ``base`` carries the non-tau settings; ``workers`` runs grid points
    concurrently without changing the result. With ``min_size > 1`` the
    plateau is sought in the number of clusters of at least that size, so
    that isolated outliers absorbed one by one do not break it.
    """
    x = check_data(data)
    taus = default_grid(x) if taus is None else np.asarray(taus, dtype=float)
    if taus.ndim != 1 or len(taus) == 0:
        raise ValueError("tau grid must be a non-empty 1-D sequence")
    if np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be positive and strictly ascending")
    if base is None:
        base = GammaSupConfig(TuningParams(s=s, tau=1.0))
    else:
        base = replace(base, params=TuningParams(s=s, tau=1.0))

    if min_size < 1:
        raise ValueError("min_size must be >= 1")

    def run(tau):
        r = gamma_sup(x, base.with_tau(float(tau)))
        return r.k, int(np.sum(r.sizes >= min_size)), r.converged

    with Pool(workers) as pool:
        out = pool.map(run, taus)
    counts = np.array([o[0] for o in out])
    core = np.array([o[1] for o in out])
    conv = np.array([o[2] for o in out])
    n = len(x)
    below = np.flatnonzero(counts < n)
    transition = float(taus[below[0]]) if len(below) else None
    plateau = find_plateau(core, n)
    return TauScanResult(taus, counts, conv, n, transition, plateau, core, min_size)
