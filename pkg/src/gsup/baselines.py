"""Comparison clusterers: Lloyd k-means, bisecting k-means+ with dismissal, gap statistic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import constants as C
from .gammasup import ClusterResult, check_data, make_result
from .qcore import make_rng


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    n_init: int = C.KMEANS_N_INIT
    max_iter: int = C.KMEANS_MAX_ITER
    seed: int = 0
    dismiss_threshold: int = C.CL2D_DISMISS

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.dismiss_threshold < 1:
            raise ValueError("dismiss_threshold must be >= 1")


@dataclass
class LloydRun:
    assign: np.ndarray
    centers: np.ndarray
    wcss: float
    history: list[float]
    iterations: int


def _wcss(x, assign, centers) -> float:
    return float(np.sum((x - centers[assign]) ** 2))


def _assign(x, centers):
    d2 = cdist(x, centers, "sqeuclidean")
    return np.argmin(d2, axis=1), d2


def lloyd(x: np.ndarray, init: np.ndarray, max_iter: int = C.KMEANS_MAX_ITER) -> LloydRun:
    """Lloyd iterations from the given initial centers.

    Empty clusters are reseeded at the point farthest from its center.
    ``history`` records the WCSS after every center update.
    """
    centers = np.array(init, dtype=float)
    k = len(centers)
    assign, d2 = _assign(x, centers)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        new = np.zeros_like(centers)
        np.add.at(new, assign, x)
        counts = np.bincount(assign, minlength=k)
        for j in np.flatnonzero(counts == 0):
            # farthest point from its own center; recompute to account for earlier repairs
            resid = np.sum((x - centers[assign]) ** 2, axis=1)
            far = int(np.argmax(resid))
            old = assign[far]
            counts[old] -= 1
            new[old] -= x[far]
            assign[far] = j
            counts[j] = 1
            new[j] = x[far]
        nonempty = counts > 0
        new[nonempty] /= counts[nonempty, None]
        new[~nonempty] = centers[~nonempty]
        centers = new
        history.append(_wcss(x, assign, centers))
        new_assign, d2 = _assign(x, centers)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return LloydRun(assign, centers, history[-1], history, it)


def _canonical(x: np.ndarray) -> np.ndarray:
    # seeded choices act on a row order that does not depend on the input order
    return np.lexsort(x.T[::-1])


def _best_lloyd(x: np.ndarray, k: int, n_init: int, max_iter: int, seed: int) -> LloydRun:
    order = _canonical(x)
    xs = x[order]
    children = np.random.SeedSequence(seed).spawn(n_init)
    best = None
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        init = xs[rng.choice(len(xs), size=k, replace=False)]
        run = lloyd(xs, init, max_iter)
        if best is None or run.wcss < best.wcss:
            best = run
    assign = np.empty_like(best.assign)
    assign[order] = best.assign
    return LloydRun(assign, best.centers, best.wcss, best.history, best.iterations)


def kmeans(data, config: KMeansConfig) -> ClusterResult:
    """Best-of-``n_init`` Lloyd k-means by within-cluster sum of squares.

    Initial centers are distinct rows drawn uniformly at random.
    """
    x = check_data(data)
    if config.k > len(x):
        raise ValueError(f"k={config.k} exceeds n={len(x)}")
    run = _best_lloyd(x, config.k, config.n_init, config.max_iter, config.seed)
    return make_result(x, run.assign, run.centers, iterations=run.iterations, wcss=run.wcss)


def bisect(x: np.ndarray, seed: int = 0) -> np.ndarray | None:
    """2-means split started from the two mutually farthest points.

    Returns a 0/1 side per row, or ``None`` when the rows cannot be split
    (fewer than two distinct rows). A degenerate split falls back to
    random distinct starts drawn from ``seed``.
    """
    uniq = np.unique(x, axis=0)
    if len(uniq) < 2:
        return None
    d2 = cdist(uniq, uniq, "sqeuclidean")
    i, j = np.unravel_index(np.argmax(d2), d2.shape)
    run = lloyd(x, uniq[[i, j]])
    if np.all(np.bincount(run.assign, minlength=2) > 0):
        return run.assign
    rng = make_rng(seed)
    for _ in range(C.KMEANS_N_INIT):
        run = lloyd(x, uniq[rng.choice(len(uniq), 2, replace=False)])
        if np.all(np.bincount(run.assign, minlength=2) > 0):
            return run.assign
    return None


def _two_means_random(x: np.ndarray, rng: np.random.Generator) -> np.ndarray | None:
    uniq = np.unique(x, axis=0)
    if len(uniq) < 2:
        return None
    run = lloyd(x, uniq[rng.choice(len(uniq), 2, replace=False)])
    if np.any(np.bincount(run.assign, minlength=2) == 0):
        return None
    return run.assign


def _kmeans_plus_once(x: np.ndarray, k: int, dismiss: int, rng: np.random.Generator):
    clusters = [np.arange(len(x))]
    pool: list[np.ndarray] = []
    # each split either adds a cluster or dismisses points, so this terminates
    while True:
        sizes = [len(c) for c in clusters]
        if len(clusters) >= k:
            break
        big = int(np.argmax(sizes))
        if sizes[big] < max(2, 2 * dismiss):
            break
        idx = clusters.pop(big)
        side = _two_means_random(x[idx], rng)
        if side is None:
            clusters.insert(big, idx)
            break
        for part in (idx[side == 0], idx[side == 1]):
            if len(part) < dismiss:
                pool.append(part)
            else:
                clusters.append(part)
        if not clusters:
            # both halves dismissed: keep the larger rather than lose everything
            a, b = pool.pop(), pool.pop()
            clusters.append(a if len(a) >= len(b) else b)
            pool.append(b if len(a) >= len(b) else a)
    assign = np.empty(len(x), dtype=np.int64)
    for g, idx in enumerate(clusters):
        assign[idx] = g
    centers = np.array([x[idx].mean(axis=0) for idx in clusters])
    if pool:
        rest = np.concatenate(pool)
        assign[rest] = np.argmin(cdist(x[rest], centers, "sqeuclidean"), axis=1)
        centers = np.array([x[assign == g].mean(axis=0) for g in range(len(clusters))])
    return assign, centers


def kmeans_plus(data, config: KMeansConfig) -> ClusterResult:
    """Bisecting k-means with small-cluster dismissal.

    The largest cluster is split by 2-means until ``k`` clusters exist. A
    piece smaller than ``dismiss_threshold`` is dismissed and the largest
    cluster is split again. Dismissed points join the nearest surviving
    center at the end. Fewer than ``k`` clusters come back when the data
    cannot support more. Best of ``n_init`` runs by WCSS.
    """
    x = check_data(data)
    if config.k > len(x):
        raise ValueError(f"k={config.k} exceeds n={len(x)}")
    order = _canonical(x)
    xs = x[order]
    best = None
    for child in np.random.SeedSequence(config.seed).spawn(config.n_init):
        assign, centers = _kmeans_plus_once(xs, config.k, config.dismiss_threshold, np.random.Generator(np.random.Philox(child)))
        w = _wcss(xs, assign, centers)
        if best is None or w < best[2]:
            best = (assign, centers, w)
    assign = np.empty_like(best[0])
    assign[order] = best[0]
    return make_result(x, assign, best[1], wcss=best[2])


@dataclass
class GapResult:
    k: int
    ks: np.ndarray
    gaps: np.ndarray
    sk: np.ndarray
    log_wk: np.ndarray
    log_wk_refs: np.ndarray


def _log_w(x, k, seed, n_init) -> float:
    if k == 1:
        w = float(np.sum((x - x.mean(axis=0)) ** 2))
    else:
        w = _best_lloyd(x, k, n_init, C.KMEANS_MAX_ITER, seed).wcss
    return float(np.log(max(w, np.finfo(float).tiny)))


def gap_statistic(data, k_max: int, b_refs: int = C.GAP_B_REFS, seed: int = 0, n_init: int = C.KMEANS_N_INIT) -> GapResult:
    """Gap statistic with a uniform bounding-box reference and the 1-SE rule.

    Selects the smallest ``K`` with ``gap(K) >= gap(K+1) - s(K+1)``;
    ``k_max`` is returned when no ``K`` qualifies.
    """
    x = check_data(data)
    if not 1 <= k_max <= len(x):
        raise ValueError(f"k_max must be in [1, n], got {k_max}")
    if b_refs < 1:
        raise ValueError("b_refs must be >= 1")
    ks = np.arange(1, k_max + 1)
    ss = np.random.SeedSequence(seed)
    data_seed, ref_seq = ss.spawn(2)
    km_seed = int(data_seed.generate_state(1)[0])
    log_wk = np.array([_log_w(x, k, km_seed, n_init) for k in ks])
    lo, hi = x.min(axis=0), x.max(axis=0)
    refs = np.empty((b_refs, k_max))
    for b, child in enumerate(ref_seq.spawn(b_refs)):
        rng = np.random.Generator(np.random.Philox(child))
        ref = lo + (hi - lo) * rng.random(x.shape)
        rseed = int(rng.integers(2**32))
        refs[b] = [_log_w(ref, k, rseed, n_init) for k in ks]
    gaps = refs.mean(axis=0) - log_wk
    sk = refs.std(axis=0) * np.sqrt(1 + 1 / b_refs)
    chosen = k_max
    for i in range(k_max - 1):
        if gaps[i] >= gaps[i + 1] - sk[i + 1]:
            chosen = int(ks[i])
            break
    return GapResult(chosen, ks, gaps, sk, log_wk, refs)
