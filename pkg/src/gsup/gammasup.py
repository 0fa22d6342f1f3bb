"""gamma-SUP: blurring self-updating clustering, its nonblurring twin, and gamma-SUP+.

Every data point starts as its own cluster representative. Each sweep
replaces every representative by a weighted mean (weights from
:func:`gsup.qcore.weight`) computed from the previous generation; the
compactly supported weight makes far points exactly irrelevant.

Internally the run works on distinct positions with multiplicities:
representatives that coincide receive identical updates forever, so they
are fused and processed once.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from . import constants as C
from ._parallel import Pool, single_threaded_blas
from .qcore import TuningParams, weight


@dataclass(frozen=True)
class GammaSupConfig:
    """Tuning pair plus stopping and extraction tolerances (scaled units)."""

    params: TuningParams
    conv_eps: float = C.CONV_EPS
    merge_eps: float = C.MERGE_EPS
    max_iter: int = C.MAX_ITER
    threads: int = 1
    record_trajectory: bool = False

    def __post_init__(self):
        if not self.conv_eps > 0:
            raise ValueError("conv_eps must be positive")
        if not self.merge_eps >= self.conv_eps:
            raise ValueError("merge_eps must be >= conv_eps")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @classmethod
    def make(cls, tau: float, s: float = C.DEFAULT_S, **kw) -> "GammaSupConfig":
        return cls(TuningParams(s=s, tau=tau), **kw)

    def with_tau(self, tau: float) -> "GammaSupConfig":
        return replace(self, params=TuningParams(s=self.params.s, tau=tau))


@dataclass
class ClusterResult:
    """Partition of the rows of a data matrix.

    ``labels`` run over ``1..K``; cluster ``k`` has center ``centers[k-1]``.
    Clusters are numbered by decreasing size, ties by first member row.
    ``trajectory``, when recorded, holds the representatives before the
    first sweep and after every sweep, in data units.
    """

    labels: np.ndarray
    centers: np.ndarray
    sizes: np.ndarray
    iterations: int = 0
    converged: bool = True
    trajectory: list[np.ndarray] | None = field(default=None, repr=False)
    wcss: float | None = None

    @property
    def k(self) -> int:
        return len(self.sizes)


def check_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("data must be a non-empty (n, p) matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")
    return x


def canonical_order(groups: np.ndarray, n_groups: int) -> np.ndarray:
    """Rank groups by size (descending), ties by first occurrence.

    Returns ``rank`` with ``rank[g]`` in ``0..n_groups-1``.
    """
    sizes = np.bincount(groups, minlength=n_groups)
    first = np.full(n_groups, len(groups))
    np.minimum.at(first, groups, np.arange(len(groups)))
    order = np.lexsort((first, -sizes))
    rank = np.empty(n_groups, dtype=np.int64)
    rank[order] = np.arange(n_groups)
    return rank


def make_result(data: np.ndarray, groups: np.ndarray, centers: np.ndarray | None = None, **kw) -> ClusterResult:
    """Build a canonically numbered result from arbitrary group ids.

    Without ``centers`` the cluster means of ``data`` are used.
    """
    uniq, groups = np.unique(groups, return_inverse=True)
    groups = groups.ravel()
    k = len(uniq)
    rank = canonical_order(groups, k)
    labels = rank[groups] + 1
    sizes = np.bincount(labels - 1, minlength=k)
    if centers is None:
        sums = np.zeros((k, data.shape[1]))
        np.add.at(sums, labels - 1, data)
        out_centers = sums / sizes[:, None]
    else:
        out_centers = np.empty_like(centers)
        out_centers[rank] = centers
    return ClusterResult(labels=labels, centers=out_centers, sizes=sizes, **kw)


class _Neighbours:
    """Candidate pairs within the support radius plus a skin, in CSR layout.

    With ``symmetric`` set (targets and sources are the same points) only
    pairs ``i < j`` are stored; each squared distance is computed once and
    used in both directions, and the diagonal is implicit.

    The list stays valid until representatives have moved far enough to
    close the skin; then it must be rebuilt.
    """

    def __init__(self, rows: np.ndarray, cols: np.ndarray, m: int, n_src: int, skin: float, symmetric: bool):
        self.m = m
        self.n_src = n_src
        self.skin = skin
        self.symmetric = symmetric
        self.travel = np.zeros(m)
        self.sweeps = 0
        self._set_pairs(rows, cols)

    def _set_pairs(self, rows, cols):
        m = self.m
        if self.symmetric:
            lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
            keep = lo < hi
            key = _unique_sorted(lo[keep] * np.int64(m) + hi[keep])
            self.rows, self.cols = key // m, key % m
            diag = np.arange(m)
            full_r = np.concatenate([self.rows, self.cols, diag])
            full_c = np.concatenate([self.cols, self.rows, diag])
        else:
            key = _unique_sorted(rows * np.int64(self.n_src) + cols)
            self.rows, self.cols = key // self.n_src, key % self.n_src
            full_r, full_c = self.rows, self.cols
        self.order = np.argsort(full_r * np.int64(max(m, self.n_src)) + full_c, kind="stable")
        self.csr_rows = full_r[self.order]
        self.csr_cols = full_c[self.order]
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(self.csr_rows, minlength=m))])

    def moved(self, disp: np.ndarray) -> bool:
        """Account for a sweep; return True if the list is still valid.

        A pair missing from the list started more than the skin beyond the
        radius; it can only have closed that gap if the two points' total
        travel exceeds the skin.
        """
        self.travel += disp
        self.sweeps += 1
        if self.symmetric and len(self.travel) > 1:
            top = np.partition(self.travel, len(self.travel) - 2)[-2:].sum()
        else:
            top = self.travel.max(initial=0.0)
        return top < self.skin

    def remap_targets(self, comp: np.ndarray):
        """Follow a fusion of targets (and sources, when symmetric).

        A fused point sits within the fusion tolerance of each member, so the
        union of the members' candidates still covers its neighbourhood.
        """
        rows = comp[self.rows]
        cols = comp[self.cols] if self.symmetric else self.cols
        self.m = int(comp.max()) + 1
        travel = np.zeros(self.m)
        np.maximum.at(travel, comp, self.travel)
        self.travel = travel
        if self.symmetric:
            self.n_src = self.m
        self._set_pairs(rows, cols)


def _unique_sorted(keys: np.ndarray) -> np.ndarray:
    # stable sort is a radix sort for integers and fast on nearly sorted input
    keys = np.sort(keys, kind="stable")
    if len(keys) == 0:
        return keys
    return keys[np.concatenate([[True], keys[1:] != keys[:-1]])]


def _sq_norms(a: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", a, a)


def _row_blocks(m: int) -> list[tuple[int, int]]:
    return [(a, min(a + C.DENSE_BLOCK, m)) for a in range(0, m, C.DENSE_BLOCK)]


def _close_pairs(a: np.ndarray, b: np.ndarray, radius: float, limit: float):
    """All ``(i, j)`` with ``|a_i - b_j| <= radius``, or None past ``limit`` pairs.

    Distances come from the Gram expansion; the callers pad ``radius`` with
    a skin far larger than its rounding error.
    """
    b_sq = _sq_norms(b)
    a_sq = _sq_norms(a)
    r2 = radius * radius
    rows, cols = [], []
    total = 0
    for lo, hi in _row_blocks(len(a)):
        d2 = a_sq[lo:hi, None] + b_sq[None, :] - 2.0 * (a[lo:hi] @ b.T)
        i, j = np.nonzero(d2 <= r2)
        total += len(i)
        if total > limit:
            return None
        rows.append(i + lo)
        cols.append(j)
    return np.concatenate(rows), np.concatenate(cols)


class _Engine:
    """One weighted-mean sweep: each target moves to the weighted mean of the sources."""

    def __init__(self, s: float, pool: Pool, blurring: bool):
        self.unit = TuningParams(s=s, tau=1.0)
        self.radius = 1.0 / np.sqrt(s)
        self.pool = pool
        self.blurring = blurring
        self.nbrs: _Neighbours | None = None
        self.dense = True
        self._planned = False
        self.skin = C.VERLET_SKIN
        self._last_life: int | None = None

    def fused(self, comp: np.ndarray):
        if self.nbrs is not None:
            self.nbrs.remap_targets(comp)

    def _plan(self, targets: np.ndarray, sources: np.ndarray):
        mt, ms = len(targets), len(sources)
        self._planned = True
        self.dense = True
        if mt * ms <= C.DENSE_MAX_POINTS**2:
            return
        limit = C.SPARSE_MAX_FILL * mt * ms
        if self._last_life is not None and self._last_life < C.VERLET_MIN_LIFE:
            # lists are expiring fast: trade more pairs for fewer rebuilds
            self.skin = min(2 * self.skin, C.VERLET_MAX_SKIN)
        found = _close_pairs(targets, sources, self.radius * (1 + self.skin), limit)
        if found is None and self.skin > C.VERLET_SKIN:
            self.skin = C.VERLET_SKIN
            found = _close_pairs(targets, sources, self.radius * (1 + self.skin), limit)
        if found is None:
            return
        self.dense = False
        rows, cols = found
        self.nbrs = _Neighbours(rows, cols, mt, ms, self.skin * self.radius, symmetric=self.blurring)

    def sweep(self, targets: np.ndarray, sources: np.ndarray, counts: np.ndarray) -> np.ndarray:
        if not self._planned or (not self.dense and self.nbrs is None):
            self._plan(targets, sources)
        if self.dense:
            return self._dense(targets, sources, counts)
        return self._sparse(targets, sources, counts)

    def after_sweep(self, disp: np.ndarray):
        if not self.dense and self.nbrs is not None and not self.nbrs.moved(disp):
            self._last_life = self.nbrs.sweeps
            self.nbrs = None
            # the set may have shrunk enough through fusion to go dense
            self._planned = False

    def _dense(self, targets, sources, counts):
        s_sq = _sq_norms(sources)
        t_sq = _sq_norms(targets)

        def run(block):
            a, b = block
            d2 = t_sq[a:b, None] + s_sq[None, :] - 2.0 * (targets[a:b] @ sources.T)
            np.maximum(d2, 0.0, out=d2)
            if self.blurring:
                # self-distance is exactly zero, not a rounding residue
                d2[np.arange(b - a), np.arange(a, b)] = 0.0
            w = weight(d2, self.unit)
            w *= counts
            return (w @ sources) / w.sum(axis=1)[:, None]

        return np.concatenate(self.pool.map(run, _row_blocks(len(targets))), axis=0)

    def _sparse(self, targets, sources, counts):
        nb = self.nbrs
        rows, cols = nb.rows, nb.cols
        w = np.empty(len(rows))
        step = max(1, 4_000_000 // max(1, targets.shape[1]))
        for a in range(0, len(rows), step):
            diff = targets[rows[a : a + step]] - sources[cols[a : a + step]]
            w[a : a + step] = weight(_sq_norms(diff), self.unit)
        if nb.symmetric:
            data = np.concatenate([w * counts[cols], w * counts[rows], counts])[nb.order]
        else:
            data = (w * counts[cols])[nb.order]
        mat = csr_matrix((data, nb.csr_cols, nb.indptr), shape=(len(targets), len(sources)))
        den = np.bincount(nb.csr_rows, weights=data, minlength=len(targets))
        return (mat @ sources) / den[:, None]


def _pairs_within(pos: np.ndarray, eps: float) -> np.ndarray:
    """Index pairs ``i < j`` with ``|pos_i - pos_j| <= eps``.

    Candidates come from sorting a one-dimensional projection, which is
    cheap in any dimension when close pairs are rare.
    """
    m, p = pos.shape
    if m < 2:
        return np.empty((0, 2), dtype=np.int64)
    direction = np.linspace(1.0, 2.0, p)
    direction /= np.linalg.norm(direction)
    proj = pos @ direction
    order = np.argsort(proj, kind="stable")
    sp = proj[order]
    # rounding in the projection is far below eps for centred, scaled data
    slack = eps * (1 + 1e-6) + 1e-15 * np.abs(sp).max(initial=0.0)
    found = []
    for k in range(1, m):
        cand = np.flatnonzero(sp[k:] - sp[:-k] <= slack)
        if len(cand) == 0:
            break
        i, j = order[cand], order[cand + k]
        close = _sq_norms(pos[i] - pos[j]) <= eps * eps
        found.append(np.stack([np.minimum(i, j)[close], np.maximum(i, j)[close]], axis=1))
    if not found:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(found, axis=0)


def _components(m: int, pairs: np.ndarray) -> tuple[int, np.ndarray]:
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    return connected_components(graph, directed=False)


def _fuse(pos: np.ndarray, counts: np.ndarray, eps: float):
    """Fuse representatives closer than ``eps`` (transitively)."""
    pairs = _pairs_within(pos, eps)
    if len(pairs) == 0:
        return None
    k, comp = _components(len(pos), pairs)
    new_counts = np.bincount(comp, weights=counts, minlength=k)
    sums = np.zeros((k, pos.shape[1]))
    np.add.at(sums, comp, pos * counts[:, None])
    return sums / new_counts[:, None], new_counts, comp


def _single_linkage(pos: np.ndarray, eps: float) -> np.ndarray:
    return _components(len(pos), _pairs_within(pos, eps))[1]


def _run(data, config: GammaSupConfig, blurring: bool) -> ClusterResult:
    x = check_data(data)
    tau, s = config.params.tau, config.params.s
    # centring keeps the squared-distance expansion well conditioned; sorting
    # first makes the shift, and so every later rounding, independent of row order
    shift = np.sort(x, axis=0).mean(axis=0)
    y = (x - shift) / tau
    # distinct rows in sorted order: the run is independent of row order
    pos, owner = np.unique(y, axis=0, return_inverse=True)
    owner = owner.ravel()
    counts = np.bincount(owner).astype(float)
    src, src_counts = pos.copy(), counts.copy()

    trajectory = [pos[owner] * tau + shift] if config.record_trajectory else None
    converged = False
    it = 0
    with Pool(config.threads) as pool, single_threaded_blas():
        engine = _Engine(s, pool, blurring)
        while it < config.max_iter:
            if blurring:
                z = engine.sweep(pos, pos, counts)
            else:
                z = engine.sweep(pos, src, src_counts)
            disp = np.sqrt(_sq_norms(z - pos))
            pos = z
            it += 1
            engine.after_sweep(disp)
            if trajectory is not None:
                trajectory.append(pos[owner] * tau + shift)
            if disp.max() < config.conv_eps:
                converged = True
                break
            fused = _fuse(pos, counts, C.COLLAPSE_EPS)
            if fused is not None:
                pos, counts, comp = fused
                owner = comp[owner]
                engine.fused(comp)

    comp = _single_linkage(pos, config.merge_eps)
    k = comp.max() + 1
    mass = np.bincount(comp, weights=counts, minlength=k)
    sums = np.zeros((k, pos.shape[1]))
    np.add.at(sums, comp, pos * counts[:, None])
    centers = tau * (sums / mass[:, None]) + shift
    return make_result(x, comp[owner], centers, iterations=it, converged=converged, trajectory=trajectory)


def gamma_sup(data, config: GammaSupConfig) -> ClusterResult:
    """Blurring self-updating clustering.

    Representatives ``x_i / tau`` are updated simultaneously (Jacobi order)
    from the previous generation until no point moves more than
    ``conv_eps`` or ``max_iter`` sweeps have run. Final representatives
    within ``merge_eps`` of each other (transitively) form one cluster.
    Hitting the cap is not an error; ``converged`` is then False.
    """
    return _run(data, config, blurring=True)


def gamma_nonblurring(data, config: GammaSupConfig) -> ClusterResult:
    """Nonblurring estimator: representatives move, the data stay fixed.

    Same start, stopping rule and cluster extraction as :func:`gamma_sup`;
    each representative is iterated as a weighted mean of the original
    data with weights centred on its current position.
    """
    return _run(data, config, blurring=False)


def gamma_sup_plus(data, config: GammaSupConfig, size_threshold: int = C.PLUS_SIZE_THRESHOLD, seed: int = 0) -> ClusterResult:
    """gamma-SUP followed by 2-means bisection of oversized clusters.

    Any cluster larger than ``size_threshold`` is split recursively until
    none exceeds it (or a cluster cannot be split further).
    """
    from .baselines import bisect

    if size_threshold < 2:
        raise ValueError("size_threshold must be >= 2")
    x = check_data(data)
    base = gamma_sup(x, config)
    if base.sizes.max() <= size_threshold:
        return base

    groups = []
    centers = []
    stack = [(np.flatnonzero(base.labels == k + 1), base.centers[k]) for k in range(base.k)]
    stack.reverse()
    while stack:
        idx, center = stack.pop()
        if len(idx) <= size_threshold:
            groups.append(idx)
            centers.append(center)
            continue
        halves = bisect(x[idx], seed=seed)
        if halves is None:
            groups.append(idx)
            centers.append(center)
            continue
        for side in (1, 0):
            part = idx[halves == side]
            stack.append((part, x[part].mean(axis=0)))

    gid = np.empty(len(x), dtype=np.int64)
    for g, idx in enumerate(groups):
        gid[idx] = g
    return make_result(x, gid, np.array(centers), iterations=base.iterations, converged=base.converged)
