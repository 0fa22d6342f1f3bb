"""Seeded study pipelines shared by the acceptance suite and the scripts.

Each study returns a small dataclass of numbers; nothing here plots or
writes files.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constants as C
from .baselines import KMeansConfig, gap_statistic, kmeans, kmeans_plus
from .datagen import ImageSimSpec, MixtureSpec, gen_images, gen_mixture, gen_toy
from .gammasup import ClusterResult, GammaSupConfig, gamma_nonblurring, gamma_sup
from .metrics import LabelPair, c_impurity, impurity
from .qcore import make_rng
from .reduce import pca_fit_project
from .tuning import TauScanResult, default_grid, scan_tau

MIXTURE_TAUS = (0.6, 0.7, 0.8, 0.9, 1.0)
GAP_K_MAX = 6


def largest_cluster(res: ClusterResult) -> tuple[float, np.ndarray]:
    """Share of points and center of cluster 1 (the largest)."""
    return res.sizes[0] / len(res.labels), res.centers[0]


@dataclass
class MixtureStudy:
    """Per-replicate estimates of the null component over a tau grid.

    ``pi_hat[r, t]`` and ``mu_hat[r, t]`` come from the largest cluster at
    ``taus[t]``; ``kmeans_mu`` from k-means at the gap-selected K.
    """

    taus: np.ndarray
    pi_hat: np.ndarray
    mu_hat: np.ndarray
    kmeans_mu: np.ndarray | None = None
    gap_k: np.ndarray | None = None
    true_mu: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def mean_pi(self) -> np.ndarray:
        return self.pi_hat.mean(axis=0)

    @property
    def mse(self) -> np.ndarray:
        return np.mean(np.sum((self.mu_hat - self.true_mu) ** 2, axis=-1), axis=0)

    @property
    def kmeans_mse(self) -> float | None:
        if self.kmeans_mu is None:
            return None
        return float(np.mean(np.sum((self.kmeans_mu - self.true_mu) ** 2, axis=-1)))


def mixture_study(
    n_rep: int = 100,
    taus=MIXTURE_TAUS,
    s: float = C.DEFAULT_S,
    spec: MixtureSpec = MixtureSpec(),
    nonblurring: bool = False,
    with_kmeans: bool = True,
    seed0: int = 0,
) -> MixtureStudy:
    """Replicate the mixture design ``n_rep`` times (seeds ``seed0..``)."""
    taus = np.asarray(taus, dtype=float)
    run = gamma_nonblurring if nonblurring else gamma_sup
    pi_hat = np.empty((n_rep, len(taus)))
    mu_hat = np.empty((n_rep, len(taus), 2))
    km_mu = np.empty((n_rep, 2)) if with_kmeans else None
    gap_k = np.empty(n_rep, dtype=int) if with_kmeans else None
    for r in range(n_rep):
        x, _ = gen_mixture(MixtureSpec(spec.c, spec.pi0, spec.n, seed0 + r))
        for t, tau in enumerate(taus):
            pi_hat[r, t], mu_hat[r, t] = largest_cluster(run(x, GammaSupConfig.make(tau, s=s)))
        if with_kmeans:
            gap = gap_statistic(x, GAP_K_MAX, seed=seed0 + r)
            gap_k[r] = gap.k
            km_mu[r] = largest_cluster(kmeans(x, KMeansConfig(gap.k, seed=seed0 + r)))[1]
    return MixtureStudy(taus, pi_hat, mu_hat, km_mu, gap_k, spec.means[0].copy())


def s_sensitivity(
    s_values=(0.005, 0.025, 0.05, 0.1), tau: float = 0.6, n_rep: int = 100, spec: MixtureSpec = MixtureSpec()
) -> dict[float, float]:
    """Mean largest-cluster share at one tau for each ``s``."""
    return {
        s: float(mixture_study(n_rep, (tau,), s=s, spec=spec, with_kmeans=False).mean_pi[0]) for s in s_values
    }


# phase transition proxy

PROXY_BLOBS = 128
PROXY_SIZE = 50
PROXY_DIM = 100
PROXY_REDUCED = 20
PROXY_CENTER_SCALE = 3.0


def phase_proxy(seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """128 unit-noise blobs of 50 points in 100-D, reduced to 20 principal scores.

    Blob centers are N(0, 9 I), so centers sit about 42 apart while each
    blob has radius about 10.
    """
    rng = make_rng(seed)
    centers = PROXY_CENTER_SCALE * rng.standard_normal((PROXY_BLOBS, PROXY_DIM))
    labels = np.repeat(np.arange(PROXY_BLOBS), PROXY_SIZE)
    x = centers[labels] + rng.standard_normal((len(labels), PROXY_DIM))
    return pca_fit_project(x, PROXY_REDUCED).scores, labels


def phase_study(seed: int = 0, n_points: int = C.DEFAULT_GRID_POINTS, workers: int = 1) -> TauScanResult:
    z, _ = phase_proxy(seed)
    return scan_tau(z, default_grid(z, n_points), workers=workers)


# misalignment

IMAGE_PCA_RANK = 16
IMAGE_MIN_SIZE = 3
IMAGE_DISMISS = 4


@dataclass
class MisalignmentStudy:
    snr: float
    scan: TauScanResult
    tau: float
    gsup_impurity: int
    gsup_c_impurity: int
    isolated_frac: float
    kmp_impurity: int
    kmp_c_impurity: int
    left_tau: float | None = None
    left_impurity: int | None = None
    left_c_impurity: int | None = None
    left_isolated_frac: float | None = None


def _isolation(res: ClusterResult, mask: np.ndarray, max_size: int = 2) -> float:
    small = res.sizes[res.labels - 1] <= max_size
    return float(small[mask].mean()) if mask.any() else 1.0


def misalignment_study(seed: int = 0, spec: ImageSimSpec | None = None, with_left: bool = True) -> MisalignmentStudy:
    """Images, PCA to 16 scores, tau scan, gamma-SUP at the stable plateau tau, and k-means+.

    The plateau is taken on clusters of at least three members, so that
    lone misaligned images do not hide it. With ``with_left`` the left
    end of the plateau is evaluated as well.
    """
    spec = spec or ImageSimSpec(seed=seed)
    imgs = gen_images(spec)
    z = pca_fit_project(imgs.data, IMAGE_PCA_RANK).scores
    scan = scan_tau(z, min_size=IMAGE_MIN_SIZE)
    if scan.plateau is None:
        raise RuntimeError("no plateau found in the tau scan")

    def evaluate(tau):
        res = gamma_sup(z, GammaSupConfig.make(tau))
        pair = LabelPair(imgs.labels, res.labels)
        return impurity(pair), c_impurity(pair), _isolation(res, imgs.misaligned)

    tau = scan.stable_tau
    imp, cimp, iso = evaluate(tau)
    km = kmeans_plus(z, KMeansConfig(spec.n_templates, seed=spec.seed, dismiss_threshold=IMAGE_DISMISS))
    pair = LabelPair(imgs.labels, km.labels)
    out = MisalignmentStudy(imgs.snr, scan, tau, imp, cimp, iso, impurity(pair), c_impurity(pair))
    if with_left:
        out.left_tau = scan.recommended_tau
        out.left_impurity, out.left_c_impurity, out.left_isolated_frac = evaluate(out.left_tau)
    return out


# toy example

TOY_GRID = np.geomspace(0.1, 10.0, C.DEFAULT_GRID_POINTS)
TOY_TOL = 0.5


@dataclass
class ToyStudy:
    """Per (tau, seed): whether both large clusters land near the true centers, and whether noise dominates one."""

    taus: np.ndarray
    seeds: np.ndarray
    located: np.ndarray
    noise_dominated: np.ndarray

    @property
    def hits(self) -> np.ndarray:
        return self.located.sum(axis=1)

    @property
    def best_index(self) -> int:
        """Grid index with most hits among taus where noise never dominates; -1 if none."""
        ok = ~self.noise_dominated.any(axis=1)
        if not ok.any():
            return -1
        return int(np.argmax(np.where(ok, self.hits, -1)))


def toy_outcome(x: np.ndarray, labels: np.ndarray, tau: float) -> tuple[bool, bool]:
    res = gamma_sup(x, GammaSupConfig.make(tau))
    truth = np.asarray(C.TOY_CENTERS, dtype=float)
    if res.k < 2:
        return False, bool(np.mean(labels == 0) >= 0.5)
    big = res.centers[:2]
    # match the two largest clusters to the true centers in the better order
    d = np.linalg.norm(big[:, None, :] - truth[None, :, :], axis=2)
    located = bool(min(max(d[0, 0], d[1, 1]), max(d[0, 1], d[1, 0])) <= TOY_TOL)
    dominated = any(np.mean(labels[res.labels == k] == 0) >= 0.5 for k in (1, 2))
    return located, dominated


def toy_study(seeds=range(10), taus=TOY_GRID) -> ToyStudy:
    taus = np.asarray(taus, dtype=float)
    seeds = np.asarray(list(seeds))
    located = np.zeros((len(taus), len(seeds)), dtype=bool)
    dominated = np.zeros_like(located)
    for j, seed in enumerate(seeds):
        x, labels = gen_toy(int(seed))
        for i, tau in enumerate(taus):
            located[i, j], dominated[i, j] = toy_outcome(x, labels, tau)
    return ToyStudy(taus, seeds, located, dominated)
