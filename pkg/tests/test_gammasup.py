import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist

from gsup.datagen import MixtureSpec, gen_mixture, gen_toy
from gsup.gammasup import GammaSupConfig, gamma_nonblurring, gamma_sup, gamma_sup_plus


def cfg(tau, s=0.025, **kw):
    return GammaSupConfig.make(tau, s=s, **kw)


def same_partition(a, b) -> bool:
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(1.0, conv_eps=0)
    with pytest.raises(ValueError):
        cfg(1.0, conv_eps=1e-3, merge_eps=1e-4)
    with pytest.raises(ValueError):
        cfg(1.0, max_iter=0)
    with pytest.raises(ValueError):
        cfg(1.0, s=-1)
    with pytest.raises(ValueError):
        gamma_sup(np.array([[0.0], [np.nan]]), cfg(1.0))


def test_two_far_points_stay_apart():
    tau, s = 1.0, 0.025
    d = 1.01 * tau / np.sqrt(s)
    r = gamma_sup(np.array([[0.0], [d]]), cfg(tau, s))
    assert r.k == 2 and r.iterations == 1 and r.converged
    assert sorted(r.centers.ravel().tolist()) == pytest.approx([0.0, d], abs=1e-12)


def test_two_close_points_meet_at_midpoint():
    tau = 2.0
    d = 0.1 * tau
    r = gamma_sup(np.array([[0.0], [d]]), cfg(tau))
    assert r.k == 1 and r.converged
    assert r.centers[0, 0] == pytest.approx(d / 2, abs=1e-12)


def test_nonblurring_single_and_pair():
    r = gamma_nonblurring(np.array([[1.5, -2.0]]), cfg(1.0))
    assert r.k == 1 and r.iterations == 1
    assert r.centers[0] == pytest.approx([1.5, -2.0], abs=1e-14)
    r = gamma_nonblurring(np.array([[0.0], [0.3]]), cfg(1.0))
    assert r.k == 1 and r.centers[0, 0] == pytest.approx(0.15, abs=1e-9)


def test_result_invariants_on_toy():
    x, _ = gen_toy(0)
    c = cfg(0.6)
    r = gamma_sup(x, c)
    assert r.sizes.sum() == len(x)
    assert set(np.unique(r.labels)) == set(range(1, r.k + 1))
    assert np.array_equal(np.bincount(r.labels)[1:], r.sizes)
    assert np.all(np.diff(r.sizes) <= 0)
    assert pdist(r.centers).min() >= c.merge_eps * c.params.tau


@pytest.mark.parametrize("seed,tau", [(0, 0.5), (1, 0.8), (2, 1.5)])
def test_hull_contracts_every_sweep(seed, tau):
    x, _ = gen_toy(seed)
    r = gamma_sup(x, cfg(tau, record_trajectory=True, max_iter=200))
    span = np.ptp(x, axis=0)
    tol = 1e-12 * span
    for prev, cur in itertools.pairwise(r.trajectory):
        assert np.all(cur.min(axis=0) >= prev.min(axis=0) - tol)
        assert np.all(cur.max(axis=0) <= prev.max(axis=0) + tol)
    assert len(r.trajectory) == r.iterations + 1


@pytest.mark.parametrize("tau", [0.6, 1.2])
def test_translation_equivariance(tau):
    x, _ = gen_toy(3)
    v = np.array([17.25, -4.5])
    a, b = gamma_sup(x, cfg(tau)), gamma_sup(x + v, cfg(tau))
    assert np.array_equal(a.labels, b.labels)
    assert np.max(np.abs(b.centers - (a.centers + v))) <= 1e-9


@pytest.mark.parametrize("c", [0.01, 3.0, 250.0])
def test_scale_equivariance(c):
    x, _ = gen_toy(4)
    tau = 0.8
    a, b = gamma_sup(x, cfg(tau)), gamma_sup(c * x, cfg(c * tau))
    assert np.array_equal(a.labels, b.labels)
    assert np.max(np.abs(b.centers - c * a.centers)) <= 1e-9 * max(1.0, c)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 4), st.integers(0, 2**31 - 1), st.floats(0.005, 1.0))
def test_singleton_phase_exact(n, p, seed, s):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-50, 50, (n, p))
    tau = 1.0
    if n > 1:
        tau = 0.999 * pdist(x).min() * np.sqrt(s)
    r = gamma_sup(x, cfg(tau, s))
    assert r.k == n and r.iterations == 1 and r.converged
    assert np.allclose(r.centers[r.labels - 1], x, rtol=0, atol=1e-12 * max(1.0, np.abs(x).max()))


@pytest.mark.parametrize("seed", [0, 5])
def test_permutation_equivariance(seed):
    x, _ = gen_mixture(MixtureSpec(seed=seed))
    perm = np.random.default_rng(seed).permutation(len(x))
    a, b = gamma_sup(x, cfg(0.9)), gamma_sup(x[perm], cfg(0.9))
    assert same_partition(a.labels[perm], b.labels)
    order = lambda c: c[np.lexsort(c.T[::-1])]
    assert np.array_equal(order(a.centers), order(b.centers))


@pytest.mark.parametrize("n", [400, 2200])
def test_threads_do_not_change_result(n):
    rng = np.random.default_rng(n)
    centers = rng.uniform(-20, 20, (12, 3))
    x = centers[rng.integers(12, size=n)] + rng.standard_normal((n, 3))
    runs = [gamma_sup(x, cfg(1.0, threads=t, max_iter=60)) for t in (1, 2, 4)]
    for r in runs[1:]:
        assert np.array_equal(r.labels, runs[0].labels)
        assert np.array_equal(r.centers, runs[0].centers)
        assert r.iterations == runs[0].iterations


def test_nonblurring_threads_do_not_change_result():
    x, _ = gen_mixture(MixtureSpec(n=300, seed=1))
    a = gamma_nonblurring(x, cfg(0.7, threads=1))
    b = gamma_nonblurring(x, cfg(0.7, threads=3))
    assert np.array_equal(a.labels, b.labels) and np.array_equal(a.centers, b.centers)


def test_plus_noop_when_small():
    x, _ = gen_toy(0)
    a = gamma_sup(x, cfg(0.6))
    b = gamma_sup_plus(x, cfg(0.6), size_threshold=70)
    assert np.array_equal(a.labels, b.labels) and np.array_equal(a.centers, b.centers)


def _best_cut(x1d):
    """Brute force over all threshold cuts of sorted 1-D data: minimal within-cluster sum of squares."""
    v = np.sort(x1d)
    best = None
    for i in range(1, len(v)):
        w = v[:i].var() * i + v[i:].var() * (len(v) - i)
        if best is None or w < best[0]:
            best = (w, (v[i - 1] + v[i]) / 2)
    return best[1]


def test_plus_splits_merged_blobs():
    rng = np.random.default_rng(9)
    x = np.concatenate([rng.normal(0, 0.3, 40), rng.normal(3, 0.3, 40)])[:, None]
    c = cfg(5.0)
    assert gamma_sup(x, c).k == 1
    r = gamma_sup_plus(x, c, size_threshold=70, seed=0)
    assert r.k == 2
    cut = _best_cut(x.ravel())
    side = (x.ravel() > cut).astype(int)
    assert same_partition(side, r.labels)
    with pytest.raises(ValueError):
        gamma_sup_plus(x, c, size_threshold=1)


def test_blurring_faster_on_one_component():
    """When every point ends in a single cluster, blurring needs fewer sweeps."""
    for tau in (1.0, 2.0):
        b, nb = [], []
        for seed in range(20):
            x, _ = gen_mixture(MixtureSpec(pi0=1.0, seed=seed))
            b.append(gamma_sup(x, cfg(tau)).iterations)
            nb.append(gamma_nonblurring(x, cfg(tau)).iterations)
        assert np.mean(b) <= np.mean(nb)


@pytest.mark.xfail(
    strict=True,
    reason="separate collapsed clusters keep drifting towards each other with tiny weights, so blurring runs "
    "hit the sweep cap while nonblurring reaches its fixed point",
)
@pytest.mark.parametrize("tau", [0.6, 1.0])
def test_blurring_no_slower_on_mixture(tau):
    b, nb = [], []
    for seed in range(20):
        x, _ = gen_mixture(MixtureSpec(seed=seed))
        b.append(gamma_sup(x, cfg(tau)).iterations)
        nb.append(gamma_nonblurring(x, cfg(tau)).iterations)
    assert np.mean(b) <= np.mean(nb)
