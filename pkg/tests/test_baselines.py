import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsup.baselines import KMeansConfig, bisect, gap_statistic, kmeans, kmeans_plus, lloyd
from gsup.datagen import MixtureSpec, gen_mixture


def blobs_1d(seed=0):
    rng = np.random.default_rng(seed)
    return np.concatenate([rng.uniform(-0.1, 0.1, 10), rng.uniform(9.9, 10.1, 10)])[:, None]


def best_cut_partition(v):
    """Brute force over every cut of the sorted values; returns the WCSS-optimal side per point."""
    s = np.sort(v)
    costs = [s[:i].var() * i + s[i:].var() * (len(s) - i) for i in range(1, len(s))]
    i = int(np.argmin(costs)) + 1
    return (v > (s[i - 1] + s[i]) / 2).astype(int)


def same_partition(a, b):
    pairs = set(zip(np.asarray(a).tolist(), np.asarray(b).tolist()))
    return len(pairs) == len(set(np.asarray(a).tolist())) == len(set(np.asarray(b).tolist()))


def test_config_validation():
    for kw in [dict(k=0), dict(k=2, n_init=0), dict(k=2, dismiss_threshold=0), dict(k=2, max_iter=0)]:
        with pytest.raises(ValueError):
            KMeansConfig(**kw)
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), KMeansConfig(k=4))
    with pytest.raises(ValueError):
        kmeans_plus(np.zeros((3, 2)), KMeansConfig(k=4))


def test_kmeans_k_equals_n():
    x = np.random.default_rng(1).standard_normal((12, 3))
    r = kmeans(x, KMeansConfig(k=12, seed=0))
    assert r.k == 12 and r.wcss == 0.0


def test_kmeans_k1_grand_mean():
    x = np.random.default_rng(2).standard_normal((30, 2))
    r = kmeans(x, KMeansConfig(k=1))
    assert r.centers[0] == pytest.approx(x.mean(axis=0), abs=1e-14)
    rp = kmeans_plus(x, KMeansConfig(k=1))
    assert rp.k == 1 and rp.centers[0] == pytest.approx(x.mean(axis=0), abs=1e-14)


def test_kmeans_two_blobs_matches_brute_force():
    x = blobs_1d()
    r = kmeans(x, KMeansConfig(k=2, seed=3))
    assert same_partition(r.labels, best_cut_partition(x.ravel()))


def test_kmeans_plus_matches_kmeans_on_separable():
    x = blobs_1d(5)
    a = kmeans(x, KMeansConfig(k=2, seed=1))
    b = kmeans_plus(x, KMeansConfig(k=2, seed=1, dismiss_threshold=3))
    assert same_partition(a.labels, b.labels)


def test_kmeans_plus_dismisses_small_blob():
    rng = np.random.default_rng(7)
    centers = np.array([[0.0, 0.0], [20.0, 0.0], [10.0, 25.0]])
    sizes = [100, 100, 15]
    x = np.concatenate([c + rng.standard_normal((m, 2)) for c, m in zip(centers, sizes)])
    truth = np.repeat([0, 1, 2], sizes)
    r = kmeans_plus(x, KMeansConfig(k=4, seed=0, dismiss_threshold=30))
    assert r.k == 4
    # the small blob never forms (or dominates) a cluster of its own
    for k in range(1, r.k + 1):
        members = truth[r.labels == k]
        assert np.mean(members == 2) < 0.5
    assert r.sizes.min() >= 30


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6))
def test_lloyd_wcss_nonincreasing(seed, k):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((60, 2)) * rng.uniform(0.5, 3, 2)
    run = lloyd(x, x[rng.choice(60, k, replace=False)])
    h = np.array(run.history)
    assert np.all(np.diff(h) <= 1e-12 * max(1.0, h[0]))


def test_lloyd_repairs_empty_cluster():
    x = np.array([[0.0], [1.0], [10.0], [11.0]])
    # the third center starts far away and would capture nothing
    run = lloyd(x, np.array([[0.5], [10.5], [100.0]]))
    assert np.all(np.bincount(run.assign, minlength=3) > 0)


def test_deterministic_and_permutation_equivariant():
    x, _ = gen_mixture(MixtureSpec(seed=4))
    perm = np.random.default_rng(0).permutation(len(x))
    for fn in (kmeans, kmeans_plus):
        c = KMeansConfig(k=4, seed=9, dismiss_threshold=5)
        a, b = fn(x, c), fn(x, c)
        assert np.array_equal(a.labels, b.labels)
        p = fn(x[perm], c)
        assert same_partition(a.labels[perm], p.labels)


def test_bisect_farthest_pair_and_unsplittable():
    x = blobs_1d(2)
    side = bisect(x)
    assert same_partition(side, best_cut_partition(x.ravel()))
    assert bisect(np.ones((5, 2))) is None


def test_gap_single_blob():
    x = np.random.default_rng(0).standard_normal((100, 2))
    assert gap_statistic(x, 5, seed=0).k == 1


def test_gap_four_separated_blobs():
    picks = []
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        means = MixtureSpec(c=10.0).means
        x = np.concatenate([m + rng.standard_normal((25, 2)) for m in means])
        picks.append(gap_statistic(x, 6, seed=seed).k)
    assert np.mean(np.array(picks) == 4) > 0.9


def test_gap_kmax_one_and_domain():
    x = np.random.default_rng(0).standard_normal((10, 2))
    g = gap_statistic(x, 1)
    assert g.k == 1 and len(g.gaps) == 1
    with pytest.raises(ValueError):
        gap_statistic(x, 11)
    with pytest.raises(ValueError):
        gap_statistic(x, 3, b_refs=0)
