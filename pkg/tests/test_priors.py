import numpy as np
import pytest
from scipy import stats

from nervegraph import kernels
from nervegraph.priors import (
    DensityUnavailable,
    MaternPrior,
    PackingError,
    StraussPrior,
    UniformPrior,
    Window,
    log_density,
    prior_from_dict,
    sample_erdos_renyi,
    sample_matern3,
    sample_strauss_fixed_n,
    sample_uniform,
    strauss_log_density,
    uniform_ball,
)


def brute_close_pairs(P, thr):
    n = len(P)
    return sum(np.linalg.norm(P[i] - P[j]) < thr for i in range(n) for j in range(i + 1, n))


def pair_distances(P):
    i, j = np.triu_indices(len(P), 1)
    return np.linalg.norm(P[i] - P[j], axis=1)


def min_distance(P):
    # one statistic per configuration keeps the KS samples independent
    return pair_distances(P).min()


@pytest.mark.parametrize("d", [2, 3])
def test_uniform_ball_support_and_volume(d):
    rng = np.random.default_rng(d)
    P = sample_uniform(100_000, Window("ball", d), rng)
    norms = np.linalg.norm(P, axis=1)
    assert norms.max() <= 1.0
    frac = np.mean(norms <= 2 ** (-1 / d))
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / len(P))
    assert np.all(np.abs(P.mean(axis=0)) < 3 * np.sqrt(1 / (d + 2) / len(P)))
    assert stats.kstest(norms ** d, "uniform").pvalue > 0.01


def test_window_checks():
    w = Window("square", 2)
    assert w.contains([[0, 0], [1, 1]])
    assert not w.contains([[0, 1.1]])
    assert not Window("ball", 2).contains([[0.8, 0.8]])
    with pytest.raises(ValueError):
        Window("ball", 2).check([[0.8, 0.8]])
    with pytest.raises(ValueError):
        Window("disc", 2)
    with pytest.raises(ValueError):
        sample_uniform(0, w, np.random.default_rng(0))


def test_close_pair_kernel_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(200):
        P = uniform_ball(int(rng.integers(1, 20)), 2, rng)
        thr = rng.uniform(0.05, 1.0)
        assert kernels.close_pair_count(P, thr) == brute_close_pairs(P, thr)


def test_log_density_examples():
    rng = np.random.default_rng(1)
    P = uniform_ball(8, 2, rng)
    assert strauss_log_density(P, 1.0, 0.3) == 0.0
    r = 0.4
    R = 0.7 * r
    # two close pairs at distance 0.5 < 2R = 0.56, all other pairs far apart
    Q = np.array([[-0.8, 0.0], [-0.3, 0.0], [0.3, 0.0], [0.8, 0.0]])
    assert log_density(StraussPrior(0.75, R), Q) == pytest.approx(2 * np.log(0.75))
    u = UniformPrior()
    assert log_density(u, P) - log_density(u, uniform_ball(8, 2, rng)) == 0.0
    with pytest.raises(ValueError):
        log_density(u, np.array([[2.0, 0.0]]))
    with pytest.raises(DensityUnavailable):
        log_density(MaternPrior(0.05), P)


def test_strauss_validation():
    with pytest.raises(ValueError):
        StraussPrior(1.5, 0.2)
    with pytest.raises(ValueError):
        StraussPrior(0.5, 0.0)


def test_strauss_gamma_one_is_uniform():
    rng = np.random.default_rng(2)
    w = Window("ball", 2)
    a = [min_distance(sample_strauss_fixed_n(4, 1.0, 0.2, w, rng)) for _ in range(10_000)]
    b = [min_distance(sample_uniform(4, w, rng)) for _ in range(10_000)]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_strauss_two_point_stationary_law():
    """n=2: P(close) must equal g p / (g p + 1 - p) with p the uniform probability."""
    rng = np.random.default_rng(3)
    w = Window("ball", 2)
    R, g = 0.3, 0.4
    U = uniform_ball(400_000, 2, rng)
    p = np.mean(np.linalg.norm(U[::2] - U[1::2], axis=1) < 2 * R)
    expected = g * p / (g * p + 1 - p)
    hits = []
    for _ in range(4_000):
        P = sample_strauss_fixed_n(2, g, R, w, rng, burn_in=30)
        hits.append(np.linalg.norm(P[0] - P[1]) < 2 * R)
    assert abs(np.mean(hits) - expected) < 3 * np.sqrt(expected * (1 - expected) / len(hits))


def test_strauss_close_pairs_decrease_with_gamma():
    rng = np.random.default_rng(4)
    w = Window("ball", 2)
    means = []
    for g in (0.35, 0.75, 1.0):
        P = w.sample(6, rng)
        counts = []
        for _ in range(2_000):
            P = sample_strauss_fixed_n(6, g, 0.28, w, rng, burn_in=2, init=P)
            counts.append(kernels.close_pair_count(P, 0.56))
        means.append(np.mean(counts))
    assert means[0] < means[1] < means[2]


def test_strauss_output_inside_window():
    rng = np.random.default_rng(5)
    for kind in ("ball", "square"):
        w = Window(kind, 2)
        for _ in range(20):
            assert w.contains(sample_strauss_fixed_n(10, 0.5, 0.1, w, rng, burn_in=5))


def test_matern_hard_core_and_fixed_point():
    rng = np.random.default_rng(6)
    w = Window("square", 2)
    for _ in range(30):
        rho = 0.035
        P = sample_matern3(75, rho, w, rng)
        assert len(P) == 75 and w.contains(P)
        assert pair_distances(P).min() >= 2 * rho
        # feeding the retained points back through the thinning rule keeps every one
        kept = []
        for p in P:
            if all(np.linalg.norm(p - q) >= 2 * rho for q in kept):
                kept.append(p)
        assert len(kept) == len(P)


def test_matern_small_radius_is_uniform():
    rng = np.random.default_rng(7)
    w = Window("square", 2)
    a = [min_distance(sample_matern3(5, 1e-9, w, rng)) for _ in range(5_000)]
    b = [min_distance(sample_uniform(5, w, rng)) for _ in range(5_000)]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_matern_packing_error():
    with pytest.raises(PackingError):
        sample_matern3(75, 0.35, Window("square", 2), np.random.default_rng(0), max_attempts=5_000)
    with pytest.raises(ValueError):
        sample_matern3(5, 0.0, Window("square", 2), np.random.default_rng(0))


def test_erdos_renyi_examples():
    rng = np.random.default_rng(8)
    assert sample_erdos_renyi(10, 0.0, rng).edges == frozenset()
    assert len(sample_erdos_renyi(10, 1.0, rng).edges) == 45
    counts = np.array([len(sample_erdos_renyi(75, 0.065, rng).edges) for _ in range(10_000)])
    assert abs(counts.mean() - 2775 * 0.065) < 0.5
    q = np.percentile(counts[:2500], [25, 50, 75])
    np.testing.assert_allclose(q, [172, 181, 189], atol=1)
    with pytest.raises(ValueError):
        sample_erdos_renyi(5, 1.5, rng)


def test_prior_from_dict():
    w = Window("ball", 2)
    assert isinstance(prior_from_dict({"kind": "uniform"}, w), UniformPrior)
    s = prior_from_dict({"kind": "strauss", "gamma": 0.75, "R": 0.28}, w)
    assert s.to_dict() == {"kind": "strauss", "gamma": 0.75, "R": 0.28}
    assert prior_from_dict({"kind": "matern3", "rho": 0.05}, w).rho == 0.05
    with pytest.raises(ValueError):
        prior_from_dict({"kind": "poisson"}, w)
