import math

import numpy as np
import pytest
from scipy.special import ndtri

from spiderlab import (
    FORGOTTEN,
    GINI,
    HOOVER,
    LEAVES,
    NAMED_INDICES,
    ZAGREB,
    GeneralizedZagreb,
    Preferential,
    SimConfig,
    UniformLeaf,
    UnknownIndexError,
    convergence_probe,
    ks_normal,
    moment_catalog,
    run_experiment,
    standardize,
)
from spiderlab.indices import Affine, Generic
from spiderlab.montecarlo import SAMPLE_CAP, model_probability


def test_seed_horizon_experiment_is_deterministic():
    config = SimConfig(model=UniformLeaf(0.5), horizon=1, replicates=1,
                       master_seed=5, indices=NAMED_INDICES)
    summary = run_experiment(config)
    means = {key: stats.mean for key, stats in summary.stats.items()}
    assert means == {"leaves": 3.0, "zagreb": 12.0, "gordon_scantlebury": 3.0,
                     "platt": 6.0, "forgotten": 30.0, "gini": 0.25, "hoover": 0.25}
    assert all(stats.variance == 0.0 for stats in summary.stats.values())
    assert all(stats.count == 1 for stats in summary.stats.values())


def test_rerun_is_bit_identical():
    config = SimConfig(model=UniformLeaf(0.4), horizon=101, replicates=3000,
                       master_seed=99, indices=NAMED_INDICES)
    a = run_experiment(config, keep_samples=True)
    b = run_experiment(config, keep_samples=True)
    assert a.to_json() == b.to_json()
    for key in a.samples:
        assert np.array_equal(a.samples[key], b.samples[key])


def test_parallel_run_matches_serial():
    config = SimConfig(model=UniformLeaf(0.6), horizon=80, replicates=4000,
                       master_seed=123, indices=(LEAVES, ZAGREB, GINI))
    serial = run_experiment(config, threads=1, keep_samples=True)
    parallel = run_experiment(config, threads=3, keep_samples=True)
    assert serial.to_json() == parallel.to_json()
    for key in serial.samples:
        assert np.array_equal(serial.samples[key], parallel.samples[key])


def test_preferential_equals_uniform_half():
    base = dict(horizon=120, replicates=2000, master_seed=31, indices=NAMED_INDICES)
    a = run_experiment(SimConfig(model=Preferential(), **base))
    b = run_experiment(SimConfig(model=UniformLeaf(0.5), **base))
    assert a.stats == b.stats


def test_spot_checks_run_on_one_percent():
    config = SimConfig(model=UniformLeaf(0.5), horizon=30, replicates=950,
                       master_seed=1, indices=(ZAGREB, GINI))
    summary = run_experiment(config)
    assert summary.spot_checks == 10  # replicates 0, 100, ..., 900


def test_leaf_estimates_track_the_law():
    n, p, replicates = 101, 0.3, 100_000
    config = SimConfig(model=UniformLeaf(p), horizon=n, replicates=replicates,
                       master_seed=2718, indices=(LEAVES,))
    stats = run_experiment(config).stats["leaves"]
    true_mean = 3 + (n - 1) * p
    true_var = (n - 1) * p * (1 - p)
    assert abs(stats.mean - true_mean) <= 4 * math.sqrt(true_var / replicates)
    # variance estimator within 5 relative standard errors
    rel_se = math.sqrt(2.0 / replicates)
    assert abs(stats.variance - true_var) <= 5 * rel_se * true_var


def test_empirical_mean_within_catalog_band():
    n, p, replicates = 60, 0.7, 20_000
    config = SimConfig(model=UniformLeaf(p), horizon=n, replicates=replicates,
                       master_seed=512, indices=NAMED_INDICES)
    summary = run_experiment(config)
    for spec in NAMED_INDICES:
        entry = moment_catalog(spec)
        mean = float(entry.mean(n, p))
        se = math.sqrt(float(entry.variance(n, p)) / replicates)
        assert abs(summary.stats[entry.key].mean - mean) <= 4 * se, entry.key


def test_config_validation_happens_before_work():
    with pytest.raises(ValueError):
        SimConfig(model=UniformLeaf(0.5), horizon=0, replicates=10,
                  master_seed=1, indices=(LEAVES,))
    with pytest.raises(ValueError):
        SimConfig(model=UniformLeaf(0.5), horizon=5, replicates=0,
                  master_seed=1, indices=(LEAVES,))
    with pytest.raises(ValueError):
        SimConfig(model=UniformLeaf(0.5), horizon=5, replicates=10,
                  master_seed=1, indices=())
    with pytest.raises(ValueError):
        SimConfig(model=UniformLeaf(0.5), horizon=5, replicates=10,
                  master_seed=1, indices=(LEAVES,), clt_shift=-5.0)
    with pytest.raises(UnknownIndexError):
        SimConfig(model=UniformLeaf(0.5), horizon=5, replicates=10,
                  master_seed=1, indices=(Generic(Affine(1, -3), 2),))


def test_sample_retention_and_thinning():
    config = SimConfig(model=UniformLeaf(0.5), horizon=3, replicates=2500,
                       master_seed=7, indices=(LEAVES,))
    summary = run_experiment(config, keep_samples=True)
    assert len(summary.samples["leaves"]) == 2500
    assert run_experiment(config).samples is None
    # thinning keeps every ceil(R / cap)-th replicate
    stride = math.ceil(2500 / SAMPLE_CAP)
    assert stride == 1


def test_model_probability():
    assert model_probability(UniformLeaf(0.3)) == 0.3
    assert model_probability(Preferential()) == 0.5


# -- standardize ---------------------------------------------------------------

def test_standardize_constant_sample_is_zero():
    # at horizon 1 every tree is the seed, whose leaf count equals the center
    z = standardize(np.full(32, 3.0), LEAVES, 1, 0.5, 0.0)
    assert np.all(z == 0.0)


def test_standardize_shift_identity():
    samples = np.array([10.0, 11.0, 15.0])
    n, p = 40, 0.3
    z1 = standardize(samples, LEAVES, n, p, 1.0)
    z2 = standardize(samples, LEAVES, n, p, 9.0)
    ratio = math.sqrt((n + 9.0) / (n + 1.0))
    assert np.allclose(z1, z2 * ratio, rtol=1e-14)


def test_standardize_population_moments():
    # the numerator is exactly centered; population variance is (n-1)/(n+k)
    n, p, k, replicates = 400, 0.5, 0.0, 40_000
    config = SimConfig(model=UniformLeaf(p), horizon=n, replicates=replicates,
                       master_seed=404, indices=(LEAVES,))
    summary = run_experiment(config, keep_samples=True)
    z = standardize(summary.samples["leaves"], LEAVES, n, p, k)
    assert abs(z.mean()) <= 4 / math.sqrt(replicates)
    expected_var = (n - 1) / (n + k)
    assert abs(z.var(ddof=1) - expected_var) <= 5 * math.sqrt(2 / replicates)


def test_standardize_requires_cataloged_normalizer():
    with pytest.raises(UnknownIndexError):
        standardize(np.ones(10), GINI, 10, 0.5)


# -- KS ------------------------------------------------------------------------

def test_ks_on_exact_normal_quantiles():
    size = 1000
    quantiles = ndtri((np.arange(1, size + 1) - 0.5) / size)
    assert ks_normal(quantiles) < 0.002


def test_ks_point_mass_is_half():
    assert ks_normal(np.zeros(100)) == pytest.approx(0.5)


def test_ks_rejects_small_samples():
    with pytest.raises(ValueError):
        ks_normal(np.zeros(9))


def test_ks_shrinks_with_horizon():
    replicates = 4000
    distances = {}
    for n in (50, 2000):
        config = SimConfig(model=UniformLeaf(0.5), horizon=n, replicates=replicates,
                           master_seed=606, indices=(LEAVES,))
        summary = run_experiment(config, keep_samples=True)
        z = standardize(summary.samples["leaves"], LEAVES, n, 0.5, 0.0)
        distances[n] = ks_normal(z)
    assert distances[2000] < distances[50]


# -- convergence probes ----------------------------------------------------------

def test_probe_requires_limit():
    with pytest.raises(UnknownIndexError):
        convergence_probe(LEAVES, UniformLeaf(0.5), [10], 0.1, 2, 100, 1)


def test_probe_rejects_bad_parameters():
    with pytest.raises(ValueError):
        convergence_probe(GINI, UniformLeaf(0.5), [10], -0.1, 2, 100, 1)
    with pytest.raises(ValueError):
        convergence_probe(GINI, UniformLeaf(0.5), [10], 0.1, 0, 100, 1)


def test_probe_errors_shrink_and_respect_chebyshev():
    epsilon, replicates = 0.03, 4000
    rows = convergence_probe(GINI, UniformLeaf(0.5), [200, 800], epsilon, 2,
                             replicates, master_seed=11)
    assert [row.n for row in rows] == [200, 800]
    assert all(row.limit == 0.375 for row in rows)
    assert rows[1].r_mean_error < rows[0].r_mean_error
    assert rows[1].exceedance <= rows[0].exceedance
    entry = moment_catalog(GINI)
    for row in rows:
        mean_offset = abs(float(entry.mean(row.n, 0.5)) - row.limit)
        spread = epsilon - mean_offset
        bound = float(entry.variance(row.n, 0.5)) / spread**2
        se = math.sqrt(max(bound * (1 - bound), 1.0 / replicates) / replicates)
        assert row.exceedance <= bound + 4 * se


def test_probe_hoover_preferential_limit():
    rows = convergence_probe(HOOVER, Preferential(), [300, 1200], 0.05, 1,
                             3000, master_seed=21)
    assert all(row.limit == 0.25 for row in rows)
    assert all(row.p == 0.5 for row in rows)
    assert rows[1].r_mean_error < rows[0].r_mean_error
    assert abs(rows[1].mean - 0.25) < 0.01


def test_probe_scales_generalized_zagreb():
    rows = convergence_probe(GeneralizedZagreb(3), UniformLeaf(0.5), [500], 0.05, 2,
                             2000, master_seed=5)
    assert rows[0].limit == 0.125
    assert abs(rows[0].mean - 0.125) < 0.01


def test_forgotten_probe_equals_gz3_probe():
    common = dict(n_grid=[150], epsilon=0.05, r=2.0, replicates=1500, master_seed=77)
    a = convergence_probe(FORGOTTEN, UniformLeaf(0.5), common["n_grid"], common["epsilon"],
                          common["r"], common["replicates"], common["master_seed"])
    b = convergence_probe(GeneralizedZagreb(3), UniformLeaf(0.5), common["n_grid"],
                          common["epsilon"], common["r"], common["replicates"],
                          common["master_seed"])
    assert a[0].mean == b[0].mean
    assert a[0].exceedance == b[0].exceedance
