"""Statistical contracts of the coherent and chaotic stream generators."""

import numpy as np
import pytest

from bellbench.errors import ParameterError
from bellbench.model import PolarizerSpec
from bellbench.source import (
    _chaotic_dense,
    _chaotic_sparse,
    generate_chaotic_stream,
    generate_coherent_stream,
    prepare_polarization,
)


def test_coherent_rejects_bad_arguments():
    rng = np.random.default_rng(0)
    with pytest.raises(ParameterError):
        generate_coherent_stream(0.0, 10.0, rng)
    with pytest.raises(ParameterError):
        generate_coherent_stream(1000.0, 0.0, rng)
    with pytest.raises(ParameterError):
        generate_chaotic_stream(1000.0, 0.0, 1.0, rng)


def test_coherent_strictly_increasing_and_in_range():
    rng = np.random.default_rng(1)
    times = generate_coherent_stream(1e4, 2.0, rng)
    assert np.all(np.diff(times) > 0)
    assert times[0] >= 0.0 and times[-1] < 2.0


def test_coherent_count_tail_bound():
    # rate 1000 over 100 s: counts stay within 4 sqrt(1e5) of 1e5 across 1000 seeds
    mean = 1e5
    bound = 4.0 * np.sqrt(mean)
    counts = np.array([
        len(generate_coherent_stream(1000.0, 100.0, np.random.default_rng(seed)))
        for seed in range(1000)
    ])
    assert np.all(np.abs(counts - mean) < bound)


def test_coherent_variance_to_mean_near_one():
    rng = np.random.default_rng(2)
    times = generate_coherent_stream(1e4, 10.0, rng)
    counts = np.bincount((times / 1e-3).astype(np.int64), minlength=10_000)
    vmr = counts.var() / counts.mean()
    assert abs(vmr - 1.0) < 0.05


def test_chaotic_mean_count_law_of_large_numbers():
    rate, duration = 1000.0, 10.0
    counts = np.array([
        len(generate_chaotic_stream(rate, 200e-9, duration, np.random.default_rng(seed)))
        for seed in range(100)
    ])
    # Var(N) = rT + r^2 tau T for the block Cox process
    sigma_single = np.sqrt(rate * duration + rate**2 * 200e-9 * duration)
    se = sigma_single / np.sqrt(len(counts))
    assert abs(counts.mean() - rate * duration) < 5.0 * se


def test_chaotic_variance_to_mean_exceeds_one_in_fine_bins():
    # bins of 25 ns inside 200 ns blocks: VMR = 1 + rate * bin
    rate, tau, duration = 2e7, 200e-9, 0.05
    rng = np.random.default_rng(3)
    times = generate_chaotic_stream(rate, tau, duration, rng)
    bins = (times / 25e-9).astype(np.int64)
    counts = np.bincount(bins, minlength=int(duration / 25e-9))
    vmr = counts.var() / counts.mean()
    assert vmr > 1.2
    assert abs(vmr - 1.5) < 0.2


def test_chaotic_sorted_and_bounded():
    rng = np.random.default_rng(4)
    times = generate_chaotic_stream(5e4, 1e-6, 0.5, rng)
    assert np.all(np.diff(times) > 0)
    assert times[0] >= 0.0 and times[-1] < 0.5


def test_chaotic_huge_coherence_time_degenerates_to_single_intensity():
    # one block: N | lambda is Poisson(lambda T), so over seeds VMR = 1 + rate T
    rate, duration = 1000.0, 1.0
    counts = np.array([
        len(generate_chaotic_stream(rate, 1e9, duration, np.random.default_rng(seed)))
        for seed in range(400)
    ])
    vmr = counts.var() / counts.mean()
    assert vmr > 100.0  # coherent light would give VMR ~ 1


def test_chaotic_sparse_matches_dense_statistics():
    rate, tau, duration = 1e5, 1e-5, 1.0
    n_blocks = int(duration / tau)
    dense_counts, sparse_counts = [], []
    for seed in range(200):
        dense_counts.append(len(_chaotic_dense(rate, tau, duration, n_blocks, np.random.default_rng(seed))))
        sparse_counts.append(len(_chaotic_sparse(rate, tau, n_blocks, np.random.default_rng(seed + 10_000))))
    dense_counts = np.asarray(dense_counts, dtype=float)
    sparse_counts = np.asarray(sparse_counts, dtype=float)
    mean = rate * duration
    var = rate * duration + rate**2 * tau * duration  # 2e5: doubly stochastic inflation
    se = np.sqrt(var / 200)
    assert abs(dense_counts.mean() - mean) < 5 * se
    assert abs(sparse_counts.mean() - mean) < 5 * se
    assert 0.6 < dense_counts.var() / var < 1.6
    assert 0.6 < sparse_counts.var() / var < 1.6


def test_two_streams_statistically_independent():
    # counts of the two sources in shared 1 ms bins are uncorrelated
    z_scores = []
    n_bins = 1000
    for seed in range(100):
        rng = np.random.default_rng(seed)
        a = generate_coherent_stream(1e4, 1.0, rng)
        b = generate_coherent_stream(1e4, 1.0, rng)
        ca = np.bincount((a / 1e-3).astype(np.int64), minlength=n_bins)[:n_bins]
        cb = np.bincount((b / 1e-3).astype(np.int64), minlength=n_bins)[:n_bins]
        r = np.corrcoef(ca, cb)[0, 1]
        z_scores.append(r * np.sqrt(n_bins - 3))
    pooled = np.mean(z_scores) * np.sqrt(len(z_scores))
    assert abs(pooled) < 3.0


def test_prepare_polarization_survival_fractions():
    rng = np.random.default_rng(5)
    times = generate_coherent_stream(1e4, 10.0, rng)
    n = len(times)

    ideal = prepare_polarization(times, PolarizerSpec(axis_deg=0.0, t_max=1.0), rng, origin="a")
    frac = len(ideal.times) / n
    sigma = np.sqrt(0.5 * 0.5 / n)
    assert abs(frac - 0.5) < 5 * sigma
    assert ideal.polarization_deg == 0.0
    assert ideal.origin == "a"

    lossy = prepare_polarization(times, PolarizerSpec(axis_deg=30.0, t_max=0.8), rng, origin="b")
    frac = len(lossy.times) / n
    sigma = np.sqrt(0.4 * 0.6 / n)
    assert abs(frac - 0.4) < 5 * sigma
    assert lossy.polarization_deg == 30.0


def test_prepare_polarization_empty_stream():
    rng = np.random.default_rng(6)
    out = prepare_polarization(np.empty(0), PolarizerSpec(axis_deg=0.0), rng, origin="a")
    assert len(out.times) == 0


def test_prepare_polarization_preserves_order():
    rng = np.random.default_rng(7)
    times = generate_coherent_stream(1e4, 1.0, rng)
    out = prepare_polarization(times, PolarizerSpec(axis_deg=0.0, t_max=0.9), rng, origin="a")
    assert np.all(np.diff(out.times) > 0)
