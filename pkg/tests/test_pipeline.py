"""End-to-end simulation pipeline: determinism, rate oracles, mini sweeps."""

import dataclasses
import math

import numpy as np
import pytest

from bellbench.coincidence import coincidence_probability
from bellbench.errors import ParameterError
from bellbench.eventfile import encode_events
from bellbench.model import (
    DaqSpec,
    DetectorSpec,
    PolarizerSpec,
    SourceSpec,
    default_config,
    pixel_column,
)
from bellbench.pipeline import (
    bell_from_sweep,
    histogram_of,
    read_sweep_csv,
    simulate_events,
    simulate_histogram,
    simulate_run,
    summarize_events,
    sweep,
    ticks_of,
    write_sweep_csv,
)


def small_config(seed=101, runs=2, duration=20.0, rate=1000.0):
    cfg = default_config(rng_seed=seed)
    return dataclasses.replace(
        cfg,
        source_a=SourceSpec(rate=rate),
        source_b=SourceSpec(rate=rate),
        daq=DaqSpec(run_duration=duration, n_runs=runs),
    )


def ideal_config(seed=101, runs=2, duration=20.0, rate=1000.0):
    ideal = dict(t_max=1.0, extinction_ratio=1e12)
    cfg = small_config(seed, runs, duration, rate)
    return dataclasses.replace(
        cfg,
        prep_a=PolarizerSpec(axis_deg=0.0, **ideal),
        prep_b=PolarizerSpec(axis_deg=0.0, **ideal),
        analyzer_c=PolarizerSpec(axis_deg=0.0, **ideal),
        analyzer_d=PolarizerSpec(axis_deg=0.0, **ideal),
        detector=DetectorSpec(quantum_efficiency=1.0),
        d1_pixels=pixel_column(0, (0, 1, 2, 3)) | pixel_column(1, (0, 1, 2, 3)),
        d2_pixels=pixel_column(2, (0, 1, 2, 3)) | pixel_column(3, (0, 1, 2, 3)),
    )


def test_simulation_is_deterministic_per_seed():
    cfg = small_config()
    a = simulate_events(cfg)
    b = simulate_events(cfg)
    assert a.equals(b)
    assert encode_events(cfg, a) == encode_events(cfg, b)
    c = simulate_events(dataclasses.replace(cfg, rng_seed=999))
    assert not a.equals(c)


def test_runs_are_independent_of_generation_order():
    cfg = small_config()
    run1_alone = simulate_run(cfg, 1)
    _ = simulate_run(cfg, 0)
    run1_again = simulate_run(cfg, 1)
    assert run1_alone.equals(run1_again)


def test_singles_rates_match_rate_arithmetic():
    # oracle: rate * (t_max/2 from prep) * (3/16 routing) * t_max(analyzer)
    #         * QE * duty, summed over both sources
    cfg = small_config(seed=7, runs=5, duration=100.0)
    events = simulate_events(cfg)
    summary = summarize_events(cfg, events)
    per_source = 1000.0 * (0.8 / 2.0) * (3.0 / 16.0) * 0.8 * 0.15
    expected = 2.0 * per_source * summary["live_time_s"]
    for key in ("singles_d1", "singles_d2"):
        observed = summary[key]
        assert abs(observed - expected) < 5.0 * math.sqrt(expected)


def test_crossed_analyzer_leaves_only_dark_counts():
    cfg = ideal_config(seed=11, runs=2, duration=20.0)
    cfg = dataclasses.replace(
        cfg,
        analyzer_d=PolarizerSpec(axis_deg=90.0, t_max=1.0, extinction_ratio=1e12),
        detector=DetectorSpec(quantum_efficiency=1.0, dark_rate_per_pixel=5.0),
    )
    events = simulate_events(cfg)
    summary = summarize_events(cfg, events)
    expected_dark = 8 * 5.0 * summary["live_time_s"]  # 8 pixels in the d2 group
    assert abs(summary["singles_d2"] - expected_dark) < 5.0 * math.sqrt(expected_dark)
    assert summary["singles_d1"] > 5 * summary["singles_d2"]


def test_histogram_accumulation_matches_bulk_build():
    cfg = small_config(seed=13, runs=3, duration=30.0)
    bin_width = ticks_of(100e-9, cfg.detector.clock_period)
    max_delay = ticks_of(10e-6, cfg.detector.clock_period)
    chunked = simulate_histogram(cfg, bin_width, max_delay)
    bulk = histogram_of(simulate_events(cfg), cfg, bin_width, max_delay)
    assert np.array_equal(chunked.bins, bulk.bins)
    assert chunked.total_singles_d1 == bulk.total_singles_d1
    assert chunked.live_time == pytest.approx(bulk.live_time)


def test_mini_sweep_follows_cos_squared():
    cfg = ideal_config(seed=17, runs=4, duration=50.0, rate=2000.0)
    result = sweep(cfg, [0.0, 60.0])
    point = result.points[1]
    assert point.p12.value == pytest.approx(0.25, abs=3 * point.p12.sigma)
    assert result.points[0].p12.value == 1.0


def test_sweep_requires_reference_angle():
    cfg = ideal_config()
    with pytest.raises(ParameterError, match="0-degree"):
        sweep(cfg, [20.0, 60.0])


def test_sweep_csv_round_trip(tmp_path):
    cfg = ideal_config(seed=19, runs=2, duration=20.0)
    result = sweep(cfg, [0.0, 60.0])
    path = tmp_path / "sweep.csv"
    write_sweep_csv(result.points, path)
    back = read_sweep_csv(path)
    assert len(back) == 2
    assert back[1].theta_deg == 60.0
    assert back[1].p12 == result.points[1].p12
    assert back[1].pairs.raw_coincidences == result.points[1].pairs.raw_coincidences
    assert back[1].live_time == result.points[1].live_time


def test_bell_from_sweep_missing_angles_are_named():
    cfg = ideal_config(seed=23, runs=1, duration=10.0)
    result = sweep(cfg, [0.0, 20.0, 60.0])
    with pytest.raises(ParameterError) as err:
        bell_from_sweep(result.points, 20.0)
    assert "2*theta (40 deg)" in str(err.value)
    assert "60" not in str(err.value)


def test_bell_from_sweep_uses_singles_of_required_rows():
    cfg = ideal_config(seed=29, runs=4, duration=50.0, rate=2000.0)
    result = sweep(cfg, [0.0, 60.0, 120.0, 180.0])
    outcome = bell_from_sweep(result.points, 60.0)
    assert outcome.p1_a_prime.value == pytest.approx(0.25, abs=0.05)
    assert outcome.p2_b.value == pytest.approx(0.25, abs=0.05)
    assert outcome.verdict.s_value == pytest.approx(-0.5, abs=0.15)
    assert not outcome.verdict.violated

    correlated = bell_from_sweep(result.points, 60.0, correlated=True)
    assert correlated.verdict.s_value == outcome.verdict.s_value
    assert correlated.verdict.uncertainty > 0.0
    assert correlated.verdict.uncertainty != pytest.approx(outcome.verdict.uncertainty, rel=1e-6)


def test_sweep_background_mode_isolates_bunching_excess():
    # sideband subtraction only makes sense for bunched data: the corrected
    # count is the short-delay excess above the accidental plateau
    cfg = ideal_config(seed=31, runs=2, duration=20.0, rate=4e4)
    chaotic = SourceSpec(rate=4e4, mode="chaotic", coherence_time=200e-9)
    cfg = dataclasses.replace(cfg, source_a=chaotic, source_b=chaotic)
    result = sweep(cfg, [0.0, 60.0], background="sideband", window_s=(0.0, 400e-9))
    zero, sixty = result.points
    assert zero.pairs.background > 0.0
    assert 0.0 < zero.pairs.corrected < zero.pairs.raw_coincidences
    # half the pairs are same-source and carry the (g2 - 1) excess of tau_c / 2
    r1 = zero.singles_d1 / zero.live_time
    r2 = zero.singles_d2 / zero.live_time
    expected_excess = 0.5 * r1 * r2 * 100e-9 * zero.live_time
    assert zero.pairs.corrected == pytest.approx(expected_excess, rel=0.35)
    assert sixty.p12.value == pytest.approx(0.25, abs=4 * sixty.p12.sigma)


def test_background_estimate_matches_accidental_rate_formula():
    # independent coherent sources: background ~= r1 * r2 * window * live_time
    cfg = ideal_config(seed=37, runs=5, duration=100.0, rate=2000.0)
    bin_width = ticks_of(100e-9, cfg.detector.clock_period)
    max_delay = ticks_of(100e-6, cfg.detector.clock_period)
    h = simulate_histogram(cfg, bin_width, max_delay)
    from bellbench.coincidence import windowed_result, sideband_ticks

    window = (0, ticks_of(2e-6, cfg.detector.clock_period))
    res = windowed_result(h, window, background="sideband",
                          sideband=sideband_ticks(cfg.detector.clock_period))
    r1 = h.total_singles_d1 / h.live_time
    r2 = h.total_singles_d2 / h.live_time
    expected = r1 * r2 * 2e-6 * h.live_time
    assert abs(res.background - expected) < 3.0 * math.sqrt(expected)
