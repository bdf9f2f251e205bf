"""End-to-end orchestration: seeded runs, sweeps over analyzer angles, verdicts.

Every run owns an independent random substream derived from
(rng_seed, run index), so runs can be generated in any order or in parallel
workers without changing the output. A sweep simulates one configuration per
analyzer-d angle; the movable analyzer realizes every rotation while
preparation and analyzer c stay fixed, so the normalized detector-2 singles
at angles 2*theta and theta provide the p1(a') and p2(b) terms of the
statistic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bellch import ChVerdict, s_of_theta_measured, verdict_from_ratio
from .coincidence import (
    DEFAULT_SIDEBAND_S,
    CoincidenceResult,
    DelayHistogram,
    build_histogram,
    coincidence_probability,
    sideband_ticks,
    windowed_result,
)
from .daq import detect
from .errors import ParameterError
from .model import Estimate, EventArrays, ExperimentConfig, wrap_angle
from .optics import route_to_pixels
from .source import generate_stream, prepare_polarization

DEFAULT_BIN_WIDTH_S = 100e-9
DEFAULT_ANALYZE_MAX_DELAY_S = 10e-6  # delay-histogram products
DEFAULT_SWEEP_MAX_DELAY_S = 100e-6  # pair statistics for normalized probabilities

_ANGLE_TOL = 1e-6


def run_rng(rng_seed: int, run_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(rng_seed), int(run_index)])))


def ticks_of(seconds: float, clock_period: float) -> int:
    return int(round(seconds / clock_period))


def simulate_run(config: ExperimentConfig, run_index: int) -> EventArrays:
    """Source -> preparation -> routing -> detection for one run."""
    rng = run_rng(config.rng_seed, run_index)
    duration = config.daq.run_duration
    streams = []
    for spec, prep, origin in (
        (config.source_a, config.prep_a, "a"),
        (config.source_b, config.prep_b, "b"),
    ):
        raw = generate_stream(spec, duration, rng)
        streams.append(prepare_polarization(raw, prep, rng, origin))
    routed = route_to_pixels(streams, config, rng)
    return detect(routed, config.detector, config.daq, run_index, rng)


def simulate_events(config: ExperimentConfig) -> EventArrays:
    """All runs of one configuration, concatenated in run order."""
    return EventArrays.concatenate([simulate_run(config, r) for r in range(config.daq.n_runs)])


def simulate_histogram(config: ExperimentConfig, bin_width: int, max_delay: int) -> DelayHistogram:
    """Per-run histogram accumulation without retaining events (memory-lean)."""
    live_per_run = config.daq.live_time_per_run()
    total = None
    for run in range(config.daq.n_runs):
        events = simulate_run(config, run)
        part = build_histogram(
            events, config.d1_pixels, config.d2_pixels, bin_width, max_delay, live_time=live_per_run
        )
        total = part if total is None else total.merge(part)
    return total


def histogram_of(events: EventArrays, config: ExperimentConfig, bin_width: int,
                 max_delay: int) -> DelayHistogram:
    return build_histogram(
        events, config.d1_pixels, config.d2_pixels, bin_width, max_delay,
        live_time=config.daq.total_live_time(),
    )


def summarize_events(config: ExperimentConfig, events: EventArrays) -> dict:
    d1 = np.isin(events.pixel, np.array(config.d1_codes, dtype=np.uint8))
    d2 = np.isin(events.pixel, np.array(config.d2_codes, dtype=np.uint8))
    live = config.daq.total_live_time()
    return {
        "n_events": len(events),
        "singles_d1": int(d1.sum()),
        "singles_d2": int(d2.sum()),
        "live_time_s": live,
        "rate_d1": d1.sum() / live,
        "rate_d2": d2.sum() / live,
    }


# ---------------------------------------------------------------------------
# Sweeps over the analyzer-d angle


@dataclass
class SweepPoint:
    """Analysis products for one analyzer angle, normalized to the 0-degree row."""

    theta_deg: float
    p12: Estimate
    pairs: CoincidenceResult
    singles_d1: int
    singles_d2: int
    live_time: float


@dataclass
class SweepResult:
    points: list[SweepPoint]
    histograms: dict[float, DelayHistogram]
    bin_width: int
    max_delay: int


def _match_angle(target: float, candidates: list[float]) -> float | None:
    for c in candidates:
        if abs(wrap_angle(c) - wrap_angle(target)) < _ANGLE_TOL:
            return c
    return None


def sweep(config: ExperimentConfig, thetas: list[float], *, bin_width_s: float = DEFAULT_BIN_WIDTH_S,
          max_delay_s: float = DEFAULT_SWEEP_MAX_DELAY_S, window_s: tuple[float, float] | None = None,
          background: str = "none", sideband_s: tuple[float, float] = DEFAULT_SIDEBAND_S) -> SweepResult:
    """Simulate and analyze one run set per analyzer angle, normalizing to 0 degrees."""
    if _match_angle(0.0, list(thetas)) is None:
        raise ParameterError("sweep must include the 0-degree reference angle")
    clock = config.detector.clock_period
    bin_width = max(1, ticks_of(bin_width_s, clock))
    n_bins = max(1, ticks_of(max_delay_s, clock) // bin_width)
    max_delay = bin_width * n_bins
    window = None if window_s is None else (ticks_of(window_s[0], clock), ticks_of(window_s[1], clock))
    sideband = sideband_ticks(clock, sideband_s) if background == "sideband" else None

    histograms: dict[float, DelayHistogram] = {}
    singles: dict[float, tuple[int, int]] = {}
    for theta in thetas:
        cfg = config.with_analyzer_d(theta)
        h = simulate_histogram(cfg, bin_width, max_delay)
        histograms[theta] = h
        singles[theta] = (h.total_singles_d1, h.total_singles_d2)

    zero = histograms[_match_angle(0.0, list(thetas))]
    points = []
    for theta in thetas:
        h = histograms[theta]
        p12 = coincidence_probability(h, zero, window=window, background=background, sideband=sideband)
        result = windowed_result(
            h, window if window is not None else (0, h.max_delay), background, sideband
        )
        points.append(
            SweepPoint(
                theta_deg=float(theta),
                p12=p12,
                pairs=result,
                singles_d1=singles[theta][0],
                singles_d2=singles[theta][1],
                live_time=h.live_time,
            )
        )
    return SweepResult(points=points, histograms=histograms, bin_width=bin_width, max_delay=max_delay)


# ---------------------------------------------------------------------------
# Assembling the measured statistic from sweep rows


@dataclass
class BellOutcome:
    theta_deg: float
    verdict: ChVerdict
    p12_theta: Estimate
    p12_3theta: Estimate
    p1_a_prime: Estimate
    p2_b: Estimate


def _singles_ratio(point: SweepPoint, reference: SweepPoint) -> Estimate:
    n, n_ref = point.singles_d2, reference.singles_d2
    if n_ref == 0:
        raise ParameterError("reference singles count is zero")
    value = (n / point.live_time) / (n_ref / reference.live_time)
    sigma = value * math.sqrt(1.0 / max(n, 1) + 1.0 / n_ref) if n else 0.0
    return Estimate(value=value, sigma=sigma)


def bell_from_sweep(points: list[SweepPoint], theta: float, *, correlated: bool = False) -> BellOutcome:
    """Assemble S(theta) from sweep rows at 0, theta, 2*theta, and 3*theta.

    p1(a') and p2(b) come from the normalized detector-2 singles of the
    2*theta and theta rows: analyzer d realizes every rotation of the fixed
    preparation axis, so those ratios measure cos^2 at the respective angles.
    """
    angles = [p.theta_deg for p in points]
    required = {"0": 0.0, "theta": theta, "2*theta": 2 * theta, "3*theta": 3 * theta}
    found: dict[str, SweepPoint] = {}
    missing = []
    for name, angle in required.items():
        match = _match_angle(angle, angles)
        if match is None:
            missing.append(f"{name} ({wrap_angle(angle):g} deg)")
        else:
            found[name] = points[angles.index(match)]
    if missing:
        raise ParameterError(f"sweep is missing required angles: {', '.join(missing)}")

    ref = found["0"]
    p12_theta = found["theta"].p12
    p12_3theta = found["3*theta"].p12
    p1 = _singles_ratio(found["2*theta"], ref)
    p2 = _singles_ratio(found["theta"], ref)

    if not correlated:
        verdict = s_of_theta_measured(p12_theta, p12_3theta, p1, p2)
    else:
        verdict = _correlated_verdict(found, p12_theta, p12_3theta, p1, p2)
    return BellOutcome(
        theta_deg=theta,
        verdict=verdict,
        p12_theta=p12_theta,
        p12_3theta=p12_3theta,
        p1_a_prime=p1,
        p2_b=p2,
    )


def _correlated_verdict(found: dict[str, SweepPoint], p12_theta: Estimate, p12_3theta: Estimate,
                        p1: Estimate, p2: Estimate) -> ChVerdict:
    """Propagation acknowledging the shared 0-degree normalization.

    Each ratio splits into its own-count noise and the reference-count noise;
    the latter moves all ratios of one kind coherently.
    """

    def rel_var(count: float) -> float:
        return 1.0 / count if count > 0 else 0.0

    ref = found["0"]
    v_theta = rel_var(found["theta"].pairs.corrected)
    v_3theta = rel_var(found["3*theta"].pairs.corrected)
    v_ref = rel_var(ref.pairs.corrected)
    num = 3.0 * p12_theta.value - p12_3theta.value
    var_num = (
        9.0 * p12_theta.value**2 * v_theta
        + p12_3theta.value**2 * v_3theta
        + num**2 * v_ref
    )

    u_2theta = rel_var(found["2*theta"].singles_d2)
    u_theta = rel_var(found["theta"].singles_d2)
    u_ref = rel_var(ref.singles_d2)
    den = p1.value + p2.value
    var_den = p1.value**2 * u_2theta + p2.value**2 * u_theta + den**2 * u_ref

    return verdict_from_ratio(num, math.sqrt(var_num), den, math.sqrt(var_den))


# ---------------------------------------------------------------------------
# CSV products


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_histogram_csv(h: DelayHistogram, clock_period: float, path: str | Path) -> None:
    """Schema: bin_low_ns, count."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low_ns", "count"])
        for k, count in enumerate(h.bins):
            writer.writerow([_fmt(k * h.bin_width * clock_period * 1e9), int(count)])


SWEEP_COLUMNS = [
    "theta_deg", "p12", "p12_sigma", "pairs_raw", "pairs_background",
    "pairs_corrected", "pairs_sigma", "singles_d1", "singles_d2", "live_time_s",
]


def write_sweep_csv(points: list[SweepPoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for p in points:
            writer.writerow([
                _fmt(p.theta_deg), _fmt(p.p12.value), _fmt(p.p12.sigma),
                p.pairs.raw_coincidences, _fmt(p.pairs.background),
                _fmt(p.pairs.corrected), _fmt(p.pairs.uncertainty),
                p.singles_d1, p.singles_d2, _fmt(p.live_time),
            ])


def read_sweep_csv(path: str | Path) -> list[SweepPoint]:
    points = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_COLUMNS:
            raise ParameterError(f"{path}: not a sweep table (columns {reader.fieldnames})")
        for row in reader:
            points.append(
                SweepPoint(
                    theta_deg=float(row["theta_deg"]),
                    p12=Estimate(float(row["p12"]), float(row["p12_sigma"])),
                    pairs=CoincidenceResult(
                        raw_coincidences=int(row["pairs_raw"]),
                        background=float(row["pairs_background"]),
                        corrected=float(row["pairs_corrected"]),
                        singles_d1=int(row["singles_d1"]),
                        singles_d2=int(row["singles_d2"]),
                        uncertainty=float(row["pairs_sigma"]),
                    ),
                    singles_d1=int(row["singles_d1"]),
                    singles_d2=int(row["singles_d2"]),
                    live_time=float(row["live_time_s"]),
                )
            )
    return points


def write_bell_csv(outcomes: list[BellOutcome], path: str | Path) -> None:
    """Schema: theta_deg, S, sigma, violated."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_deg", "S", "sigma", "violated"])
        for o in outcomes:
            writer.writerow([
                _fmt(o.theta_deg), _fmt(o.verdict.s_value), _fmt(o.verdict.uncertainty),
                str(o.verdict.violated).lower(),
            ])
