"""Offline coincidence analysis of detected event streams.

The delay histogram counts every ordered pair (e1 in detector 1, e2 in
detector 2) within one run with 0 <= t2 - t1 < max_delay; ties at equal
ticks land in the delta-t = 0 bin. The accumulation is a two-pointer sweep
over the per-run sorted tick arrays (O(n + pairs)) and must agree bin for
bin with the brute-force all-pairs count, which the test suite enforces on
randomized inputs.

Background ("accidental") coincidences are estimated from a sideband of the
same histogram at large delays, scaled to the window of interest. For two
independent sources essentially every pair is accidental, and the paper-style
normalized probability p12 is a ratio of windowed pair rates, so by default
coincidence_probability applies no background subtraction; sideband
subtraction is available as an option and is what bunching analyses use to
isolate the short-delay excess.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParameterError
from .model import Estimate, EventArrays, PixelId

DEFAULT_SIDEBAND_S = (2e-6, 10e-6)


def sideband_ticks(clock_period: float, sideband_s: tuple[float, float] = DEFAULT_SIDEBAND_S) -> tuple[int, int]:
    """Convert a sideband given in seconds to integer tick bounds."""
    lo, hi = sideband_s
    return int(round(lo / clock_period)), int(round(hi / clock_period))


@dataclass
class DelayHistogram:
    """Counts of D1->D2 pair delays, plus the singles that produced them."""

    bin_width: int  # ticks per bin
    bins: np.ndarray  # int64 counts, bin k covers [k*bin_width, (k+1)*bin_width)
    total_singles_d1: int
    total_singles_d2: int
    live_time: float  # s

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.int64)
        if self.bin_width < 1:
            raise ParameterError("bin_width must be at least one tick")
        if np.any(self.bins < 0):
            raise ParameterError("histogram counts must be non-negative")

    @property
    def n_bins(self) -> int:
        return len(self.bins)

    @property
    def max_delay(self) -> int:
        return self.bin_width * self.n_bins

    def merge(self, other: "DelayHistogram") -> "DelayHistogram":
        """Bin-wise sum; associative and order-independent across runs."""
        if (self.bin_width, self.n_bins) != (other.bin_width, other.n_bins):
            raise ParameterError("cannot merge histograms with different binning")
        return DelayHistogram(
            bin_width=self.bin_width,
            bins=self.bins + other.bins,
            total_singles_d1=self.total_singles_d1 + other.total_singles_d1,
            total_singles_d2=self.total_singles_d2 + other.total_singles_d2,
            live_time=self.live_time + other.live_time,
        )


@dataclass
class CoincidenceResult:
    """Windowed pair count with its estimated accidental background."""

    raw_coincidences: int
    background: float
    corrected: float
    singles_d1: int
    singles_d2: int
    uncertainty: float


def _pixel_codes(pixels: Iterable[PixelId]) -> np.ndarray:
    return np.array(sorted(p.code for p in pixels), dtype=np.uint8)


def _expand_ranges(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Concatenate arange(lo[i], hi[i]) for all i."""
    counts = hi - lo
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = np.repeat(lo, counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(
        np.concatenate(([0], np.cumsum(counts)[:-1])), counts
    )
    return starts + offsets


def build_histogram(events: EventArrays, d1_pixels: Iterable[PixelId], d2_pixels: Iterable[PixelId],
                    bin_width: int, max_delay: int, live_time: float = 0.0) -> DelayHistogram:
    """Accumulate the D1->D2 delay histogram over all runs of one event set."""
    d1 = frozenset(d1_pixels)
    d2 = frozenset(d2_pixels)
    if not d1 or not d2:
        raise ParameterError("both pixel groups must be non-empty")
    if d1 & d2:
        raise ParameterError("pixel groups overlap")
    if bin_width < 1:
        raise ParameterError("bin_width must be at least one tick")
    if max_delay < bin_width or max_delay % bin_width != 0:
        raise ParameterError("max_delay must be a positive multiple of bin_width")
    if not events.is_sorted():
        raise ValueError("events must be sorted by (run, tick)")

    n_bins = max_delay // bin_width
    bins = np.zeros(n_bins, dtype=np.int64)

    in_d1 = np.isin(events.pixel, _pixel_codes(d1))
    in_d2 = np.isin(events.pixel, _pixel_codes(d2))
    total_d1 = int(in_d1.sum())
    total_d2 = int(in_d2.sum())

    # per-run two-pointer sweep; pairs never span runs
    if len(events):
        _, run_starts = np.unique(events.run, return_index=True)
        run_edges = np.append(run_starts, len(events))
    else:
        run_edges = np.array([0])
    for start, stop in zip(run_edges[:-1], run_edges[1:]):
        t1 = events.tick[start:stop][in_d1[start:stop]]
        t2 = events.tick[start:stop][in_d2[start:stop]]
        if not len(t1) or not len(t2):
            continue
        lo = np.searchsorted(t2, t1, side="left")
        hi = np.searchsorted(t2, t1 + np.uint64(max_delay), side="left")
        idx = _expand_ranges(lo.astype(np.int64), hi.astype(np.int64))
        if len(idx):
            deltas = t2[idx] - np.repeat(t1, (hi - lo))
            bins += np.bincount(
                (deltas // np.uint64(bin_width)).astype(np.int64), minlength=n_bins
            )

    return DelayHistogram(
        bin_width=bin_width,
        bins=bins,
        total_singles_d1=total_d1,
        total_singles_d2=total_d2,
        live_time=live_time,
    )


def _window_bins(h: DelayHistogram, window: tuple[int, int], name: str) -> slice:
    lo, hi = window
    if lo < 0 or hi > h.max_delay or lo >= hi:
        raise ParameterError(f"{name} {window} outside the histogram range [0, {h.max_delay})")
    if lo % h.bin_width or hi % h.bin_width:
        raise ParameterError(f"{name} {window} must align to {h.bin_width}-tick bin edges")
    return slice(lo // h.bin_width, hi // h.bin_width)


def windowed_result(h: DelayHistogram, window: tuple[int, int], background: str = "none",
                    sideband: tuple[int, int] | None = None) -> CoincidenceResult:
    """Sum the histogram over a tick window, optionally subtracting accidentals.

    background="sideband" estimates the accidental density from the given
    sideband (ticks) of the same histogram and scales it to the window width.
    """
    sel = _window_bins(h, window, "window")
    raw = int(h.bins[sel].sum())
    if background == "none":
        bg, var_bg = 0.0, 0.0
    elif background == "sideband":
        if sideband is None:
            raise ParameterError("background='sideband' requires a sideband window")
        sb = _window_bins(h, sideband, "sideband")
        n_sb = int(h.bins[sb].sum())
        width_ratio = (window[1] - window[0]) / (sideband[1] - sideband[0])
        bg = n_sb * width_ratio
        var_bg = n_sb * width_ratio**2
    else:
        raise ParameterError(f"unknown background mode {background!r}")
    return CoincidenceResult(
        raw_coincidences=raw,
        background=bg,
        corrected=raw - bg,
        singles_d1=h.total_singles_d1,
        singles_d2=h.total_singles_d2,
        uncertainty=float(np.sqrt(raw + var_bg)),
    )


def bunching_ratio(h: DelayHistogram, peak_window: tuple[int, int],
                   baseline_window: tuple[int, int]) -> Estimate:
    """Per-bin mean counts in the peak window over the baseline window."""
    peak = _window_bins(h, peak_window, "peak window")
    base = _window_bins(h, baseline_window, "baseline window")
    if max(peak.start, base.start) < min(peak.stop, base.stop):
        raise ParameterError("peak and baseline windows overlap")
    n_peak_bins = peak.stop - peak.start
    n_base_bins = base.stop - base.start
    sum_peak = int(h.bins[peak].sum())
    sum_base = int(h.bins[base].sum())
    if n_base_bins == 0 or sum_base == 0:
        raise ParameterError("baseline window is empty")
    value = (sum_peak / n_peak_bins) / (sum_base / n_base_bins)
    if sum_peak > 0:
        sigma = value * float(np.sqrt(1.0 / sum_peak + 1.0 / sum_base))
    else:
        sigma = (1.0 / n_peak_bins) / (sum_base / n_base_bins)
    return Estimate(value=value, sigma=sigma)


def _rate_ratio(a: float, sigma_a: float, live_a: float, b: float, sigma_b: float,
                live_b: float) -> Estimate:
    """(a / live_a) / (b / live_b) with first-order Poisson propagation."""
    if b <= 0.0:
        raise ParameterError("reference (denominator) count must be positive")
    value = (a * live_b) / (b * live_a)
    d_da = live_b / (b * live_a)
    d_db = a * live_b / (b * b * live_a)
    sigma = float(np.hypot(d_da * sigma_a, d_db * sigma_b))
    return Estimate(value=value, sigma=sigma)


def coincidence_probability(h_theta: DelayHistogram, h_zero: DelayHistogram,
                            window: tuple[int, int] | None = None, background: str = "none",
                            sideband: tuple[int, int] | None = None) -> Estimate:
    """Normalized coincidence probability: windowed pair rate over the aligned-setting rate.

    Both histograms must share binning; rates are normalized per unit live
    time. The default window is the full recorded range.
    """
    if (h_theta.bin_width, h_theta.n_bins) != (h_zero.bin_width, h_zero.n_bins):
        raise ParameterError("histograms must share bin width and range")
    if h_theta.live_time <= 0.0 or h_zero.live_time <= 0.0:
        raise ParameterError("both histograms need a positive live_time")
    if window is None:
        window = (0, h_theta.max_delay)
    r_theta = windowed_result(h_theta, window, background, sideband)
    r_zero = windowed_result(h_zero, window, background, sideband)
    if r_zero.corrected <= 0.0:
        raise ParameterError("reference coincidence count is zero after correction")
    return _rate_ratio(
        r_theta.corrected, r_theta.uncertainty, h_theta.live_time,
        r_zero.corrected, r_zero.uncertainty, h_zero.live_time,
    )


def singles_probability(events: EventArrays, pixels: Iterable[PixelId], live_time: float,
                        reference_events: EventArrays, reference_pixels: Iterable[PixelId],
                        reference_live_time: float) -> Estimate:
    """Singles rate at one setting over the rate at the aligned setting."""
    if live_time <= 0.0 or reference_live_time <= 0.0:
        raise ParameterError("live times must be positive")
    n = int(np.isin(events.pixel, _pixel_codes(frozenset(pixels))).sum())
    n_ref = int(np.isin(reference_events.pixel, _pixel_codes(frozenset(reference_pixels))).sum())
    if n_ref == 0:
        raise ParameterError("reference singles count is zero")
    return _rate_ratio(n, float(np.sqrt(n)), live_time, n_ref, float(np.sqrt(n_ref)), reference_live_time)
