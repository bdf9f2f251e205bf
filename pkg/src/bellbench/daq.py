"""Detector response and acquisition gating.

detect() applies, in order: quantum-efficiency thinning, per-pixel dark
counts, the DAQ transfer dead windows (the last transfer_dead_time of every
cycle period is blind), clock quantization to integer ticks, and pixel-level
pile-up (simultaneous photons on one pixel within one tick merge into a
single event). Output is sorted by (tick, pixel).
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .model import DaqSpec, DetectorSpec, EventArrays, N_PIXELS
from .optics import RoutedPhotons


def live_mask(times: np.ndarray, daq: DaqSpec) -> np.ndarray:
    """True for arrival times that fall inside a live acquisition window."""
    if daq.transfer_dead_time == 0.0:
        return np.ones(len(times), dtype=bool)
    return (times % daq.period) < daq.cycle_length


def detect(photons: RoutedPhotons, det: DetectorSpec, daq: DaqSpec, run_index: int,
           rng: np.random.Generator) -> EventArrays:
    """One run's worth of detected events for photons arriving on the grid."""
    times = np.asarray(photons.times, dtype=np.float64)
    pixels = np.asarray(photons.pixels, dtype=np.uint8)
    if len(times) and (times.min() < 0.0 or times.max() >= daq.run_duration):
        raise ParameterError("arrival times must lie within [0, run_duration)")

    kept = rng.random(len(times)) < det.quantum_efficiency
    times = times[kept]
    pixels = pixels[kept]

    if det.dark_rate_per_pixel > 0.0:
        dark_counts = rng.poisson(det.dark_rate_per_pixel * daq.run_duration, N_PIXELS)
        total_dark = int(dark_counts.sum())
        dark_pixels = np.repeat(np.arange(N_PIXELS, dtype=np.uint8), dark_counts)
        dark_times = rng.random(total_dark) * daq.run_duration
        times = np.concatenate([times, dark_times])
        pixels = np.concatenate([pixels, dark_pixels])

    alive = live_mask(times, daq)
    times = times[alive]
    pixels = pixels[alive]

    ticks = np.floor(times / det.clock_period).astype(np.uint64)

    order = np.lexsort((pixels, ticks))
    ticks = ticks[order]
    pixels = pixels[order]
    if len(ticks):
        # pile-up: collapse identical (tick, pixel) pairs
        first = np.concatenate(([True], (np.diff(ticks.astype(np.int64)) != 0) | (np.diff(pixels.astype(np.int16)) != 0)))
        ticks = ticks[first]
        pixels = pixels[first]

    run = np.full(len(ticks), run_index, dtype=np.uint32)
    return EventArrays(run=run, tick=ticks, pixel=pixels)
