"""Analyzer polarizers and the expanded-beam pixel routing.

Both beams are expanded far beyond the detector, so every photon lands on a
uniformly random pixel of the 4x4 grid. Pixels grouped into detector 1 sit
behind analyzer c, pixels grouped into detector 2 behind analyzer d; photons
routed to ungrouped pixels are discarded. Propagation delay is common to both
arms and absorbed to zero, so arrival time equals emission time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import ExperimentConfig, N_PIXELS, PolarizerSpec, cos_squared_deg, relative_angle
from .source import PolarizedStream


def malus_transmission(photon_pol_deg: float, analyzer: PolarizerSpec) -> float:
    """Transmission probability through a non-ideal linear polarizer.

    t_max * (cos^2 D + sin^2 D / extinction_ratio) for the relative angle D
    between the photon polarization and the analyzer axis.
    """
    c2 = cos_squared_deg(relative_angle(photon_pol_deg, analyzer.axis_deg))
    return analyzer.t_max * (c2 + (1.0 - c2) / analyzer.extinction_ratio)


@dataclass
class RoutedPhotons:
    """Photons that reached a grouped pixel and passed its analyzer."""

    times: np.ndarray  # s within run
    pixels: np.ndarray  # uint8 codes


def route_to_pixels(streams: list[PolarizedStream], config: ExperimentConfig,
                    rng: np.random.Generator) -> RoutedPhotons:
    """Scatter prepared photons over the grid and filter through c or d."""
    if config.d1_pixels & config.d2_pixels:
        raise ParameterError("d1_pixels and d2_pixels must be disjoint")

    # Per-pixel pass probability, filled per stream polarization.
    d1 = np.zeros(N_PIXELS, dtype=bool)
    d2 = np.zeros(N_PIXELS, dtype=bool)
    d1[list(config.d1_codes)] = True
    d2[list(config.d2_codes)] = True

    kept_times: list[np.ndarray] = []
    kept_pixels: list[np.ndarray] = []
    for stream in streams:
        prob = np.zeros(N_PIXELS)
        prob[d1] = malus_transmission(stream.polarization_deg, config.analyzer_c)
        prob[d2] = malus_transmission(stream.polarization_deg, config.analyzer_d)
        pixels = rng.integers(0, N_PIXELS, len(stream.times), dtype=np.uint8)
        keep = rng.random(len(stream.times)) < prob[pixels]
        kept_times.append(stream.times[keep])
        kept_pixels.append(pixels[keep])

    if not kept_times:
        return RoutedPhotons(np.empty(0), np.empty(0, np.uint8))
    return RoutedPhotons(np.concatenate(kept_times), np.concatenate(kept_pixels))
