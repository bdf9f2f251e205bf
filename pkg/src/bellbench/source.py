"""Emission-time streams for the two attenuated sources.

Coherent mode is a homogeneous Poisson process. Chaotic mode is a doubly
stochastic (Cox) process: the intensity is piecewise constant over blocks of
length coherence_time, with block intensities drawn i.i.d. exponential with
the configured mean rate. That construction gives the normalized intensity
correlation g2 -> 2 at zero delay, decaying linearly to 1 at one coherence
time (fixed aligned blocks), and a geometric per-block photon count, which is
what the sparse generator samples directly when the block grid is too fine to
materialize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import PolarizerSpec, SourceSpec

# Above this many blocks, sample occupied blocks sparsely instead of drawing
# one intensity per block.
_MAX_DENSE_BLOCKS = 4_000_000


@dataclass
class PolarizedStream:
    """Photons that survived a preparation polarizer, all with one polarization."""

    times: np.ndarray  # s within run, strictly increasing
    polarization_deg: float
    origin: str  # "a" | "b"


def _strictly_increasing(times: np.ndarray) -> np.ndarray:
    """Drop arrivals that collide after float rounding (sub-fs separations)."""
    if len(times) < 2:
        return times
    keep = np.concatenate(([True], np.diff(times) > 0.0))
    return times[keep]


def generate_coherent_stream(rate: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson arrival times on [0, duration)."""
    if not rate > 0.0:
        raise ParameterError(f"rate must be positive, got {rate}")
    if not duration > 0.0:
        raise ParameterError(f"duration must be positive, got {duration}")
    mean = rate * duration
    chunk = int(mean + 6.0 * np.sqrt(mean) + 16)
    times = np.cumsum(rng.exponential(1.0 / rate, chunk))
    while times.size and times[-1] < duration:
        extra = np.cumsum(rng.exponential(1.0 / rate, chunk)) + times[-1]
        times = np.concatenate([times, extra])
    times = times[times < duration]
    return _strictly_increasing(times)


def _chaotic_dense(rate: float, coherence_time: float, duration: float, n_blocks: int,
                   rng: np.random.Generator) -> np.ndarray:
    lam = rng.exponential(rate, n_blocks)
    lengths = np.full(n_blocks, coherence_time)
    lengths[-1] = duration - (n_blocks - 1) * coherence_time  # clip the overhang
    counts = rng.poisson(lam * lengths)
    total = int(counts.sum())
    starts = np.repeat(np.arange(n_blocks, dtype=np.float64) * coherence_time, counts)
    return starts + rng.random(total) * np.repeat(lengths, counts)


def _chaotic_sparse(rate: float, coherence_time: float, n_blocks: int,
                    rng: np.random.Generator) -> np.ndarray:
    # Per-block counts are geometric: success = 1/(1 + rate * coherence_time).
    mu = rate * coherence_time
    success = 1.0 / (1.0 + mu)
    occupied_prob = mu / (1.0 + mu)
    expect_occupied = n_blocks * occupied_prob
    chunk = int(expect_occupied + 6.0 * np.sqrt(expect_occupied) + 16)
    gaps = rng.geometric(occupied_prob, chunk)
    blocks = np.cumsum(gaps) - 1
    while blocks.size and blocks[-1] < n_blocks:
        extra = np.cumsum(rng.geometric(occupied_prob, chunk)) + blocks[-1]
        blocks = np.concatenate([blocks, extra])
    blocks = blocks[blocks < n_blocks]
    counts = rng.geometric(success, blocks.size)
    total = int(counts.sum())
    starts = np.repeat(blocks.astype(np.float64) * coherence_time, counts)
    return starts + rng.random(total) * coherence_time


def generate_chaotic_stream(rate: float, coherence_time: float, duration: float,
                            rng: np.random.Generator) -> np.ndarray:
    """Cox-process arrival times on [0, duration) with bunched statistics."""
    if not rate > 0.0:
        raise ParameterError(f"rate must be positive, got {rate}")
    if not coherence_time > 0.0:
        raise ParameterError(f"coherence_time must be positive, got {coherence_time}")
    if not duration > 0.0:
        raise ParameterError(f"duration must be positive, got {duration}")
    n_blocks = max(1, int(np.ceil(duration / coherence_time)))
    if n_blocks <= _MAX_DENSE_BLOCKS:
        times = _chaotic_dense(rate, coherence_time, duration, n_blocks, rng)
    else:
        times = _chaotic_sparse(rate, coherence_time, n_blocks, rng)
    times.sort()
    times = times[times < duration]  # the last block may overhang the run
    return _strictly_increasing(times)


def generate_stream(spec: SourceSpec, duration: float, rng: np.random.Generator) -> np.ndarray:
    if spec.mode == "chaotic":
        return generate_chaotic_stream(spec.rate, spec.coherence_time, duration, rng)
    return generate_coherent_stream(spec.rate, duration, rng)


def prepare_polarization(times: np.ndarray, prep: PolarizerSpec, rng: np.random.Generator,
                         origin: str) -> PolarizedStream:
    """Filter an unpolarized stream through a preparation polarizer.

    Unpolarized light passes a linear polarizer with probability t_max / 2;
    survivors carry the polarizer's axis as their polarization.
    """
    survive = rng.random(len(times)) < (prep.t_max / 2.0)
    return PolarizedStream(times=times[survive], polarization_deg=prep.axis_deg, origin=origin)
