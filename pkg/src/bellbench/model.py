"""Domain types and angle arithmetic for the two-source polarization bench.

Conventions used throughout the package:

* Angles are plain floats in **degrees**, reduced to [0, 360). Conversion to
  radians happens only inside trigonometric evaluation.
* Detector time stamps ("ticks") are unsigned 64-bit integers counting clock
  periods (25 ns by default).
* Photon streams and detected events are held as numpy arrays (struct of
  arrays), with small frozen dataclasses describing the bench itself.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

GRID_SIZE = 4
N_PIXELS = GRID_SIZE * GRID_SIZE


# ---------------------------------------------------------------------------
# Angle arithmetic


def wrap_angle(degrees: float) -> float:
    """Reduce an angle to the canonical [0, 360) range."""
    return float(degrees) % 360.0


def relative_angle(x_deg: float, y_deg: float) -> float:
    """Unsigned angle between two directions, in [0, 180] degrees.

    Directions are treated with period 360; polarizer physics folds the
    result through cos^2, which is insensitive to the 180-degree ambiguity.
    """
    d = abs(wrap_angle(x_deg) - wrap_angle(y_deg)) % 360.0
    return min(d, 360.0 - d)


def cos_squared_deg(delta_deg: float) -> float:
    """cos^2 of an angle given in degrees."""
    return math.cos(math.radians(delta_deg)) ** 2


def ch_settings(theta_deg: float) -> tuple[float, float, float, float]:
    """Analyzer settings (a, a', b, b') for the equal-spacing CH geometry.

    Returns a = 0, a' = 2*theta, b = theta, b' = 3*theta, so the relative
    angles satisfy |a-b| = |a'-b| = |a'-b'| = |a-b'|/3 = theta.
    """
    theta = float(theta_deg)
    if not 0.0 < theta < 60.0:
        raise ParameterError(
            f"setting spacing must lie strictly between 0 and 60 degrees, got {theta}"
        )
    return 0.0, 2.0 * theta, theta, 3.0 * theta


# ---------------------------------------------------------------------------
# Bench description


@dataclass(frozen=True, order=True)
class PixelId:
    """One anode pixel of the 4x4 grid, addressed by (row, col)."""

    row: int
    col: int

    def __post_init__(self):
        if not (0 <= self.row < GRID_SIZE and 0 <= self.col < GRID_SIZE):
            raise ParameterError(f"pixel ({self.row},{self.col}) outside the {GRID_SIZE}x{GRID_SIZE} grid")

    @property
    def code(self) -> int:
        """Single-byte encoding row*4 + col used in event records."""
        return self.row * GRID_SIZE + self.col

    @classmethod
    def from_code(cls, code: int) -> "PixelId":
        if not 0 <= code < N_PIXELS:
            raise ParameterError(f"pixel code {code} outside 0..{N_PIXELS - 1}")
        return cls(code // GRID_SIZE, code % GRID_SIZE)

    @classmethod
    def parse(cls, token: str) -> "PixelId":
        try:
            row_s, col_s = token.split(",")
            return cls(int(row_s), int(col_s))
        except ValueError as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"cannot parse pixel {token!r}; expected 'row,col'") from None

    def __str__(self) -> str:
        return f"{self.row},{self.col}"


@dataclass(frozen=True)
class PolarizerSpec:
    """A linear polarizer: transmission axis plus non-ideal throughput.

    Transmission at relative angle D is t_max * (cos^2 D + sin^2 D / extinction_ratio),
    so an aligned beam sees t_max and a crossed beam sees t_max / extinction_ratio.
    """

    axis_deg: float
    t_max: float = 0.8
    extinction_ratio: float = 1.0e4

    def __post_init__(self):
        object.__setattr__(self, "axis_deg", wrap_angle(self.axis_deg))
        if not 0.0 < self.t_max <= 1.0:
            raise ParameterError(f"t_max must be in (0, 1], got {self.t_max}")
        if not self.extinction_ratio > 1.0:
            raise ParameterError(f"extinction_ratio must exceed 1, got {self.extinction_ratio}")


@dataclass(frozen=True)
class SourceSpec:
    """One attenuated light source, by rate at the analyzer plane."""

    rate: float  # photons / s
    mode: str = "coherent"  # "coherent" | "chaotic"
    coherence_time: float | None = None  # s, chaotic mode only

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ParameterError(f"source rate must be positive, got {self.rate}")
        if self.mode not in ("coherent", "chaotic"):
            raise ParameterError(f"unknown source mode {self.mode!r}")
        if self.mode == "chaotic":
            if self.coherence_time is None or not self.coherence_time > 0.0:
                raise ParameterError("chaotic mode requires a positive coherence_time")


@dataclass(frozen=True)
class DetectorSpec:
    """Multianode detector response and clocking."""

    quantum_efficiency: float = 0.15
    dark_rate_per_pixel: float = 0.0  # counts / s / pixel
    clock_period: float = 25e-9  # s
    coincidence_window: float = 100e-9  # s

    def __post_init__(self):
        if not 0.0 <= self.quantum_efficiency <= 1.0:
            raise ParameterError(f"quantum_efficiency must be in [0, 1], got {self.quantum_efficiency}")
        if self.dark_rate_per_pixel < 0.0:
            raise ParameterError("dark_rate_per_pixel must be non-negative")
        if not self.clock_period > 0.0:
            raise ParameterError("clock_period must be positive")
        if self.coincidence_window < self.clock_period:
            raise ParameterError("coincidence_window must be at least one clock_period")


@dataclass(frozen=True)
class DaqSpec:
    """Acquisition cycling: live for cycle_length, dead for transfer_dead_time."""

    cycle_length: float = 10.0  # s
    transfer_dead_time: float = 0.010  # s
    run_duration: float = 100.0  # s
    n_runs: int = 10

    def __post_init__(self):
        if not self.cycle_length > 0.0:
            raise ParameterError("cycle_length must be positive")
        if self.transfer_dead_time < 0.0:
            raise ParameterError("transfer_dead_time must be non-negative")
        if not self.run_duration > 0.0:
            raise ParameterError("run_duration must be positive")
        if self.n_runs < 1:
            raise ParameterError("n_runs must be at least 1")

    @property
    def period(self) -> float:
        return self.cycle_length + self.transfer_dead_time

    @property
    def duty_cycle(self) -> float:
        return self.cycle_length / self.period

    def live_time_per_run(self) -> float:
        """Seconds of live acquisition within one run of run_duration."""
        full, rem = divmod(self.run_duration, self.period)
        return full * self.cycle_length + min(rem, self.cycle_length)

    def total_live_time(self) -> float:
        return self.n_runs * self.live_time_per_run()


@dataclass(frozen=True)
class ExperimentConfig:
    """Full bench description: sources, four polarizers, detector, DAQ, pixel groups."""

    source_a: SourceSpec
    source_b: SourceSpec
    prep_a: PolarizerSpec
    prep_b: PolarizerSpec
    analyzer_c: PolarizerSpec
    analyzer_d: PolarizerSpec
    detector: DetectorSpec
    daq: DaqSpec
    d1_pixels: frozenset[PixelId]
    d2_pixels: frozenset[PixelId]
    rng_seed: int

    def __post_init__(self):
        object.__setattr__(self, "d1_pixels", frozenset(self.d1_pixels))
        object.__setattr__(self, "d2_pixels", frozenset(self.d2_pixels))
        if not self.d1_pixels or not self.d2_pixels:
            raise ParameterError("d1_pixels and d2_pixels must both be non-empty")
        if self.d1_pixels & self.d2_pixels:
            raise ParameterError("d1_pixels and d2_pixels must be disjoint")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ParameterError("rng_seed must fit an unsigned 64-bit integer")

    @property
    def d1_codes(self) -> tuple[int, ...]:
        return tuple(sorted(p.code for p in self.d1_pixels))

    @property
    def d2_codes(self) -> tuple[int, ...]:
        return tuple(sorted(p.code for p in self.d2_pixels))

    def with_analyzer_d(self, axis_deg: float) -> "ExperimentConfig":
        """Copy of this config with the movable analyzer rotated to axis_deg."""
        return dataclasses.replace(
            self, analyzer_d=dataclasses.replace(self.analyzer_d, axis_deg=axis_deg)
        )


def pixel_column(col: int, rows: tuple[int, ...] = (0, 1, 2)) -> frozenset[PixelId]:
    """Vertical column grouping, the arrangement used for the two detectors."""
    return frozenset(PixelId(r, col) for r in rows)


def default_config(rng_seed: int) -> ExperimentConfig:
    """Bench with the published apparatus numbers and two 3-pixel columns."""
    return ExperimentConfig(
        source_a=SourceSpec(rate=1000.0),
        source_b=SourceSpec(rate=1000.0),
        prep_a=PolarizerSpec(axis_deg=0.0),
        prep_b=PolarizerSpec(axis_deg=0.0),
        analyzer_c=PolarizerSpec(axis_deg=0.0),
        analyzer_d=PolarizerSpec(axis_deg=0.0),
        detector=DetectorSpec(),
        daq=DaqSpec(),
        d1_pixels=pixel_column(0),
        d2_pixels=pixel_column(2),
        rng_seed=rng_seed,
    )


# ---------------------------------------------------------------------------
# Events and measured values


@dataclass(frozen=True)
class PhotonEvent:
    """One detected photon: pixel, integer clock tick, run index."""

    pixel: PixelId
    tick: int
    run: int

    def __post_init__(self):
        if not 0 <= self.tick < 2**64:
            raise ParameterError("tick must fit an unsigned 64-bit integer")
        if not 0 <= self.run < 2**32:
            raise ParameterError("run must fit an unsigned 32-bit integer")


@dataclass(eq=False)
class EventArrays:
    """Column layout for detected events, sorted by (run, tick, pixel)."""

    run: np.ndarray  # uint32
    tick: np.ndarray  # uint64
    pixel: np.ndarray  # uint8, row*4 + col

    def __post_init__(self):
        self.run = np.asarray(self.run, dtype=np.uint32)
        self.tick = np.asarray(self.tick, dtype=np.uint64)
        self.pixel = np.asarray(self.pixel, dtype=np.uint8)
        if not (len(self.run) == len(self.tick) == len(self.pixel)):
            raise ParameterError("event columns must have equal length")

    def __len__(self) -> int:
        return len(self.run)

    def is_sorted(self) -> bool:
        """True when (run, tick) is non-decreasing."""
        if len(self) < 2:
            return True
        run_step = np.diff(self.run.astype(np.int64))
        tick_ok = self.tick[1:] >= self.tick[:-1]
        return bool(np.all((run_step > 0) | ((run_step == 0) & tick_ok)))

    def equals(self, other: "EventArrays") -> bool:
        return (
            len(self) == len(other)
            and bool(np.array_equal(self.run, other.run))
            and bool(np.array_equal(self.tick, other.tick))
            and bool(np.array_equal(self.pixel, other.pixel))
        )

    @classmethod
    def empty(cls) -> "EventArrays":
        return cls(np.empty(0, np.uint32), np.empty(0, np.uint64), np.empty(0, np.uint8))

    @classmethod
    def concatenate(cls, parts: list["EventArrays"]) -> "EventArrays":
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.run for p in parts]),
            np.concatenate([p.tick for p in parts]),
            np.concatenate([p.pixel for p in parts]),
        )

    def to_photon_events(self) -> list[PhotonEvent]:
        return [
            PhotonEvent(PixelId.from_code(int(p)), int(t), int(r))
            for r, t, p in zip(self.run, self.tick, self.pixel)
        ]

    @classmethod
    def from_photon_events(cls, events: list[PhotonEvent]) -> "EventArrays":
        return cls(
            np.array([e.run for e in events], dtype=np.uint32),
            np.array([e.tick for e in events], dtype=np.uint64),
            np.array([e.pixel.code for e in events], dtype=np.uint8),
        )


@dataclass(frozen=True)
class Estimate:
    """A measured value with its one-sigma statistical uncertainty."""

    value: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ParameterError("sigma must be non-negative")
