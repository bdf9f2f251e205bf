"""Two-source polarization coincidence bench: simulator plus analysis pipeline."""

from .errors import (
    BadMagicError,
    BadVersionError,
    ConfigError,
    CorruptRecordError,
    EventFileError,
    ParameterError,
    RecordOrderError,
    TruncatedFileError,
)
from .model import (
    DaqSpec,
    DetectorSpec,
    Estimate,
    EventArrays,
    ExperimentConfig,
    PhotonEvent,
    PixelId,
    PolarizerSpec,
    SourceSpec,
    ch_settings,
    default_config,
    pixel_column,
    relative_angle,
    wrap_angle,
)

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "BadVersionError",
    "ConfigError",
    "CorruptRecordError",
    "DaqSpec",
    "DetectorSpec",
    "Estimate",
    "EventArrays",
    "EventFileError",
    "ExperimentConfig",
    "ParameterError",
    "PhotonEvent",
    "PixelId",
    "PolarizerSpec",
    "RecordOrderError",
    "SourceSpec",
    "TruncatedFileError",
    "ch_settings",
    "default_config",
    "pixel_column",
    "relative_angle",
    "wrap_angle",
    "__version__",
]
