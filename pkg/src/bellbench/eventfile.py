"""Binary event-file codec.

Layout (all integers little-endian):

    offset  size  field
    0       4     magic bytes b"TTAG"
    4       2     format version (currently 1), uint16
    6       4     run count, uint32
    10      4     config blob length L, uint32
    14      L     config echo, UTF-8 text in the config file format
    14+L    13*N  records

Each record is a fixed 13-byte stride: pixel code (uint8, row*4 + col),
tick (uint64), run (uint32). Records must be sorted by (run, tick). The
fixed stride makes truncation detectable by arithmetic and allows seeking.
read(write(x)) is bit-exact; the writer is canonical, so rewriting what was
read reproduces the byte sequence.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import configio
from .errors import (
    BadMagicError,
    BadVersionError,
    CorruptRecordError,
    RecordOrderError,
    TruncatedFileError,
)
from .model import EventArrays, ExperimentConfig, N_PIXELS

MAGIC = b"TTAG"
VERSION = 1
RECORD_SIZE = 13
_HEAD = struct.Struct("<4sHII")

_RECORD_DTYPE = np.dtype([("pixel", "u1"), ("tick", "<u8"), ("run", "<u4")])


def encode_events(config: ExperimentConfig, events: EventArrays) -> bytes:
    """Serialize config echo plus records to the canonical byte sequence."""
    if not events.is_sorted():
        raise ValueError("events must be sorted by (run, tick) before writing")
    blob = configio.dump_config(config).encode("utf-8")
    head = _HEAD.pack(MAGIC, VERSION, config.daq.n_runs, len(blob))
    records = np.empty(len(events), dtype=_RECORD_DTYPE)
    records["pixel"] = events.pixel
    records["tick"] = events.tick
    records["run"] = events.run
    return head + blob + records.tobytes()


def decode_events(data: bytes) -> tuple[ExperimentConfig, EventArrays]:
    """Parse bytes produced by encode_events, validating structure and order."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"not an event file: expected magic {MAGIC!r}")
    if len(data) < _HEAD.size:
        raise TruncatedFileError("file ends inside the fixed header", offset=len(data))
    _, version, run_count, blob_len = _HEAD.unpack_from(data, 0)
    if version != VERSION:
        raise BadVersionError(f"unsupported format version {version}; this reader handles {VERSION}")
    body_start = _HEAD.size + blob_len
    if len(data) < body_start:
        raise TruncatedFileError("file ends inside the config echo", offset=len(data))
    try:
        config = configio.parse_config(data[_HEAD.size:body_start].decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise CorruptRecordError(f"config echo is not valid UTF-8: {exc}") from None
    if config.daq.n_runs != run_count:
        raise CorruptRecordError(
            f"header run count {run_count} disagrees with config n_runs {config.daq.n_runs}"
        )

    body = len(data) - body_start
    if body % RECORD_SIZE != 0:
        whole = body_start + (body // RECORD_SIZE) * RECORD_SIZE
        raise TruncatedFileError("file ends mid-record", offset=whole)
    records = np.frombuffer(data, dtype=_RECORD_DTYPE, offset=body_start)

    if records.size and int(records["pixel"].max()) >= N_PIXELS:
        bad = int(np.argmax(records["pixel"] >= N_PIXELS))
        raise CorruptRecordError(
            f"record {bad}: pixel code {int(records['pixel'][bad])} outside the 4x4 grid"
        )
    if records.size > 1:
        run_step = np.diff(records["run"].astype(np.int64))
        tick_ok = records["tick"][1:] >= records["tick"][:-1]
        violations = ~((run_step > 0) | ((run_step == 0) & tick_ok))
        if violations.any():
            bad = int(np.argmax(violations)) + 1
            raise RecordOrderError(f"record {bad} is not sorted by (run, tick)")

    events = EventArrays(
        run=records["run"].copy(),
        tick=records["tick"].copy(),
        pixel=records["pixel"].copy(),
    )
    return config, events


def write_events(path: str | Path, config: ExperimentConfig, events: EventArrays) -> None:
    Path(path).write_bytes(encode_events(config, events))


def read_events(path: str | Path) -> tuple[ExperimentConfig, EventArrays]:
    return decode_events(Path(path).read_bytes())
