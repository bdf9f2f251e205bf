"""Event-file codec: bit-exact round trips and designated parse errors."""

import numpy as np
import pytest

from bellbench.errors import (
    BadMagicError,
    BadVersionError,
    ConfigError,
    CorruptRecordError,
    RecordOrderError,
    TruncatedFileError,
)
from bellbench.eventfile import (
    MAGIC,
    RECORD_SIZE,
    decode_events,
    encode_events,
    read_events,
    write_events,
)
from bellbench.model import EventArrays, default_config


def _random_events(n, n_runs, seed):
    rng = np.random.default_rng(seed)
    run = np.sort(rng.integers(0, n_runs, n)).astype(np.uint32)
    tick = np.zeros(n, dtype=np.uint64)
    for r in range(n_runs):
        mask = run == r
        tick[mask] = np.sort(rng.integers(0, 4_000_000_000, int(mask.sum()), dtype=np.uint64))
    pixel = rng.integers(0, 16, n).astype(np.uint8)
    return EventArrays(run=run, tick=tick, pixel=pixel)


@pytest.fixture()
def config():
    return default_config(rng_seed=123456789)


def test_empty_file_round_trip(config):
    data = encode_events(config, EventArrays.empty())
    cfg, events = decode_events(data)
    assert cfg == config
    assert len(events) == 0


def test_round_trip_is_bit_exact(config):
    events = _random_events(50_000, config.daq.n_runs, seed=1)
    data = encode_events(config, events)
    cfg, back = decode_events(data)
    assert cfg == config
    assert back.equals(events)
    assert encode_events(cfg, back) == data


def test_file_round_trip(tmp_path, config):
    events = _random_events(10_000, config.daq.n_runs, seed=2)
    path = tmp_path / "run.ttag"
    write_events(path, config, events)
    cfg, back = read_events(path)
    assert cfg == config
    assert back.equals(events)


def test_header_layout(config):
    data = encode_events(config, EventArrays.empty())
    assert data[:4] == MAGIC
    assert data[4:6] == (1).to_bytes(2, "little")
    assert data[6:10] == config.daq.n_runs.to_bytes(4, "little")


def test_unsorted_events_rejected_before_writing(config):
    events = EventArrays(
        run=np.array([0, 0], dtype=np.uint32),
        tick=np.array([10, 5], dtype=np.uint64),
        pixel=np.array([0, 1], dtype=np.uint8),
    )
    with pytest.raises(ValueError, match="sorted"):
        encode_events(config, events)


def test_bad_magic(config):
    data = encode_events(config, EventArrays.empty())
    with pytest.raises(BadMagicError):
        decode_events(b"NOPE" + data[4:])
    with pytest.raises(BadMagicError):
        decode_events(b"")


def test_bad_version(config):
    data = bytearray(encode_events(config, EventArrays.empty()))
    data[4:6] = (9).to_bytes(2, "little")
    with pytest.raises(BadVersionError, match="9"):
        decode_events(bytes(data))


def test_truncation_mid_record_names_offset(config):
    events = _random_events(100, config.daq.n_runs, seed=3)
    data = encode_events(config, events)
    cut = data[: len(data) - 5]
    with pytest.raises(TruncatedFileError) as err:
        decode_events(cut)
    expected_offset = len(data) - RECORD_SIZE  # last complete record boundary
    assert err.value.offset == expected_offset
    assert str(expected_offset) in str(err.value)


def test_truncation_inside_header(config):
    data = encode_events(config, EventArrays.empty())
    with pytest.raises(TruncatedFileError):
        decode_events(data[:8])
    with pytest.raises(TruncatedFileError):
        decode_events(data[:40])  # inside the config echo


def test_order_violation_detected(config):
    events = _random_events(100, config.daq.n_runs, seed=4)
    data = bytearray(encode_events(config, events))
    header = len(data) - 100 * RECORD_SIZE
    # swap the tick bytes of records 10 and 11
    a = header + 10 * RECORD_SIZE
    b = header + 11 * RECORD_SIZE
    tick_a = bytes(data[a + 1:a + 9])
    tick_b = bytes(data[b + 1:b + 9])
    if tick_a == tick_b:
        pytest.skip("degenerate draw")
    data[a + 1:a + 9], data[b + 1:b + 9] = tick_b, tick_a
    with pytest.raises(RecordOrderError):
        decode_events(bytes(data))


def test_corrupt_pixel_detected(config):
    events = _random_events(10, config.daq.n_runs, seed=5)
    data = bytearray(encode_events(config, events))
    header = len(data) - 10 * RECORD_SIZE
    data[header + 3 * RECORD_SIZE] = 200
    with pytest.raises(CorruptRecordError, match="200"):
        decode_events(bytes(data))


def test_corrupt_config_echo_detected(config):
    data = encode_events(config, EventArrays.empty())
    broken = data[:20] + b"garbage = yes\n" + data[34:]
    with pytest.raises((ConfigError, CorruptRecordError, TruncatedFileError)):
        decode_events(broken)


def test_run_count_disagreement_detected(config):
    data = bytearray(encode_events(config, EventArrays.empty()))
    data[6:10] = (99).to_bytes(4, "little")
    with pytest.raises(CorruptRecordError, match="99"):
        decode_events(bytes(data))
