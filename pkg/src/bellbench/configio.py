"""Text format for bench configs: one dotted `key = value` per line.

The same serialization is embedded verbatim in event-file headers, so the
writer is canonical (fixed key order, shortest round-trip float repr) and
`parse_config(dump_config(cfg))` reproduces the config exactly.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError, ParameterError
from .model import (
    DaqSpec,
    DetectorSpec,
    ExperimentConfig,
    PixelId,
    PolarizerSpec,
    SourceSpec,
)

_SOURCE_KEYS = ("rate", "mode", "coherence_time")
_POLARIZER_KEYS = ("axis", "t_max", "extinction_ratio")
_DETECTOR_KEYS = ("quantum_efficiency", "dark_rate_per_pixel", "clock_period", "coincidence_window")
_DAQ_KEYS = ("cycle_length", "transfer_dead_time", "run_duration", "n_runs")


def _known_keys() -> set[str]:
    keys = {"rng_seed", "d1_pixels", "d2_pixels"}
    for src in ("source_a", "source_b"):
        keys.update(f"{src}.{k}" for k in _SOURCE_KEYS)
    for pol in ("prep_a", "prep_b", "analyzer_c", "analyzer_d"):
        keys.update(f"{pol}.{k}" for k in _POLARIZER_KEYS)
    keys.update(f"detector.{k}" for k in _DETECTOR_KEYS)
    keys.update(f"daq.{k}" for k in _DAQ_KEYS)
    return keys


_KNOWN_KEYS = _known_keys()


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: ExperimentConfig) -> str:
    """Serialize a config to the canonical text form."""
    lines: list[str] = [f"rng_seed = {int(config.rng_seed)}"]
    for name, src in (("source_a", config.source_a), ("source_b", config.source_b)):
        lines.append(f"{name}.rate = {_fmt(src.rate)}")
        lines.append(f"{name}.mode = {src.mode}")
        if src.coherence_time is not None:
            lines.append(f"{name}.coherence_time = {_fmt(src.coherence_time)}")
    for name, pol in (
        ("prep_a", config.prep_a),
        ("prep_b", config.prep_b),
        ("analyzer_c", config.analyzer_c),
        ("analyzer_d", config.analyzer_d),
    ):
        lines.append(f"{name}.axis = {_fmt(pol.axis_deg)}")
        lines.append(f"{name}.t_max = {_fmt(pol.t_max)}")
        lines.append(f"{name}.extinction_ratio = {_fmt(pol.extinction_ratio)}")
    det = config.detector
    lines.append(f"detector.quantum_efficiency = {_fmt(det.quantum_efficiency)}")
    lines.append(f"detector.dark_rate_per_pixel = {_fmt(det.dark_rate_per_pixel)}")
    lines.append(f"detector.clock_period = {_fmt(det.clock_period)}")
    lines.append(f"detector.coincidence_window = {_fmt(det.coincidence_window)}")
    daq = config.daq
    lines.append(f"daq.cycle_length = {_fmt(daq.cycle_length)}")
    lines.append(f"daq.transfer_dead_time = {_fmt(daq.transfer_dead_time)}")
    lines.append(f"daq.run_duration = {_fmt(daq.run_duration)}")
    lines.append(f"daq.n_runs = {daq.n_runs}")
    lines.append("d1_pixels = " + " ".join(str(p) for p in sorted(config.d1_pixels)))
    lines.append("d2_pixels = " + " ".join(str(p) for p in sorted(config.d2_pixels)))
    return "\n".join(lines) + "\n"


def _scan(text: str) -> dict[str, tuple[str, int]]:
    """Key -> (raw value, line number), rejecting unknown and duplicate keys."""
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r} (first on line {out[key][1]})", line=lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=lineno)
        out[key] = (value, lineno)
    return out


def _to_float(key: str, value: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"bad number for {key!r}: {value!r}", line=lineno) from None


def _to_int(key: str, value: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"bad integer for {key!r}: {value!r}", line=lineno) from None


def _to_pixels(key: str, value: str, lineno: int) -> frozenset[PixelId]:
    try:
        return frozenset(PixelId.parse(tok) for tok in value.split())
    except ParameterError as exc:
        raise ConfigError(f"bad pixel list for {key!r}: {exc}", line=lineno) from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse the text form, raising ConfigError with a line number on bad input."""
    raw = _scan(text)

    def need(key: str) -> tuple[str, int]:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
        return raw[key]

    def fnum(key: str) -> float:
        value, lineno = need(key)
        return _to_float(key, value, lineno)

    def inum(key: str) -> int:
        value, lineno = need(key)
        return _to_int(key, value, lineno)

    def source(name: str) -> SourceSpec:
        mode, mode_line = need(f"{name}.mode")
        if mode not in ("coherent", "chaotic"):
            raise ConfigError(f"bad mode for {name!r}: {mode!r}", line=mode_line)
        coherence = None
        if f"{name}.coherence_time" in raw:
            value, lineno = raw[f"{name}.coherence_time"]
            coherence = _to_float(f"{name}.coherence_time", value, lineno)
        return SourceSpec(rate=fnum(f"{name}.rate"), mode=mode, coherence_time=coherence)

    def polarizer(name: str) -> PolarizerSpec:
        return PolarizerSpec(
            axis_deg=fnum(f"{name}.axis"),
            t_max=fnum(f"{name}.t_max"),
            extinction_ratio=fnum(f"{name}.extinction_ratio"),
        )

    def pixels(key: str) -> frozenset[PixelId]:
        value, lineno = need(key)
        return _to_pixels(key, value, lineno)

    try:
        return ExperimentConfig(
            source_a=source("source_a"),
            source_b=source("source_b"),
            prep_a=polarizer("prep_a"),
            prep_b=polarizer("prep_b"),
            analyzer_c=polarizer("analyzer_c"),
            analyzer_d=polarizer("analyzer_d"),
            detector=DetectorSpec(
                quantum_efficiency=fnum("detector.quantum_efficiency"),
                dark_rate_per_pixel=fnum("detector.dark_rate_per_pixel"),
                clock_period=fnum("detector.clock_period"),
                coincidence_window=fnum("detector.coincidence_window"),
            ),
            daq=DaqSpec(
                cycle_length=fnum("daq.cycle_length"),
                transfer_dead_time=fnum("daq.transfer_dead_time"),
                run_duration=fnum("daq.run_duration"),
                n_runs=inum("daq.n_runs"),
            ),
            d1_pixels=pixels("d1_pixels"),
            d2_pixels=pixels("d2_pixels"),
            rng_seed=inum("rng_seed"),
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(config), encoding="utf-8")
