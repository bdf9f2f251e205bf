"""Command-line front-end: simulate, analyze, sweep, bell, figures.

Exit codes: 0 success; 2 usage or precondition failure; 3 config errors;
4 I/O and event-file format errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, configio
from .bellch import s_of_theta_ideal
from .coincidence import build_histogram, bunching_ratio, sideband_ticks, windowed_result
from .errors import ConfigError, EventFileError, ParameterError
from .eventfile import read_events, write_events
from .model import ExperimentConfig, PixelId, cos_squared_deg
from .pipeline import (
    DEFAULT_ANALYZE_MAX_DELAY_S,
    DEFAULT_BIN_WIDTH_S,
    DEFAULT_SWEEP_MAX_DELAY_S,
    bell_from_sweep,
    read_sweep_csv,
    simulate_events,
    summarize_events,
    sweep,
    ticks_of,
    write_bell_csv,
    write_histogram_csv,
    write_sweep_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4


def _parse_pixels(text: str) -> frozenset[PixelId]:
    try:
        pixels = frozenset(PixelId.parse(tok) for tok in text.split())
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    if not pixels:
        raise ConfigError("pixel list is empty")
    return pixels


def _parse_thetas(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse angle list {text!r}") from None


def _load_config(path: str, seed: int | None, theta: float | None) -> ExperimentConfig:
    config = configio.load_config(path)
    if seed is not None:
        import dataclasses

        config = dataclasses.replace(config, rng_seed=seed)
    if theta is not None:
        config = config.with_analyzer_d(theta)
    return config


def _cmd_simulate(args) -> int:
    config = _load_config(args.config, args.seed, args.theta)
    events = simulate_events(config)
    write_events(args.out, config, events)
    summary = summarize_events(config, events)
    print(f"wrote {summary['n_events']} events to {args.out}")
    print(f"live time: {summary['live_time_s']:.3f} s over {config.daq.n_runs} runs")
    print(f"singles D1: {summary['singles_d1']} ({summary['rate_d1']:.2f} /s)")
    print(f"singles D2: {summary['singles_d2']} ({summary['rate_d2']:.2f} /s)")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    d1 = _parse_pixels(args.d1) if args.d1 else None
    d2 = _parse_pixels(args.d2) if args.d2 else None
    if d1 is not None and d2 is not None and d1 & d2:
        raise ConfigError("d1 and d2 pixel lists overlap")

    total = None
    first_config = None
    for path in args.infile:
        config, events = read_events(path)
        if first_config is None:
            first_config = config
        clock = config.detector.clock_period
        bin_width = max(1, ticks_of(args.bin_ns * 1e-9, clock))
        n_bins = max(1, ticks_of(args.max_delay_ns * 1e-9, clock) // bin_width)
        part = build_histogram(
            events,
            d1 if d1 is not None else config.d1_pixels,
            d2 if d2 is not None else config.d2_pixels,
            bin_width,
            bin_width * n_bins,
            live_time=config.daq.total_live_time(),
        )
        total = part if total is None else total.merge(part)
        if len(events) == 0:
            print(f"warning: {path} contains no events", file=sys.stderr)

    clock = first_config.detector.clock_period
    write_histogram_csv(total, clock, args.out)
    print(f"wrote delay histogram ({total.n_bins} bins of {total.bin_width} ticks) to {args.out}")
    print(f"singles D1: {total.total_singles_d1}, singles D2: {total.total_singles_d2}, "
          f"live time {total.live_time:.3f} s")

    window_ticks = max(total.bin_width, ticks_of(args.window_ns * 1e-9, clock))
    window_ticks -= window_ticks % total.bin_width
    window = (0, window_ticks)
    sideband = sideband_ticks(clock)
    try:
        res = windowed_result(total, window, background="sideband", sideband=sideband)
        print(f"coincidences in [0, {args.window_ns:g} ns): raw {res.raw_coincidences}, "
              f"accidental background {res.background:.2f}, corrected {res.corrected:.2f} "
              f"+- {res.uncertainty:.2f}")
        peak = bunching_ratio(total, window, sideband)
        print(f"bunching ratio (peak/[2 us, 10 us) baseline): {peak.value:.3f} +- {peak.sigma:.3f}")
    except ParameterError as exc:
        print(f"windowed statistics unavailable: {exc}", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load_config(args.config, args.seed, None)
    thetas = _parse_thetas(args.thetas)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    window_s = None
    if args.window_ns is not None:
        lo, hi = (float(x) for x in args.window_ns.split(","))
        window_s = (lo * 1e-9, hi * 1e-9)
    result = sweep(
        config,
        thetas,
        bin_width_s=args.bin_ns * 1e-9,
        max_delay_s=args.max_delay_ns * 1e-9,
        window_s=window_s,
        background=args.background,
    )
    write_sweep_csv(result.points, outdir / "sweep.csv")
    clock = config.detector.clock_period
    for theta, hist in result.histograms.items():
        write_histogram_csv(hist, clock, outdir / f"hist_theta_{theta:g}.csv")
    for p in result.points:
        print(f"theta {p.theta_deg:7.2f} deg: p12 = {p.p12.value:.4f} +- {p.p12.sigma:.4f} "
              f"({p.pairs.raw_coincidences} pairs, D2 singles {p.singles_d2})")
    print(f"wrote {outdir / 'sweep.csv'}")
    return EXIT_OK


def _cmd_bell(args) -> int:
    points = read_sweep_csv(Path(args.sweep) / "sweep.csv")
    outcomes = []
    for theta in _parse_thetas(args.theta):
        outcome = bell_from_sweep(points, theta, correlated=args.correlated)
        outcomes.append(outcome)
        v = outcome.verdict
        print(f"S({theta:g} deg) = {v.s_value:.4f} +- {v.uncertainty:.4f}")
        print(f"  p12(theta) = {outcome.p12_theta.value:.4f}, p12(3 theta) = {outcome.p12_3theta.value:.4f}, "
              f"p1(a') = {outcome.p1_a_prime.value:.4f}, p2(b) = {outcome.p2_b.value:.4f}")
        if v.violated:
            print(f"  violates the local bound 1 by {v.sigma_above_bound:.1f} sigma")
        else:
            print("  consistent with the local bound 1")
    if args.out:
        write_bell_csv(outcomes, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_figures(args) -> int:
    import csv as _csv
    import shutil

    sweep_dir = Path(args.sweep)
    points = read_sweep_csv(sweep_dir / "sweep.csv")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    zero_hist = sweep_dir / "hist_theta_0.csv"
    if zero_hist.exists():
        shutil.copyfile(zero_hist, outdir / "fig2_histogram.csv")

    with open(outdir / "fig3_p12.csv", "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["theta_deg", "p12", "p12_sigma", "cos2_ideal"])
        for p in points:
            writer.writerow([repr(p.theta_deg), repr(p.p12.value), repr(p.p12.sigma),
                             repr(cos_squared_deg(p.theta_deg))])

    with open(outdir / "fig4_s_curve.csv", "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["theta_deg", "s_ideal"])
        for theta in np.arange(0.5, 90.0 + 0.25, 0.5):
            writer.writerow([repr(float(theta)), repr(s_of_theta_ideal(float(theta)))])

    angles = [p.theta_deg for p in points]
    outcomes = []
    for theta in sorted(set(angles)):
        if theta == 0.0:
            continue
        try:
            outcomes.append(bell_from_sweep(points, theta, correlated=args.correlated))
        except ParameterError:
            continue  # sweep lacks 2 theta or 3 theta for this angle
    write_bell_csv(outcomes, outdir / "fig4_s_points.csv")
    print(f"wrote figure data to {outdir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellbench",
        description="Simulate a two-source polarization bench and analyze its time tags.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the bench and write a binary event file")
    sim.add_argument("--config", required=True, help="bench config file")
    sim.add_argument("--theta", type=float, default=None, help="rotate analyzer d to this angle (deg)")
    sim.add_argument("--seed", type=int, default=None, help="override the config rng_seed")
    sim.add_argument("--out", required=True, help="output event file")
    sim.set_defaults(func=_cmd_simulate)

    ana = sub.add_parser("analyze", help="delay histogram and coincidence summary from event files")
    ana.add_argument("--in", dest="infile", nargs="+", required=True, help="event file(s)")
    ana.add_argument("--d1", default=None, help="detector-1 pixels, e.g. '0,0 1,0 2,0' (default: config)")
    ana.add_argument("--d2", default=None, help="detector-2 pixels (default: config)")
    ana.add_argument("--bin-ns", type=float, default=DEFAULT_BIN_WIDTH_S * 1e9, help="histogram bin (ns)")
    ana.add_argument("--max-delay-ns", type=float, default=DEFAULT_ANALYZE_MAX_DELAY_S * 1e9,
                     help="histogram range (ns)")
    ana.add_argument("--window-ns", type=float, default=100.0, help="coincidence window (ns)")
    ana.add_argument("--out", required=True, help="histogram CSV (bin_low_ns, count)")
    ana.set_defaults(func=_cmd_analyze)

    swp = sub.add_parser("sweep", help="simulate and analyze a set of analyzer angles")
    swp.add_argument("--config", required=True)
    swp.add_argument("--thetas", required=True, help="comma-separated angles in degrees; must include 0")
    swp.add_argument("--seed", type=int, default=None)
    swp.add_argument("--bin-ns", type=float, default=DEFAULT_BIN_WIDTH_S * 1e9)
    swp.add_argument("--max-delay-ns", type=float, default=DEFAULT_SWEEP_MAX_DELAY_S * 1e9)
    swp.add_argument("--window-ns", default=None, help="pair-sum window 'LO,HI' in ns (default: full range)")
    swp.add_argument("--background", choices=["none", "sideband"], default="none")
    swp.add_argument("--out", required=True, help="output directory")
    swp.set_defaults(func=_cmd_sweep)

    bell = sub.add_parser("bell", help="evaluate S(theta) from a sweep directory")
    bell.add_argument("--sweep", required=True, help="directory written by the sweep command")
    bell.add_argument("--theta", required=True, help="comma-separated angles to evaluate")
    bell.add_argument("--correlated", action="store_true",
                      help="propagate the shared 0-degree normalization coherently")
    bell.add_argument("--out", default=None, help="verdict CSV (theta_deg, S, sigma, violated)")
    bell.set_defaults(func=_cmd_bell)

    fig = sub.add_parser("figures", help="emit plot-ready CSVs with ideal curves alongside")
    fig.add_argument("--sweep", required=True)
    fig.add_argument("--correlated", action="store_true")
    fig.add_argument("--out", required=True)
    fig.set_defaults(func=_cmd_figures)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EventFileError as exc:
        print(f"event file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
