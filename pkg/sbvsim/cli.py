#!/usr/bin/env python3
"""
sbvsim command line
Dispatches rate, sweep, coverage, allocate and plot runs and writes their CSV/SVG outputs
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv

from .config import (
    SEED_ENV_VAR,
    VERSION,
    OutputFormat,
    ScenarioConfig,
    SweepKind,
    parse_config,
    resolve_seed,
)
from .coverage import (
    ScenarioOverrides,
    coverage_ccdf,
    coverage_frame,
    get_cluster_preset,
    log_targets,
    run_cluster_scenario,
)
from .exceptions import SbvSimError
from .fileio import frame_to_csv, write_outputs
from .linkrate import SweepPoint, operator_rate, sweep_distance, sweep_fmax, sweep_frame
from .logging_config import configure_logging, get_logger
from .plotting import PLOT_KINDS, plot_csv, render_ccdf_plot, render_rate_plot
from .spectrum import allocate_subbands, allocation_frame

logger = get_logger("sbvsim")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 3

ALLOCATION_FLOAT_FORMAT = "%.12g"

EPILOG = f"""
Subcommands:
  rate        per-operator rate at [scenario] distance_m          -> rate.csv
  sweep       rate vs f_max or distance ([scenario] sweep)        -> sweep_fmax.csv / sweep_distance.csv (+ .svg)
  coverage    coverage C-CDF (one curve, or a cluster run)         -> coverage.csv (+ .svg)
  allocate    SBV sub-band allocation                              -> allocation.csv
  plot        render a sweep or coverage CSV                       -> <input>.svg

Flags (all subcommands):
  --config FILE     run description (required except for plot)
  --cluster A|B     cluster preset for coverage runs
  --out DIR         output directory (default: [output] directory)
  --seed N          coverage seed (overrides {SEED_ENV_VAR} and [coverage] seed)
  --samples N       coverage sample count
  --debug           debug logging
  --log-file PATH   also log to a rotating file
Flags (plot):
  --input CSV       CSV to render
  --kind KIND       rate-vs-x or ccdf

Exit codes: 0 success, 1 usage error, 2 config/validation error, 3 runtime/domain error.

Examples:
  python run.py allocate --config config/scenario_example.ini
  python run.py coverage --config config/scenario_example.ini --cluster A --seed 7
  python run.py plot --input out/sweep_fmax.csv --kind rate-vs-x
"""


class SimArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text, 0)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def build_parser() -> SimArgumentParser:
    """Parse command line arguments"""
    common = SimArgumentParser(add_help=False)
    common.add_argument('--config', '-c', metavar='FILE', help='Run description file')
    common.add_argument('--cluster', type=str.upper, choices=['A', 'B'], help='Cluster preset (coverage)')
    common.add_argument('--out', metavar='DIR', help='Output directory (default: [output] directory)')
    common.add_argument('--seed', type=_seed, metavar='N', help=f'Coverage seed (beats {SEED_ENV_VAR})')
    common.add_argument('--samples', type=_positive_int, metavar='N', help='Coverage sample count')
    common.add_argument('--debug', action='store_true', help='Enable debug logging')
    common.add_argument('--log-file', metavar='PATH', help='Also log to a rotating file')

    parser = SimArgumentParser(
        prog="sbvsim",
        description="Multi-operator DSL simulator: Sub-band Vectoring vs non-vectored sharing",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument('--version', action='version', version=f"sbvsim {VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="{rate,sweep,coverage,allocate,plot}")
    subparsers.required = True

    for name, help_text in (
        ("rate", "Per-operator rate at one distance"),
        ("sweep", "Rate vs f_max or distance"),
        ("coverage", "Coverage C-CDF"),
        ("allocate", "SBV sub-band allocation"),
    ):
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)

    plot = subparsers.add_parser("plot", parents=[common], help="Render a CSV as SVG",
                                 description="Render a sweep or coverage CSV as SVG")
    plot.add_argument('--input', '-i', required=True, metavar='CSV', help='CSV file to render')
    plot.add_argument('--kind', required=True, choices=PLOT_KINDS, help='Chart type')
    return parser


def _wants(config: ScenarioConfig, fmt: OutputFormat) -> bool:
    return fmt in config.output.formats


def _points_for_operators(config: ScenarioConfig) -> List[SweepPoint]:
    sc = config.link_scenario()
    d = config.scenario.distance_m
    points = []
    for op in range(sc.n_op):
        result = operator_rate(sc, op, d)
        logger.info(f"{sc.mode.value} operator {op} at {d:g} m: {result.rate_mbps:.2f} Mbit/s "
                    f"(legacy {result.legacy_mbps:.2f}, extension {result.extension_mbps:.2f})")
        points.append(SweepPoint(x=d, operator=op, mode=sc.mode, result=result))
    return points


def cmd_rate(config: ScenarioConfig, args: argparse.Namespace) -> Dict[str, str]:
    frame = sweep_frame(_points_for_operators(config))
    return {"rate.csv": frame_to_csv(frame)} if _wants(config, OutputFormat.CSV) else {}


def cmd_sweep(config: ScenarioConfig, args: argparse.Namespace) -> Dict[str, str]:
    s = config.scenario
    template = config.link_scenario()
    if s.sweep is SweepKind.FMAX:
        points = sweep_fmax(template, s.distance_m, s.f_max_list_hz, s.sweep_modes, workers=s.workers)
        stem = "sweep_fmax"
    else:
        points = []
        for mode in s.sweep_modes:
            sc = template.with_mode(mode)
            for op in range(sc.n_op):
                points.extend(sweep_distance(sc, op, s.distances_m, workers=s.workers))
        stem = "sweep_distance"

    frame = sweep_frame(points)
    files = {}
    if _wants(config, OutputFormat.CSV):
        files[f"{stem}.csv"] = frame_to_csv(frame)
    if _wants(config, OutputFormat.SVG):
        files[f"{stem}.svg"] = render_rate_plot(frame.copy())
    return files


def cmd_coverage(config: ScenarioConfig, args: argparse.Namespace) -> Dict[str, str]:
    seed = resolve_seed(config, args.seed)
    n_samples = args.samples or config.coverage.n_samples
    c, s = config.coverage, config.scenario
    operators = config.report_operators()

    if args.cluster:
        preset = get_cluster_preset(args.cluster)
        preset.check_operator_count(s.n_op)
        cab_to_dp, dp_to_home = config.distributions() if c.sets_distributions else (None, None)
        overrides = ScenarioOverrides(
            n_op=s.n_op,
            operator=s.operator,
            operators=operators,
            n_us_values=c.n_us_list,
            f_max_values=c.f_max_list_hz,
            modes=s.sweep_modes,
            thresholds=c.thresholds_mbps,
            n_samples=n_samples,
            seed=seed,
            params=config.cable_params,
            cab_to_dp=cab_to_dp,
            dp_to_home=dp_to_home,
            width=s.width_hz,
            order=s.order,
            delta_f=s.delta_f_hz,
            radio=config.radio_overrides(),
        )
        curves = run_cluster_scenario(preset, overrides)
    else:
        cab_to_dp, dp_to_home = config.distributions()
        sc = config.link_scenario()
        curves = []
        for op in operators:
            label = f"{sc.mode.value} operator {op}" if len(operators) > 1 else ""
            curve = coverage_ccdf(sc, op, cab_to_dp, dp_to_home, c.thresholds_mbps, n_samples, seed, label=label)
            log_targets(curve)
            curves.append(curve)

    frame = coverage_frame(curves)
    files = {}
    if _wants(config, OutputFormat.CSV):
        files["coverage.csv"] = frame_to_csv(frame)
    if _wants(config, OutputFormat.SVG):
        files["coverage.svg"] = render_ccdf_plot(frame.copy())
    return files


def cmd_allocate(config: ScenarioConfig, args: argparse.Namespace) -> Dict[str, str]:
    s = config.scenario
    alloc = allocate_subbands(s.n_op, s.f_max_hz, s.width_hz, s.order)
    for op, bandwidth in enumerate(alloc.bandwidth_by_operator()):
        logger.info(f"Operator {op}: {bandwidth / 1e6:.3f} MHz of extension spectrum")
    frame = allocation_frame(alloc)
    return {"allocation.csv": frame_to_csv(frame, ALLOCATION_FLOAT_FORMAT)}


def cmd_plot(config: Optional[ScenarioConfig], args: argparse.Namespace) -> Dict[str, str]:
    return {f"{Path(args.input).stem}.svg": plot_csv(args.input, args.kind)}


COMMANDS = {
    "rate": cmd_rate,
    "sweep": cmd_sweep,
    "coverage": cmd_coverage,
    "allocate": cmd_allocate,
    "plot": cmd_plot,
}


def _output_dir(config: Optional[ScenarioConfig], args: argparse.Namespace) -> Path:
    if args.out:
        return Path(args.out)
    if config is not None:
        return Path(config.output.directory)
    return Path(args.input).parent


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit status"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logging_config = {"level": "DEBUG" if args.debug else "INFO"}
    if args.log_file:
        logging_config.update({"file_output": True, "log_file": args.log_file})
    configure_logging(logging_config, force=True)
    load_dotenv(".env", override=False)

    if args.command != "plot" and not args.config:
        parser.print_usage(sys.stderr)
        print(f"sbvsim {args.command}: error: --config is required", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = parse_config(args.config) if args.config else None
        files = COMMANDS[args.command](config, args)
        out_dir = _output_dir(config, args)
        write_outputs(out_dir, files)
    except SbvSimError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"sbvsim {args.command}: error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"sbvsim {args.command}: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    logger.info(f"{args.command} finished: {len(files)} file(s) in {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
