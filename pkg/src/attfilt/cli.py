"""Command line entry point ``attfilt``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import ConfigError, ExperimentConfig, parse_config
from .experiment import SweepSpec, emit_csv, emit_sweep_csv, read_run_csv, run_experiment, sweep_neurons, with_noise_model
from .filter import NumericalFailure
from .plot import KINDS, emit_plot
from .sim import NOISE_MODELS, OmegaProfile, export_sensor_csv, generate_run
from .wahba import DegenerateGeometryError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _counts(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad neuron list {text!r}") from None


def build_parser():
    p = _Parser(prog="attfilt", description="Neural-adaptive attitude filter experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one experiment and write its time series")
    s.add_argument("--config", help="key = value configuration file (defaults if omitted)")
    s.add_argument("--seed", type=_seed, help="noise seed (overrides noise.seed)")
    s.add_argument("--out", required=True, help="run CSV path")
    s.add_argument("--quaternion", action="store_true", help="propagate the estimate as a unit quaternion")
    s.add_argument("--noise-model", choices=NOISE_MODELS, help="gyro noise realization (default from config)")
    s.add_argument("--sensor-csv", help="also write the raw sensor stream here")

    w = sub.add_parser("sweep", help="steady-state error versus neuron count")
    w.add_argument("--neurons", type=_counts, default=(3, 10, 50))
    w.add_argument("--trials", type=int, default=20)
    w.add_argument("--seed", type=_seed, default=0, help="base seed; trial k uses seed + k")
    w.add_argument("--out", required=True, help="sweep CSV path")
    w.add_argument("--config", help="base configuration (defaults if omitted)")
    w.add_argument("--noise-model", choices=NOISE_MODELS)
    w.add_argument("--jobs", type=int, default=1, help="worker processes")

    g = sub.add_parser("plot", help="render a run CSV as SVG")
    g.add_argument("--in", dest="inp", required=True, help="run CSV from 'simulate'")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--out", required=True, help="SVG path")
    g.add_argument("--linear", action="store_true", help="linear y axis for the error plot")
    g.add_argument("--true-omega", choices=("paper_default",), help="overlay this true rate on the gyro plot")
    return p


def _load(args):
    config = parse_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "noise_model", None):
        config = with_noise_model(config, args.noise_model)
    return config


def _simulate(args):
    config = _load(args)
    if args.quaternion:
        config = replace(config, quaternion=True)
    record, report = run_experiment(config, args.seed)
    emit_csv(record, args.out)
    if args.sensor_csv:
        sim = config.sim if args.seed is None else config.sim.with_seed(args.seed)
        export_sensor_csv(generate_run(sim), args.sensor_csv)
    print(
        f"seed={report.seeds[0]} q={report.q} window={report.window[0]:g}-{report.window[1]:g}s "
        f"mean_err={report.mean_err:.4e} std_err={report.std_err:.4e} ({report.std_kind})"
    )


def _sweep(args):
    config = _load(args)
    try:
        spec = SweepSpec(args.neurons, args.trials, args.seed, config)
    except ValueError as exc:
        raise ConfigError("sweep", str(exc)) from None
    result = sweep_neurons(spec, jobs=max(1, args.jobs))
    emit_sweep_csv(result, args.out)
    for q, rep in result.summary.items():
        print(f"q={q:<4d} trials={len(rep.seeds)} mean_err={rep.mean_err:.4e} mean_std={rep.std_err:.4e}")


def _plot(args):
    record = read_run_csv(args.inp)
    true_omega = OmegaProfile(args.true_omega) if args.true_omega else None
    emit_plot(record, args.kind, args.out, log_scale=False if args.linear else None, true_omega=true_omega)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"simulate": _simulate, "sweep": _sweep, "plot": _plot}[args.cmd]
    try:
        handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, DegenerateGeometryError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
