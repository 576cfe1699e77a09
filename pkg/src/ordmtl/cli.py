"""Command line entry point: ``ordmtl {gen,run,gradcheck,plot}``.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime or
numeric error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .harness.chart import render_bar_chart
from .harness.config import (
    ConfigFileError,
    ExperimentConfig,
    experiment_from_dict,
    generator_from_dict,
    load_json,
)
from .harness.experiment import run_experiment
from .harness.report import format_summary, read_report, write_report_csv, write_report_json
from .nn.gradcheck import run_suite
from .nn.network import NetworkConfigError, NumericError
from .nn.training import TrainingError
from .synthgen import ConfigError, DatasetFormatError, GeneratorConfig, generate, save_dataset

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("ordmtl")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ordmtl", description="Threshold-decomposed multi-task learning for ordinal labels.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic dataset file")
    g.add_argument("--config", help="JSON generator config (or an experiment config with a 'generator' key)")
    g.add_argument("--out", required=True, help="dataset file to write")
    g.add_argument("--seed", type=int, help="override the generator seed")

    r = sub.add_parser("run", help="run the cross-validated comparison")
    r.add_argument("--config", help="JSON experiment config; defaults are used when omitted")
    r.add_argument("--out", help="output directory (overrides output_dir)")
    r.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    r.add_argument("--dataset", help="use this dataset file instead of generating one")

    gc = sub.add_parser("gradcheck", help="verify backprop against finite differences")
    gc.add_argument("--tolerance", type=float, default=1e-4)
    gc.add_argument("--seed", type=int, default=0)

    pl = sub.add_parser("plot", help="render a report file as an SVG bar chart")
    pl.add_argument("report", help="report.csv or report.json")
    pl.add_argument("--out", help="SVG path (default: next to the report)")
    return p


def _cmd_gen(args) -> int:
    data = load_json(args.config) if args.config else {}
    if isinstance(data, dict) and "generator" in data:
        data = data["generator"]
    cfg = generator_from_dict(data) if data else GeneratorConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    ds = generate(cfg)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} samples to {args.out}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = experiment_from_dict(load_json(args.config)) if args.config else ExperimentConfig()
    overrides = {}
    if args.out:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        overrides["seeds"] = (args.seed,)
    if args.dataset:
        if not Path(args.dataset).exists():
            raise ConfigFileError(f"dataset file not found: {args.dataset}")
        overrides["dataset_path"] = args.dataset
    cfg = dataclasses.replace(cfg, **overrides)

    report = run_experiment(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out / "report.csv")
    write_report_json(report, out / "report.json")
    render_bar_chart(report, out / "chart.svg")
    print(format_summary(report))
    print(f"reports written to {out}")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    ok = True
    for name, report in run_suite(args.seed, args.tolerance).items():
        print(f"[{name}]")
        for line in report.lines():
            print(f"  {line}")
        ok &= report.passed
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_plot(args) -> int:
    path = Path(args.report)
    if not path.exists():
        raise ConfigFileError(f"report file not found: {path}")
    report = read_report(path)
    out = Path(args.out) if args.out else path.with_suffix(".svg")
    render_bar_chart(report, out)
    print(f"wrote {out}")
    return EXIT_OK


COMMANDS = {"gen": _cmd_gen, "run": _cmd_run, "gradcheck": _cmd_gradcheck, "plot": _cmd_plot}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigFileError, ConfigError, NetworkConfigError, DatasetFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrainingError, NumericError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
