"""Command line front end.

Subcommands:
  experiment  size sweep with multi-run averaging and optimization
  sweep       entropy-vs-parameter curves for one method
  eval        one-off scoring of a test file under one trained model

Exit codes: 0 success, 1 usage error, 2 data error, 3 all methods failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from smoothlm.corpus import DataError
from smoothlm.harness import (
    ExperimentConfig,
    ExperimentResult,
    UsageError,
    evaluate_once,
    run_experiment,
    sweep_parameter,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_ALL_FAILED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _csv_list(text: str) -> list[str]:
    return [item for item in text.split(",") if item]


def _parse_params(text: str) -> dict[str, float]:
    params = {}
    for pair in _csv_list(text):
        if "=" not in pair:
            raise UsageError(f"--params entries must be name=value, got {pair!r}")
        name, value = pair.split("=", 1)
        params[name] = float(value)
    return params


def _add_experiment_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file with ExperimentConfig fields")
    sub.add_argument("--corpus", help="training text, one sentence per line")
    sub.add_argument("--order", type=int, choices=(2, 3))
    sub.add_argument("--methods", help="comma-separated method tags")
    sub.add_argument("--sizes", help="comma-separated training sentence counts")
    sub.add_argument("--runs", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--dev-words", type=int, dest="dev_words")
    sub.add_argument("--test-words", type=int, dest="test_words")
    sub.add_argument("--vocab", help="'all' or 'min-count:K'")
    sub.add_argument("--fixed-vocab", dest="fixed_vocab",
                     help="vocabulary file, one token per line")
    sub.add_argument("--out", help="CSV output path")
    sub.add_argument("--params", help="fixed parameters name=value,...")
    sub.add_argument("--no-optimize", action="store_true")
    sub.add_argument("--lowercase", action="store_true")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as handle:
                values.update(json.load(handle))
        except FileNotFoundError as exc:
            raise DataError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"bad JSON in {args.config}: {exc}") from exc
    overrides = {
        "corpus": args.corpus,
        "order": args.order,
        "methods": _csv_list(args.methods) if args.methods else None,
        "sizes": [int(s) for s in _csv_list(args.sizes)] if args.sizes else None,
        "runs": args.runs,
        "seed": args.seed,
        "dev_words": args.dev_words,
        "test_words": args.test_words,
        "vocab": args.vocab,
        "fixed_vocab": args.fixed_vocab,
        "out": args.out,
        "params": _parse_params(args.params) if args.params else None,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if args.no_optimize:
        values["optimize"] = False
    if args.lowercase:
        values["lowercase"] = True
    if "corpus" not in values:
        raise UsageError("a corpus is required (--corpus or config file)")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config fields: {', '.join(sorted(unknown))}")
    return ExperimentConfig(**values)


def _print_aggregates(result: ExperimentResult) -> None:
    aggs = result.aggregates()
    for (method, size), (mean, sd) in sorted(aggs.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        sd_txt = f" sd={sd:.6f}" if sd is not None else ""
        print(f"{method} size={size} mean_bits={mean:.6f}{sd_txt}")


def _finish(result: ExperimentResult) -> int:
    _print_aggregates(result)
    if result.rows and all(row.error for row in result.rows):
        print("all methods failed", file=sys.stderr)
        return EXIT_ALL_FAILED
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(prog="smoothlm",
                     description="n-gram smoothing comparison toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    exp = subs.add_parser("experiment", help="run the full size sweep")
    _add_experiment_flags(exp)

    swp = subs.add_parser("sweep", help="entropy vs one parameter")
    _add_experiment_flags(swp)
    swp.add_argument("--method", required=True)
    swp.add_argument("--param", required=True)
    swp.add_argument("--grid", required=True,
                     help="comma-separated parameter values")

    evl = subs.add_parser("eval", help="score a test file once")
    evl.add_argument("--model-config", required=True, dest="model_config",
                     help="JSON: corpus, method, order, vocab, params, [dev]")
    evl.add_argument("--test", required=True)

    try:
        args = parser.parse_args(argv)
        if args.command == "experiment":
            return _finish(run_experiment(_config_from_args(args)))
        if args.command == "sweep":
            config = _config_from_args(args)
            grid = [float(v) for v in _csv_list(args.grid)]
            return _finish(sweep_parameter(config, args.method, args.param, grid))
        if args.command == "eval":
            try:
                with open(args.model_config, encoding="utf-8") as handle:
                    model_config = json.load(handle)
            except FileNotFoundError as exc:
                raise DataError(
                    f"model config not found: {args.model_config}") from exc
            except json.JSONDecodeError as exc:
                raise DataError(
                    f"bad JSON in {args.model_config}: {exc}") from exc
            report = evaluate_once(model_config, args.test)
            print(report.to_line())
            return EXIT_OK
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
