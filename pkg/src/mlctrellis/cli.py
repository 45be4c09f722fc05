"""Command-line entry point: ``generate``, ``run``, ``rank`` and ``dump-structure``.

Exit status is 0 on success, 2 on configuration errors and 1 on runtime failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .base_learner import SgdConfig
from .data import generate_bn_dataset, load_dataset, save_dataset
from .errors import ConfigurationError
from .localization import build_scenario, generate_localization_dataset
from .structure import (
    DEFAULT_PATTERN,
    PARENT_PATTERNS,
    DirectedStructure,
    build_trellis,
    format_structure,
    fs_structure,
    lead_structure,
    mutual_information_matrix,
    spanning_tree_structure,
)


def _key_value(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlctrellis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    gsub = gen.add_subparsers(dest="generator", required=True)
    bn = gsub.add_parser("bn", help="random one-parent Bayesian-network labels")
    bn.add_argument("--l", type=int, required=True, help="number of labels")
    bn.add_argument("--d", type=int, required=True, help="number of features")
    bn.add_argument("--t", type=int, required=True, help="ones per weight vector")
    bn.add_argument("--n", type=int, default=1000)
    bn.add_argument("--alpha", type=float, default=1.0)
    bn.add_argument("--sigma2", type=float, default=1.0)
    bn.add_argument("--delta", type=float, default=0.0)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--out", default="bn.csv")
    bn.add_argument("--truth", help="ground-truth structure path (default: <out>.truth.txt)")
    loc = gsub.add_parser("local", help="light-sensor localization grid")
    loc.add_argument("--w", type=int, required=True, help="grid width (L = w*w)")
    loc.add_argument("--sensors", type=int, required=True)
    loc.add_argument("--n", type=int, default=1000)
    loc.add_argument("--m", type=int, default=1, help="observations per sensor")
    loc.add_argument("--eps-fn", type=float, default=0.15)
    loc.add_argument("--eps-fp", type=float, default=0.01)
    loc.add_argument("--seed", type=int, default=0)
    loc.add_argument("--out", default="local.csv")
    loc.add_argument("--scenario", help="write the scenario description as JSON")

    run = sub.add_parser("run", help="cross-validated evaluation of methods")
    run.add_argument("--config", help="INI experiment file; flags override its values")
    run.add_argument("--data", help="dataset CSV")
    run.add_argument("--label-count", type=int)
    run.add_argument("--generator", choices=sorted(harness.GENERATORS))
    run.add_argument("--param", action="append", type=_key_value, default=[],
                     help="generator (gen.key=v) or method (method.key=v) parameter")
    run.add_argument("--method", action="append", default=[], help="method name(s), comma separated")
    run.add_argument("--name", help="dataset name in the report")
    run.add_argument("--folds", type=int)
    run.add_argument("--test-fraction", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--epochs", type=int)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--workers", type=int)
    run.add_argument("--no-timing", action="store_true", help="report zero times (byte-stable output)")
    run.add_argument("--save-config", help="write the effective configuration to this path")

    rank = sub.add_parser("rank", help="average ranks and Nemenyi critical distance")
    rank.add_argument("reports", nargs="+")
    rank.add_argument("--qp", type=float, help="q value of the Nemenyi test")
    rank.add_argument("--format", choices=("csv", "json"), default="csv")
    rank.add_argument("--out")

    dump = sub.add_parser("dump-structure", help="print a learned label structure")
    dump.add_argument("--data", required=True)
    dump.add_argument("--label-count", type=int, required=True)
    dump.add_argument("--method", choices=("ic", "fs", "lead", "ct", "ebcc", "cdt"), default="ct")
    dump.add_argument("--width", type=int)
    dump.add_argument("--pattern", choices=sorted(PARENT_PATTERNS), default=DEFAULT_PATTERN)
    dump.add_argument("--max-parents", type=int, default=2)
    dump.add_argument("--threshold", type=float, default=0.0)
    dump.add_argument("--seed", type=int, default=0)
    dump.add_argument("--out")
    return parser


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> None:
    if args.generator == "bn":
        dataset, truth = generate_bn_dataset(
            args.n, args.d, args.l, args.t, args.alpha, args.sigma2, args.delta, args.seed
        )
        save_dataset(dataset, args.out)
        truth_path = args.truth or str(Path(args.out).with_suffix("")) + ".truth.txt"
        Path(truth_path).write_text(format_structure(DirectedStructure(parents=tuple(truth.parents))))
        print(f"wrote {args.out} (N={dataset.n}, L={dataset.l}, D={dataset.d}) and {truth_path}")
    else:
        dataset = generate_localization_dataset(
            args.w, args.sensors, args.n, args.m, args.seed, args.eps_fn, args.eps_fp
        )
        save_dataset(dataset, args.out)
        if args.scenario:
            scenario = build_scenario(args.w, args.sensors, args.eps_fn, args.eps_fp)
            Path(args.scenario).write_text(json.dumps(scenario.to_record(), indent=2))
        print(f"wrote {args.out} (N={dataset.n}, L={dataset.l}, D={dataset.d})")


def config_from_args(args) -> harness.ExperimentConfig:
    config = harness.load_config(args.config) if args.config else harness.ExperimentConfig(methods=())
    overrides = {}
    methods = [m for chunk in args.method for m in chunk.split(",") if m.strip()]
    if methods:
        overrides["methods"] = tuple(methods)
    if args.data:
        overrides.update(data_path=args.data, generator=None)
    if args.generator:
        overrides.update(generator=args.generator, data_path=None)
    for flag, key in (("label_count", "label_count"), ("name", "name"), ("folds", "folds"),
                      ("test_fraction", "test_fraction"), ("seed", "seed"), ("epochs", "epochs"),
                      ("out", "out"), ("format", "format"), ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    if args.no_timing:
        overrides["timing"] = False
    gen_params = dict(config.generator_params)
    method_params = {m: dict(p) for m, p in config.method_params.items()}
    for key, value in args.param:
        scope, _, name = key.partition(".")
        if not name:
            raise ConfigurationError(f"parameter {key!r} must look like gen.key or method.key")
        if scope == "gen":
            gen_params[name] = value
        else:
            method_params.setdefault(scope, {})[name] = value
    overrides.update(generator_params=gen_params, method_params=method_params)
    return replace(config, **overrides)


def cmd_run(args) -> None:
    config = config_from_args(args).validate()
    if args.save_config:
        Path(args.save_config).write_text(config.to_ini())
    rows = harness.run_experiment(config)
    text = harness.format_rows(rows, config.format)
    if config.out:
        Path(config.out).write_text(text, encoding="utf-8")
        print(harness.summary_table(rows))
    else:
        sys.stdout.write(text)


def cmd_rank(args) -> None:
    result = harness.rank_report(args.reports, args.qp)
    _emit(harness.format_rank_report(result, args.format), args.out)


def cmd_dump_structure(args) -> None:
    dataset = load_dataset(args.data, args.label_count)
    base = SgdConfig(seed=args.seed)
    if args.method == "ic":
        structure = DirectedStructure(parents=((),) * dataset.l)
    elif args.method == "fs":
        structure = fs_structure(dataset.labels, args.max_parents, args.threshold, args.seed)
    elif args.method == "lead":
        structure = lead_structure(dataset, base, args.max_parents, args.threshold, args.seed)
    elif args.method == "ebcc":
        structure = spanning_tree_structure(mutual_information_matrix(dataset.labels), args.seed)
    else:
        pattern = DEFAULT_PATTERN if args.method == "cdt" else args.pattern
        structure = build_trellis(mutual_information_matrix(dataset.labels), args.width, pattern, args.seed)
        if args.method == "cdt":
            ne = structure.neighbors()
            text = "".join(f"{c}: {','.join(map(str, n))}\n" for c, n in enumerate(ne))
            return _emit(text, args.out)
    _emit(format_structure(structure), args.out)


COMMANDS = {
    "generate": cmd_generate,
    "run": cmd_run,
    "rank": cmd_rank,
    "dump-structure": cmd_dump_structure,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
