"""Command-line surface tying the pipeline together.

Commands: train-forest, compress, evaluate, robustness, export-oracle,
describe. Options can come from a ``key = value`` config file
(``--config``), with explicit flags taking precedence; the master seed
defaults to the CREMBO_SEED environment variable. Every artifact embeds
its resolved configuration for reproducibility.

Exit codes: 0 success, 2 usage/validation error, 1 internal failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .compression import CremboConfig, compress
from .core import load_csv
from .errors import CremboError, InputError
from .evaluation import generalization_experiment, robustness_experiment
from .learners import (
    ForestConfig,
    ForestModel,
    LearnerConfig,
    describe_tree,
    load_model,
    train_forest,
)
from .oracle import QUANTUM_DECIMALS, ensemble_vote_oracle


def _read_config(path) -> dict:
    """Parse a ``key = value`` config file; '#' starts a comment."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"config line without '=': {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg[key.replace("-", "_")] = value
    return cfg


def _subparser_for(parser: argparse.ArgumentParser, command: str):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _apply_config(parser, argv, args) -> argparse.Namespace:
    """Re-parse with config-file values as defaults; flags still win."""
    file_cfg = _read_config(args.config)
    sub = _subparser_for(parser, args.command)
    defaults = {}
    for action in sub._actions:
        if action.dest not in file_cfg:
            continue
        raw = file_cfg[action.dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[action.dest] = raw.lower() in ("1", "true", "yes")
        else:
            defaults[action.dest] = (action.type or str)(raw)
    unknown = set(file_cfg) - {a.dest for a in sub._actions}
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("CREMBO_SEED")
    return int(env) if env else 0


def _write_json(path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _trim_grid(text: str) -> tuple:
    return tuple(float(t) for t in text.split(",") if t.strip() != "")


def _resolved(args, seed) -> dict:
    skip = {"config", "func"}
    out = {k: v for k, v in vars(args).items()
           if k not in skip and not callable(v)}
    out["seed"] = seed
    return out


def cmd_train_forest(args):
    seed = _resolve_seed(args)
    data = load_csv(args.data, args.label)
    forest = train_forest(data, ForestConfig(tree_count=args.trees,
                                             max_depth=args.max_depth,
                                             seed=seed,
                                             class_weighting=args.class_weighting))
    payload = forest.to_json_dict()
    payload["run_config"] = _resolved(args, seed)
    _write_json(args.out, payload)
    print(f"wrote forest ({forest.tree_count} trees) to {args.out}")


def cmd_compress(args):
    seed = _resolve_seed(args)
    data = load_csv(args.data, args.label)
    if (args.forest is None) == (args.matrix is None):
        raise InputError("exactly one of --forest / --matrix is required")
    if args.forest:
        with open(args.forest, encoding="utf-8") as fh:
            big = load_model(json.load(fh))
        if not isinstance(big, ForestModel):
            raise InputError(f"{args.forest} does not contain a forest model")
    else:
        big = args.matrix
    result = compress(data, big,
                      CremboConfig(trim_grid=_trim_grid(args.trim_grid),
                                   val_fraction=args.val_fraction, seed=seed),
                      LearnerConfig(max_depth=args.max_depth),
                      normalize_matrix=args.normalize)
    payload = result.to_json_dict()
    payload["run_config"] = _resolved(args, seed)
    _write_json(args.out, payload)
    if args.report:
        _write_json(args.report, payload)
    print(f"chosen epsilon {result.chosen_epsilon}  depth {result.depth:.6f}  "
          f"val accuracy {result.val_accuracy:.4f}")
    print("eps      depth    val acc  feasible")
    for t in result.trace:
        depth = f"{t.depth:.4f}" if t.depth is not None else "-"
        acc = f"{t.val_accuracy:.4f}" if t.val_accuracy is not None else "-"
        print(f"{t.epsilon:<8} {depth:<8} {acc:<8} {t.feasible}")
    print(describe_tree(result.model))


def _experiment_args(args, seed):
    data = load_csv(args.data, args.label)
    if args.repeats < 1:
        raise InputError("repeats must be >= 1")
    kwargs = dict(big_kind=args.big, repeats=args.repeats, folds=args.folds,
                  seed=seed,
                  forest_cfg=ForestConfig(tree_count=args.trees,
                                          max_depth=args.forest_depth),
                  tree_cfg=LearnerConfig(max_depth=args.max_depth),
                  crembo_cfg=CremboConfig(trim_grid=_trim_grid(args.trim_grid),
                                          val_fraction=args.val_fraction,
                                          seed=seed),
                  matrix_path=args.matrix)
    return data, kwargs


def cmd_evaluate(args):
    seed = _resolve_seed(args)
    data, kwargs = _experiment_args(args, seed)
    report = generalization_experiment(data, **kwargs)
    print(report.to_table())
    if args.out:
        payload = report.to_json_dict()
        payload["run_config"] = _resolved(args, seed)
        _write_json(args.out, payload)


def cmd_robustness(args):
    seed = _resolve_seed(args)
    data, kwargs = _experiment_args(args, seed)
    scores = robustness_experiment(data, **kwargs)
    print("model     agreement")
    for name, score in scores.items():
        print(f"{name:<9} {100 * score:8.2f}")
    if args.out:
        payload = {"agreement": scores, "run_config": _resolved(args, seed)}
        _write_json(args.out, payload)


def cmd_export_oracle(args):
    data = load_csv(args.data, args.label)
    with open(args.forest, encoding="utf-8") as fh:
        forest = load_model(json.load(fh))
    if not isinstance(forest, ForestModel):
        raise InputError(f"{args.forest} does not contain a forest model")
    oracle = ensemble_vote_oracle(forest, data)
    with open(args.out, "w", encoding="utf-8") as fh:
        for row in oracle.matrix:
            fh.write(",".join(repr(round(float(v), QUANTUM_DECIMALS))
                              for v in row))
            fh.write("\n")
    print(f"wrote {oracle.num_rows}x{oracle.num_classes} matrix to {args.out}")


def cmd_describe(args):
    with open(args.model, encoding="utf-8") as fh:
        model = load_model(json.load(fh))
    if isinstance(model, ForestModel):
        raise InputError("describe renders single trees, not forests")
    print(describe_tree(model), end="")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crembo",
                                     description="Robust model compression "
                                                 "via predicate depth")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: CREMBO_SEED env or 0)")

    p = sub.add_parser("train-forest", help="train the big random forest")
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--class-weighting", default="balanced",
                   choices=("balanced", "uniform"))
    common(p)
    p.set_defaults(func=cmd_train_forest)

    p = sub.add_parser("compress", help="compress a big model to a tree")
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--forest", help="forest model JSON as the big model")
    p.add_argument("--matrix", help="probability matrix CSV as the big model")
    p.add_argument("--normalize", action="store_true",
                   help="renormalize matrix rows instead of rejecting")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--trim-grid", default="0,0.01,0.02,0.05,0.1")
    p.add_argument("--val-fraction", type=float, default=0.15)
    common(p)
    p.set_defaults(func=cmd_compress)

    for name, fn in (("evaluate", cmd_evaluate), ("robustness", cmd_robustness)):
        p = sub.add_parser(name)
        p.add_argument("--data", required=True)
        p.add_argument("--label", required=True)
        p.add_argument("--big", default="forest", choices=("forest", "matrix"))
        p.add_argument("--matrix", default=None)
        p.add_argument("--repeats", type=int, default=20)
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--trees", type=int, default=100)
        p.add_argument("--forest-depth", type=int, default=12)
        p.add_argument("--max-depth", type=int, default=4)
        p.add_argument("--trim-grid", default="0,0.01,0.02,0.05,0.1")
        p.add_argument("--val-fraction", type=float, default=0.15)
        p.add_argument("--out", default=None)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("export-oracle", help="materialize the vote oracle")
    p.add_argument("--forest", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label", default=None)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_export_oracle)

    p = sub.add_parser("describe", help="render a tree as if/else text")
    p.add_argument("--model", required=True)
    common(p)
    p.set_defaults(func=cmd_describe)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args = _apply_config(parser, argv, args)
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CremboError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
