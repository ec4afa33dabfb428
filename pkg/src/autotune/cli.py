"""Command-line interface: ``autotune {tune,benchmark,compare,plot}``.

Exit status is 0 on success, 1 when tuning (or plotting) fails and 2 for
invalid flags or inputs.  Options can also come from a ``key=value`` file
given with ``--config``; flags on the command line win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .bench import BenchReport, Method, compare_models, run_benchmark
from .data import DataError, load_dataset
from .learners import LearnerKind
from .plot import write_svg
from .tuner import CrossValidation, FastHoldout, default_space, tune

log = logging.getLogger("autotune")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("AUTOTUNE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"AUTOTUNE_SEED must be an integer, got {raw!r}") from None


def read_config(path) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _strategy_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fast", type=float, metavar="FRACTION",
                   help="fast holdout: fit on this fraction of the training rows (default 0.5)")
    g.add_argument("--cross", type=int, metavar="K", help="k-fold cross-validation instead")


def _common(p):
    p.add_argument("--config", metavar="FILE", help="key=value file with default option values")
    p.add_argument("--seed", type=int, help="random seed (default: $AUTOTUNE_SEED or 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autotune", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="tune one model and print the result as JSON")
    p.add_argument("--data", required=True, help="bundled dataset name or CSV path")
    p.add_argument("--target", help="response column (optional for bundled data)")
    p.add_argument("--learner", "--method", dest="learner", default="svm",
                   help="svm, gbm, ada or en")
    p.add_argument("--optimizer", default="hj", choices=("hj", "ga", "grid"))
    _strategy_args(p)
    p.add_argument("--budget", type=int, help="Hooke-Jeeves evaluation budget")
    p.add_argument("--tol", type=float, help="Hooke-Jeeves step tolerance (scaled units)")
    p.add_argument("--population", type=int, help="GA population size")
    p.add_argument("--generations", type=int, help="GA generations")
    p.add_argument("--bound", action="append", default=[], metavar="NAME=LO:HI",
                   help="override one search-space bound (natural units); repeatable")
    p.add_argument("--trace", action="store_true", help="include every evaluation in the output")
    p.add_argument("--out", help="also write the JSON here")
    _common(p)

    p = sub.add_parser("benchmark", help="repeated split/tune/test trials; writes JSON and CSV")
    p.add_argument("--datasets", "--data", dest="datasets", required=True,
                   help="comma-separated bundled names or CSV paths (bundled targets)")
    p.add_argument("--learner", "--method", dest="learner", default="svm",
                   help="comma-separated learners")
    p.add_argument("--optimizer", default="hj", help="comma-separated: hj, ga, grid")
    _strategy_args(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out", default="bench_out", help="output directory")
    _common(p)

    p = sub.add_parser("compare", help="every learner under both optimizers and strategies")
    p.add_argument("--data", required=True)
    p.add_argument("--target")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--optimizer", default="hj,ga", help="comma-separated optimizers")
    p.add_argument("--strategies", default="cv10,fast0.5",
                   help="comma-separated: cvK and/or fastF")
    p.add_argument("--out", default="compare_out", help="output directory")
    _common(p)

    p = sub.add_parser("plot", help="SVG of error against tuning time from a report")
    p.add_argument("report", help="report JSON written by benchmark or compare")
    p.add_argument("--out", help="SVG path (default: next to the report)")
    p.add_argument("--title", default="")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _split_list(text: str) -> list[str]:
    return [s.strip() for s in str(text).split(",") if s.strip()]


def _strategy(args):
    if args.cross is not None:
        return CrossValidation(args.cross)
    return FastHoldout(0.5 if args.fast is None else args.fast)


def _apply_bounds(space, bounds):
    for item in bounds:
        try:
            name, rng = item.split("=", 1)
            lo, hi = (float(v) for v in rng.split(":"))
        except ValueError:
            raise UsageError(f"--bound expects NAME=LO:HI, got {item!r}") from None
        space = space.with_bounds(name.strip(), lo, hi)
    return space


def cmd_tune(args) -> int:
    data = load_dataset(args.data, args.target)
    learner = LearnerKind.parse(args.learner)
    if learner is LearnerKind.ADABOOST and not data.is_binary:
        raise UsageError("adaboost needs a binary target")
    opts = {}
    if args.optimizer == "hj":
        opts.update({k: v for k, v in (("budget", args.budget), ("tol", args.tol)) if v is not None})
    elif args.optimizer == "ga":
        opts.update({k: v for k, v in (("population", args.population),
                                       ("generations", args.generations)) if v is not None})
        opts["jobs"] = args.jobs
    space = None
    if args.optimizer != "grid":
        try:
            space = _apply_bounds(default_space(learner, data.kind), args.bound)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc)) from None
    strategy = _strategy(args)
    if args.optimizer == "grid" and not isinstance(strategy, CrossValidation):
        strategy = CrossValidation(10)
    result = tune(data, learner, args.optimizer, strategy, args.seed, space=space, **opts)
    doc = result.to_dict(include_trace=args.trace)
    doc["dataset"] = data.name
    doc["seed"] = args.seed
    text = json.dumps(doc, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    if result.failed:
        log.error("tuning failed: every candidate configuration failed to fit")
        return EXIT_FAIL
    return EXIT_OK


def _report_exit(report: BenchReport, paths) -> int:
    for p in paths:
        print(p)
    if report.records and all(r.failed for r in report.records):
        log.error("every trial failed")
        return EXIT_FAIL
    return EXIT_OK


def cmd_benchmark(args) -> int:
    strategy = _strategy(args)
    methods = []
    for learner in _split_list(args.learner):
        for opt in _split_list(args.optimizer):
            strat = CrossValidation(10) if opt == "grid" and not isinstance(strategy, CrossValidation) \
                else strategy
            methods.append(Method(LearnerKind.parse(learner), opt, strat))
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    report = run_benchmark(_split_list(args.datasets), methods, args.trials, args.seed,
                           jobs=args.jobs)
    return _report_exit(report, report.save(args.out))


def cmd_compare(args) -> int:
    from .tuner import parse_strategy

    data = load_dataset(args.data, args.target)
    strategies = tuple(parse_strategy(s) for s in _split_list(args.strategies))
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    report = compare_models(data, args.trials, args.seed, optimizers=tuple(_split_list(args.optimizer)),
                            strategies=strategies, jobs=args.jobs)
    return _report_exit(report, report.save(args.out))


def cmd_plot(args) -> int:
    path = Path(args.report)
    try:
        report = BenchReport.load(path)
    except (OSError, ValueError, KeyError) as exc:
        log.error("cannot read report %s: %s", path, exc)
        return EXIT_FAIL
    out = Path(args.out) if args.out else path.with_suffix(".svg")
    try:
        write_svg(report, out, args.title)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    print(out)
    return EXIT_OK


COMMANDS = {"tune": cmd_tune, "benchmark": cmd_benchmark, "compare": cmd_compare, "plot": cmd_plot}


def _config_defaults(sp: argparse.ArgumentParser, values: dict) -> dict:
    actions = {a.dest: a for a in sp._actions}
    unknown = sorted(set(values) - set(actions) - {"config"})
    if unknown:
        raise UsageError(f"unknown config keys: {unknown}")
    out = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None:
            continue
        action.required = False  # the file supplies it
        if isinstance(action, argparse._StoreTrueAction):
            out[key] = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            out[key] = _split_list(raw)
        else:
            out[key] = raw  # argparse converts string defaults with the option's type
    return out


def _parse(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        values = read_config(known.config)
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        command = next((a for a in argv if a in sub.choices), None)
        if command is not None:
            sp = sub.choices[command]
            sp.set_defaults(**_config_defaults(sp, values))
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(f"autotune: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse reports bad flags this way
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return COMMANDS[args.command](args)
    except (UsageError, DataError) as exc:
        print(f"autotune: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"autotune: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
