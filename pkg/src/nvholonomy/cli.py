"""Command line entry point: ``nvholonomy <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import runner
from .runner import EXIT_CONFIG, EXIT_OK, ConfigError, ExperimentSpec


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _set_pairs(pairs: list[str]) -> dict[str, str]:
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvholonomy", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list named experiments")

    p = sub.add_parser("run", help="run a named experiment")
    p.add_argument("experiment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "json"])

    p = sub.add_parser("batch", help="run every experiment in a YAML run file")
    p.add_argument("runfile")

    p = sub.add_parser("holonomy", help="Wilson line of a path")
    p.add_argument("--path", default="square", help="path file or builtin (circle, square)")
    p.add_argument("--steps", type=int, default=4096)
    p.add_argument("--connection", choices=["analytic", "numeric"], default="analytic")
    p.add_argument("--out", default="-")

    p = sub.add_parser("sweep-degeneracy", help="populations over a delta x T grid")
    p.add_argument("--deltas", type=_floats, required=True)
    p.add_argument("--times", type=_floats, default=[1e4])
    p.add_argument("--path", default="circle")
    p.add_argument("--out", default="-")

    p = sub.add_parser("noise-ensemble", help="axial field-noise ensemble")
    p.add_argument("--sigma", type=_floats, default=[1e-4])
    p.add_argument("--events", type=_floats, default=[1000])
    p.add_argument("--members", type=int, default=50)
    p.add_argument("--total-time", type=float, default=1e4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("path-perturb", help="random polar-angle path errors")
    p.add_argument("--divergence-deg", type=_floats, default=[2.0])
    p.add_argument("--members", type=int, default=50)
    p.add_argument("--total-time", type=float, default=1e4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("gyro", help="gyroscope signal and sensitivity")
    for flag, default in [("--n", 1e6), ("--eta", 0.1), ("--contrast", 0.2), ("--t1", 1e-3),
                          ("--t2star", 1e-6), ("--tau", 1.0), ("--omega", 0.0), ("--t", 1e-3)]:
        p.add_argument(flag, type=float, default=default)
    p.add_argument("--samples", type=int, default=33)
    p.add_argument("--out", default="-")
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    cmd = args.command
    if cmd == "run":
        return ExperimentSpec(args.experiment, _set_pairs(args.overrides), args.seed, args.out,
                              args.format)
    if cmd == "sweep-degeneracy":
        name = "degeneracy_sweep" if len(args.times) == 1 else "adiabatic_sweep"
        params = {"deltas": args.deltas, "path": args.path}
        params.update({"total_time": args.times[0]} if len(args.times) == 1 else {"times": args.times})
        return ExperimentSpec(name, params, 0, args.out, "csv")
    if cmd == "noise-ensemble":
        return ExperimentSpec("noise_ensemble",
                              {"sigma": args.sigma, "events": args.events,
                               "members": args.members, "total_time": args.total_time},
                              args.seed, args.out, args.format)
    if cmd == "path-perturb":
        return ExperimentSpec("path_perturb",
                              {"divergence_deg": args.divergence_deg, "members": args.members,
                               "total_time": args.total_time},
                              args.seed, args.out, args.format)
    if cmd == "gyro":
        keys = ["n", "eta", "contrast", "t1", "t2star", "tau", "omega", "t", "samples"]
        return ExperimentSpec("gyro", {k: getattr(args, k) for k in keys}, 0, args.out, "json")
    raise AssertionError(cmd)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    if args.command == "list":
        for name, desc in runner.list_experiments():
            print(f"{name}: {desc}")
        return EXIT_OK

    if args.command == "holonomy":
        try:
            report = runner.holonomy_report(args.path, args.steps, args.connection)
            runner.emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
        except Exception as exc:  # noqa: BLE001
            code = runner.classify(exc)
            logging.getLogger(__name__).error("%s: %s", type(exc).__name__, exc)
            return code
        return EXIT_OK

    if args.command == "batch":
        try:
            specs = runner.load_run_file(args.runfile)
        except Exception as exc:  # noqa: BLE001
            logging.getLogger(__name__).error("%s", exc)
            return runner.classify(exc)
        worst = EXIT_OK
        for spec in specs:
            worst = max(worst, runner.run(spec))
        return worst

    try:
        spec = _spec_from_args(args)
    except ConfigError as exc:
        logging.getLogger(__name__).error("%s", exc)
        return EXIT_CONFIG
    return runner.run(spec)


if __name__ == "__main__":
    raise SystemExit(main())
