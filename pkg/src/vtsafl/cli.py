"""Command-line entry point: ``simulate``, ``bench`` and ``sizes``.

Exit codes: 0 on success, 1 when a round fails (or sizes vary with ``n``),
2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from dataclasses import fields

from .bench import measure_primitives, message_sizes
from .errors import ParameterError
from .fl_sim import SimConfig, Simulation, summarize

EXIT_OK, EXIT_ROUND_FAILURE, EXIT_USAGE = 0, 1, 2

_FLAG_TO_FIELD = {
    "clients": "clients", "aggregators": "aggregators", "threshold": "threshold",
    "rounds": "rounds", "dim": "dim", "scale": "scale", "clip": "clip", "bound": "bound",
    "seed": "seed", "verifiers": "verifiers",
}


class UsageError(Exception):
    pass


def parse_malicious(specs) -> dict:
    """``["2:tamper", "3:crash,4:replay"]`` -> ``{2: "tamper", 3: "crash", 4: "replay"}``."""
    out = {}
    for spec in specs or ():
        for item in filter(None, (p.strip() for p in spec.split(","))):
            idx, sep, behavior = item.partition(":")
            if not sep or not idx.isdigit():
                raise UsageError(f"bad --malicious entry {item!r}; expected INDEX:BEHAVIOR")
            out[int(idx)] = behavior
    return out


def build_config(args) -> SimConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        known = {f.name for f in fields(SimConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "malicious" in data:
            data["malicious"] = {int(k): v for k, v in data["malicious"].items()}
    for flag, name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = value
    if args.malicious:
        data["malicious"] = {**data.get("malicious", {}), **parse_malicious(args.malicious)}
    try:
        return SimConfig(**data).validate()
    except (ParameterError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _sim_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with SimConfig fields; flags override it")
    p.add_argument("--clients", type=int)
    p.add_argument("--aggregators", type=int)
    p.add_argument("--threshold", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--scale", type=int)
    p.add_argument("--clip", type=float)
    p.add_argument("--bound", type=int, help="discrete-log bound B on the aggregate")
    p.add_argument("--malicious", action="append", metavar="J:BEHAVIOR",
                   help="tamper, random, replay or crash; repeatable or comma separated")
    p.add_argument("--seed", type=int)
    p.add_argument("--verifiers", choices=("all", "one"))
    p.add_argument("--out", help="write JSON lines here instead of stdout")


def _int_list(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vtsafl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run federated aggregation rounds")
    _sim_flags(sim)
    sim.add_argument("--no-timings", action="store_true",
                     help="omit wall-clock fields so output is reproducible")

    bench = sub.add_parser("bench", help="time the scheme's primitives")
    bench.add_argument("--dims", type=_int_list, default=[5, 10, 50, 100])
    bench.add_argument("--threshold", type=int, default=3)
    bench.add_argument("--aggregators", type=int, default=5)
    bench.add_argument("--reps", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out")

    sizes = sub.add_parser("sizes", help="report serialized message sizes")
    _sim_flags(sizes)
    sizes.add_argument("--dims", type=_int_list, default=[5, 10, 50, 100])
    return parser


@contextlib.contextmanager
def _output(path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit(fh, obj):
    fh.write(json.dumps(obj, sort_keys=True) + "\n")
    fh.flush()


def cmd_simulate(args) -> int:
    config = build_config(args)
    reports = []
    with _output(args.out) as fh:
        sim = Simulation(config)
        for k in range(1, config.rounds + 1):
            report = sim.run_round(k)
            reports.append(report)
            _emit(fh, report.to_dict(timings=not args.no_timings))
        _emit(fh, summarize(reports))
    return EXIT_OK if all(r.success for r in reports) else EXIT_ROUND_FAILURE


def cmd_bench(args) -> int:
    if not 2 <= args.threshold <= args.aggregators:
        raise UsageError("need 2 <= threshold <= aggregators")
    if not args.dims or min(args.dims) < 1:
        raise UsageError("--dims must list positive client counts")
    result = measure_primitives(args.dims, t=args.threshold, s=args.aggregators,
                                reps=args.reps, seed=args.seed)
    with _output(args.out) as fh:
        _emit(fh, result)
    return EXIT_OK


def cmd_sizes(args) -> int:
    config = build_config(args)
    if not args.dims or min(args.dims) < 1:
        raise UsageError("--dims must list positive client counts")
    ns = sorted(set(args.dims) | {config.clients})
    result = message_sizes(ns, t=config.threshold, s=config.aggregators, seed=config.seed)
    el, sc = result["element_bytes"], result["scalar_bytes"]
    result["per_round"] = {
        "encrypt_per_client": config.dim * el,
        "dkeygen_per_aggregator": sc,
        "dkeygen_published": 2 * el,
        "share_decrypt_per_aggregator": config.dim * result["rows"][0]["share_decrypt"],
    }
    with _output(args.out) as fh:
        _emit(fh, result)
    return EXIT_OK if result["constant_in_n"] else EXIT_ROUND_FAILURE


COMMANDS = {"simulate": cmd_simulate, "bench": cmd_bench, "sizes": cmd_sizes}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vtsafl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
