"""Command-line entry point: ``antnest {run,compare,bench,equiv,trajectory}``.

Option precedence is flag > config file > built-in default.  The config file
is ``key = value`` per line, ``#`` starts a comment, keys are the long flag
names without dashes (``iters = 50``, ``bounds = -5:5``).

Exit codes: 0 success, 2 equivalence failure (``equiv`` only), 3 unknown
function, 4 I/O failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import Bounds, InvalidIntervalError, RunConfig
from .functions import UnknownFunctionError, available, lookup
from .harness import (
    compare,
    emit_results,
    equivalence_check,
    execute_run,
    run_trials,
    trajectory,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DIVERGED = 2
EXIT_UNKNOWN_FUNCTION = 3
EXIT_IO = 4
EXIT_USAGE = 64

SUBCOMMANDS = ("run", "compare", "bench", "equiv", "trajectory")

DEFAULTS = {
    "function": "sphere",
    "dim": 10,
    "agents": 30,
    "iters": 500,
    "seed": 1,
    "bounds": (-100.0, 100.0),
    "impl": "vector",
    "scope": "element",
    "runs": 30,
    "warmups": 3,
    "reps": 5,
    "out": None,
    "format": "csv",
}


class UsageError(Exception):
    pass


def _positive(flag):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise UsageError(f"--{flag}: expected an integer, got {text!r}") from None
        if v < 1:
            raise UsageError(f"--{flag}: must be >= 1, got {v}")
        return v
    return conv


def _nonnegative(flag):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise UsageError(f"--{flag}: expected an integer, got {text!r}") from None
        if v < 0:
            raise UsageError(f"--{flag}: must be >= 0, got {v}")
        return v
    return conv


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise UsageError(f"--seed: expected an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise UsageError(f"--seed: must fit in 64 unsigned bits, got {v}")
    return v


def _bounds(text):
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        bounds = Bounds(float(lo), float(hi))
    except InvalidIntervalError as exc:
        raise UsageError(f"--bounds: {exc}") from None
    except ValueError:
        raise UsageError(f"--bounds: expected LO:HI, got {text!r}") from None
    return bounds.lower, bounds.upper


def _choice(flag, options):
    def conv(text):
        if text not in options:
            raise UsageError(f"--{flag}: expected one of {'|'.join(options)}, got {text!r}")
        return text
    return conv


CONVERTERS = {
    "function": str,
    "dim": _positive("dim"),
    "agents": _positive("agents"),
    "iters": _nonnegative("iters"),
    "seed": _seed,
    "bounds": _bounds,
    "impl": _choice("impl", ("scalar", "vector")),
    "scope": _choice("scope", ("element", "agent")),
    "runs": _positive("runs"),
    "warmups": _nonnegative("warmups"),
    "reps": _positive("reps"),
    "out": str,
    "format": _choice("format", ("csv", "json")),
}


@dataclass
class CliInvocation:
    subcommand: str
    flags: dict = field(default_factory=dict)
    config_file: str | None = None

    def run_config(self, function_id: str | None = None) -> RunConfig:
        f = self.flags
        lo, hi = f["bounds"]
        return RunConfig(
            function_id=function_id or f["function"],
            dimension=f["dim"],
            agents=f["agents"],
            iterations=f["iters"],
            seed=f["seed"],
            bounds=Bounds(lo, hi),
            condition_scope=f["scope"],
        )

    def functions(self) -> list[str]:
        return [name.strip() for name in self.flags["function"].split(",") if name.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


HELP = {
    "function": "objective id, or comma-separated ids for bench (default: sphere; bench: all)",
    "dim": "problem dimension D",
    "agents": "population size N",
    "iters": "iterations per run",
    "seed": "RNG seed (bench/run_trials use seed, seed+1, ...)",
    "bounds": "search box as LO:HI",
    "impl": "backend for run/trajectory: scalar or vector",
    "scope": "condition scope: element or agent",
    "runs": "independent runs per bench row",
    "warmups": "untimed runs per backend before compare timing",
    "reps": "timed runs per backend for compare (median reported)",
    "out": "output path (default stdout)",
    "format": "csv or json",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="antnest", description="Ant nesting optimizer with scalar and vectorized backends.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    for key in CONVERTERS:
        default = DEFAULTS[key]
        if key == "bounds":
            default = "{:g}:{:g}".format(*default)
        suffix = "" if default is None or key == "function" else f" (default: {default})"
        parser.add_argument(f"--{key}", dest=key, default=None, help=HELP[key] + suffix)
    parser.add_argument("--config", dest="config", default=None, help="key = value file; flags override it")
    return parser


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lstrip("-"), value.strip()
        if not sep or not key:
            raise UsageError(f"--config: {path}:{lineno}: expected 'key = value'")
        if key not in CONVERTERS:
            raise UsageError(f"--config: {path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _glue_negative_values(args: list[str]) -> list[str]:
    # `--bounds -5:5` would otherwise be read as an unknown option
    out = []
    it = iter(args)
    for a in it:
        if a in ("--bounds", "--seed"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def parse(args: list[str]) -> CliInvocation:
    ns = _build_parser().parse_args(_glue_negative_values(list(args)))
    raw = {}
    if ns.config is not None:
        raw.update(read_config_file(ns.config))
    raw.update({k: getattr(ns, k) for k in CONVERTERS if getattr(ns, k) is not None})

    flags = dict(DEFAULTS)
    for key, text in raw.items():
        flags[key] = CONVERTERS[key](text)
    if ns.subcommand == "bench" and "function" not in raw:
        flags["function"] = ",".join(available())
    return CliInvocation(ns.subcommand, flags, ns.config)


def _emit(inv: CliInvocation, results, schema: str, dimension: int | None = None):
    emit_results(results, inv.flags["format"], inv.flags["out"], schema=schema, dimension=dimension)


def execute(inv: CliInvocation) -> int:
    f = inv.flags
    names = inv.functions()
    for name in names:
        lookup(name)
    if inv.subcommand != "bench" and len(names) != 1:
        raise UsageError(f"--function: {inv.subcommand} takes exactly one function")

    if inv.subcommand == "run":
        result = execute_run(inv.run_config(), f["impl"])
        _emit(inv, result, "trace")
    elif inv.subcommand == "trajectory":
        cfg = inv.run_config()
        _emit(inv, trajectory(cfg, f["impl"]), "trajectory", cfg.dimension)
    elif inv.subcommand == "compare":
        report = compare(inv.run_config(), f["warmups"], f["reps"])
        if not report.equivalent:
            print(f"WARNING: backends are NOT equivalent on {report.function_id}; "
                  "timings compare different computations", file=sys.stderr)
        _emit(inv, [report], "compare")
    elif inv.subcommand == "bench":
        stats = []
        for name in names:
            cfg = inv.run_config(name)
            for backend in ("scalar", "vector"):
                log.info("bench %s/%s: %d runs from seed %d", name, backend, f["runs"], cfg.seed)
                stats.append(run_trials(cfg, backend, f["runs"]))
        _emit(inv, stats, "bench")
    elif inv.subcommand == "equiv":
        report = equivalence_check(inv.run_config())
        text = report.describe() + "\n"
        if f["out"] is None:
            sys.stdout.write(text)
        else:
            Path(f["out"]).write_text(text, encoding="utf-8")
        return EXIT_OK if report.passed else EXIT_DIVERGED
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        inv = parse(argv)
        return execute(inv)
    except UsageError as exc:
        print(f"antnest: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownFunctionError as exc:
        print(f"antnest: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_FUNCTION
    except OSError as exc:
        print(f"antnest: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
