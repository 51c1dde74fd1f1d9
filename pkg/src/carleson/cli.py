"""Command line entry point.

Exit codes: 0 success, 1 parse error, 2 invalid instance, 3 numerical
failure (power iteration did not converge and ``--strict`` was given).
"""

from __future__ import annotations

import argparse
import logging
import math
import re
import sys

from . import instance as ins
from . import report as rep
from .errors import EvaluationError, InvalidInstanceError, ParseError

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("carleson")


def make_parser():
    p = argparse.ArgumentParser(
        prog="carleson",
        description="Carleson, compactness and Hilbert-Schmidt certificates "
                    "with a brute-force operator cross-check.")
    p.add_argument("command", choices=rep.COMMANDS)
    p.add_argument("instance", help="instance file ('-' reads standard input)")
    p.add_argument("--truncate", type=int, metavar="N")
    p.add_argument("--tol", type=float, metavar="X",
                   help="power-iteration relative residual tolerance")
    p.add_argument("--window", type=int, metavar="W",
                   help="length of the stabilization window")
    p.add_argument("--discretize", type=int, metavar="K",
                   help="atoms per circle / radial nodes for the oracle")
    p.add_argument("--strict", action="store_true",
                   help="treat oracle non-convergence as fatal (exit 3)")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--param", metavar="KEY=START:STEP:END",
                   help="swept parameter for 'sweep': an option name "
                        "or measure.<k>.<field> (k is 1-based)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


_SWEEP = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)=([^:]+):([^:]+):([^:]+)$")


def parse_sweep(arg: str):
    m = _SWEEP.match(arg.strip())
    if m is None:
        raise ValueError(f"sweep parameter must look like key=start:step:end, got {arg!r}")
    key = m.group(1)
    start, step, end = (float(g) for g in m.group(2, 3, 4))
    if step == 0 or not all(map(math.isfinite, (start, step, end))):
        raise ValueError("sweep step must be a nonzero finite number")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError("empty sweep range")
    return key, [start + k * step for k in range(count)]


def apply_sweep(source: ins.InstanceFile, key: str, value: float) -> ins.InstanceFile:
    if key.startswith("measure."):
        parts = key.split(".")
        if len(parts) != 3 or not parts[1].isdigit():
            raise ValueError(f"measure field must look like measure.<k>.<field>, got {key!r}")
        k = int(parts[1])
        if not 1 <= k <= len(source.measure):
            raise ValueError(f"no measure component number {k}")
        return ins.with_field(source, k - 1, parts[2], value)
    if key not in ins.OPTION_TYPES or ins.OPTION_TYPES[key] is bool:
        raise ValueError(f"cannot sweep {key!r}")
    if ins.OPTION_TYPES[key] is int:
        if not float(value).is_integer():
            raise ValueError(f"option {key!r} needs integer values, got {value!r}")
        value = int(value)
    return ins.with_option(source, key, value)


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(args) -> int:
    overrides = dict(truncate=args.truncate, tol=args.tol, window=args.window,
                     discretize=args.discretize)
    try:
        source = ins.parse(_read(args.instance))
    except ParseError as err:
        print(f"{args.instance}:{err.located()}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as err:
        print(f"cannot read {args.instance}: {err}", file=sys.stderr)
        return EXIT_PARSE

    try:
        if args.command == "sweep":
            if not args.param:
                print("sweep needs --param KEY=START:STEP:END", file=sys.stderr)
                return EXIT_PARSE
            try:
                key, values = parse_sweep(args.param)
                variants = [(v, apply_sweep(source, key, v)) for v in values]
            except (ValueError, KeyError) as err:
                print(f"--param: {err}", file=sys.stderr)
                return EXIT_PARSE
            rows, converged = [], True
            for value, variant in variants:
                row, ok = rep.sweep_row(value, ins.build(variant, **overrides))
                rows.append(row)
                converged &= ok
            _emit(rep.rows_to_csv(rows), args.out)
        else:
            inst = ins.build(source, **overrides)
            doc, converged = rep.build_document(inst, args.command)
            _emit(rep.to_json(doc) + "\n", args.out)
    except EvaluationError as err:
        print(f"{args.instance}:{err.located()}", file=sys.stderr)
        return EXIT_INVALID
    except InvalidInstanceError as err:
        print(f"{args.instance}: invalid instance: {err}", file=sys.stderr)
        return EXIT_INVALID

    if not converged:
        log.warning("power iteration reached the iteration cap")
        if args.strict:
            return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
