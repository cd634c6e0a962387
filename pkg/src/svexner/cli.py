"""Command-line entry point.

    svexner solve --preset riemann_movable --order 2 --out runs/rm
    svexner solve --config my.cfg --set M=400 --set cfl=0.5

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_file, parse_value, resolve
from .model import SolverError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="svexner", description="Saint-Venant-Exner flux-splitting solver")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("solve", help="run a preset or a config file")
    s.add_argument("--preset")
    s.add_argument("--config", help="flat key = value file")
    s.add_argument("--order", type=int, choices=(1, 2))
    s.add_argument("--M", type=int)
    s.add_argument("--cfl", type=float)
    s.add_argument("--out")
    s.add_argument("--star", choices=("linearized", "iterative"))
    s.add_argument("--ngp", type=int, choices=(1, 2, 3))
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key; repeatable")
    sub.add_parser("presets", help="list preset names")
    return p


def _flag_layer(args) -> dict:
    layer = {k: getattr(args, k) for k in ("preset", "order", "M", "cfl", "out", "star", "ngp")}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        layer[key.strip()] = parse_value(key.strip(), value.strip())
    return layer


def _describe(exc: SolverError) -> str:
    lines = [f"solver failure: {exc}"]
    for name in ("cell", "t", "h", "left", "right"):
        if hasattr(exc, name):
            lines.append(f"  {name} = {getattr(exc, name)!r}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "presets":
        from .presets import PRESETS

        print("\n".join(sorted(PRESETS)))
        return EXIT_OK

    from .driver import run

    try:
        file_layer = load_file(args.config) if args.config else {}
        cfg = resolve(file_layer, _flag_layer(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(_describe(exc), file=sys.stderr)
        return EXIT_SOLVER
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
