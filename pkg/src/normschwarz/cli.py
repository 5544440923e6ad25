"""Command line entry point.

Exit codes: 0 success / inequality holds, 1 violation or verification
mismatch, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import conjectures as cj
from .harness import SearchConfig, run_search, verify_paper
from .linalg import ConvergenceError, MatrixValueError
from .serialize import dumps_line, load_instance, matrix_to_json

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None


def _conj_id(text: str) -> str:
    cid = text.upper()
    if cid not in cj.CONJECTURE_IDS:
        raise argparse.ArgumentTypeError(f"unknown conjecture id {text!r}; choose from {', '.join(cj.CONJECTURE_IDS)}")
    return cid


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="normschwarz", description="Norm Schwarz inequality checkers and counterexample search.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("paper-verify", help="recompute the 2x2 counterexample and its 6x6 consequences")

    c = sub.add_parser("check", help="evaluate one inequality on matrices from a JSON file")
    c.add_argument("conjecture_id", type=_conj_id)
    c.add_argument("--input", required=True, help="JSON object {name: matrix} (or a search record)")
    c.add_argument("--tol", type=float, default=cj.VIOLATION_TOL)

    s = sub.add_parser("search", help="seeded random counterexample search")
    s.add_argument("conjecture_id", type=_conj_id)
    s.add_argument("--dim", type=_dims, required=True, help="dimension, or comma-separated list")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--cond-cap", type=float, default=1e6)
    s.add_argument("--tol", type=float, default=cj.VIOLATION_TOL)
    s.add_argument("--out", required=True, help="JSON-lines file receiving violating instances")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--embed", action="store_true", help="C3/TRACE_I: draw (S, U) from the block 3-cycle embedding")

    k = sub.add_parser("construct-counterexample", help="build a normal B violating Conjecture 1 from a violating (S, U)")
    k.add_argument("--input", required=True, help="JSON object with matrices S and U")
    k.add_argument("--out", required=True)
    return p


def _cmd_verify(args) -> int:
    items = verify_paper()
    for v in items:
        print(v.line())
    failed = sum(not v.ok for v in items)
    print(f"{len(items) - failed}/{len(items)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VIOLATION


def _cmd_check(args) -> int:
    inst = load_instance(args.input)
    report = cj.check(args.conjecture_id, inst, args.tol)
    print(dumps_line(report.to_dict()))
    return EXIT_OK if report.holds else EXIT_VIOLATION


def _cmd_search(args) -> int:
    cfg = SearchConfig(args.conjecture_id, args.dim, args.trials, args.seed, args.cond_cap, args.tol, args.out,
                       args.embed)
    summary = run_search(cfg, workers=args.workers)
    print(json.dumps(summary.to_dict()))
    for msg in summary.error_messages[:5]:
        print(f"warning: {msg}", file=sys.stderr)
    return EXIT_OK


def _cmd_construct(args) -> int:
    inst = load_instance(args.input)
    if "S" not in inst or "U" not in inst:
        raise ValueError("input needs matrices S and U")
    ce = cj.construct_conj1_counterexample(inst["S"], inst["U"])
    if ce is None:
        print("no violation: E_U(S # U* S^-1 U) >= I holds for this input")
        return EXIT_VIOLATION
    report = cj.check_conj1(ce.a, ce.b)
    out = {
        "m": ce.m,
        "compression": ce.compression,
        "trajectory": ce.trajectory,
        "A": matrix_to_json(ce.a),
        "B": matrix_to_json(ce.b),
        "report": report.to_dict(),
    }
    with open(args.out, "w") as fh:
        fh.write(dumps_line(out) + "\n")
    print(dumps_line(report.to_dict()))
    return EXIT_OK


_COMMANDS = {
    "paper-verify": _cmd_verify,
    "check": _cmd_check,
    "search": _cmd_search,
    "construct-counterexample": _cmd_construct,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, json.JSONDecodeError, MatrixValueError, ValueError, ConvergenceError) as exc:
        print(f"normschwarz {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
