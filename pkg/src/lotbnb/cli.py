"""Command-line front end: ``lotbnb generate|solve|audit|sweep``.

Exit codes: 0 success or audit pass, 1 usage/input error, 2 incomplete tree
(or infeasible), 3 audit failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .bnb import (BEST_BOUND, DEFAULT_NODE_CAP, RULE_ALIASES, SELECTIONS, BranchingRule,
                  TreeFormatError, read_tree, solve_bnb, tree_stats)
from .certificate import IncompleteTreeError, audit_tree, theorem_bound
from .lotsizing import (brute_force_solve, dp_solve, format_rational, hard_instance,
                        read_instance, solution_rows, write_instance)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCOMPLETE = 2
EXIT_AUDIT_FAIL = 3

SWEEP_FIELDS = ("n", "rule", "selection", "seed", "nodes", "leaves", "depth", "opt",
                "bound", "bound_satisfied", "wall_time_ms")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_n_range(text: str) -> list:
    """``"2..12"``, ``"5"`` or comma-separated mixtures like ``"2..4,8"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("n values must be positive integers")
    return out


def _rule_name(text: str) -> str:
    if text not in RULE_ALIASES:
        raise argparse.ArgumentTypeError(f"unknown rule {text!r}; choose from {sorted(RULE_ALIASES)}")
    return RULE_ALIASES[text]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lotbnb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write the hard instance with n periods")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("instance")
    solve.add_argument("--method", choices=("dp", "bnb", "brute"), default="dp")
    solve.add_argument("--rule", type=_rule_name, default="most-fractional")
    solve.add_argument("--selection", choices=SELECTIONS, default=BEST_BOUND)
    solve.add_argument("--seed", type=int, default=1)
    solve.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    solve.add_argument("--tree-out")
    solve.add_argument("--cold", action="store_true", help="start without the DP incumbent")

    audit = sub.add_parser("audit", help="audit a tree dump against the leaf lower bound")
    audit.add_argument("instance")
    audit.add_argument("tree")
    audit.add_argument("--strict", action="store_true", help="require |S| leaves")

    sweep = sub.add_parser("sweep", help="tree sizes over a range of n")
    sweep.add_argument("--n", type=parse_n_range, required=True)
    sweep.add_argument("--rule", type=_rule_name, action="append")
    sweep.add_argument("--selection", choices=SELECTIONS, action="append")
    sweep.add_argument("--seed", type=int, action="append")
    sweep.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--timing", action="store_true",
                       help="record wall time in ms (makes the CSV run-dependent)")
    return parser


def cmd_generate(args, out) -> int:
    try:
        write_instance(hard_instance(args.n), args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"wrote hard instance n={args.n} to {args.out}", file=out)
    return EXIT_OK


def _load_instance(path):
    try:
        return read_instance(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None


def cmd_solve(args, out) -> int:
    inst = _load_instance(args.instance)
    print(f"method: {args.method}", file=out)
    print(f"n: {inst.n}", file=out)
    if args.method == "dp":
        value, plan = dp_solve(inst)
    elif args.method == "brute":
        try:
            value, plan = brute_force_solve(inst)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        rule = BranchingRule(args.rule, seed=args.seed)
        try:
            dump = open(args.tree_out, "w") if args.tree_out else None
        except OSError as exc:
            raise UsageError(f"cannot write tree dump: {exc}") from None
        try:
            value, plan, tree = solve_bnb(inst, rule, args.selection, node_cap=args.node_cap,
                                          warm_start=not args.cold, dump=dump)
        finally:
            if dump is not None:
                dump.close()
        stats = tree_stats(tree)
        for key in ("nodes", "leaves", "depth"):
            print(f"{key}: {stats[key]}", file=out)
        if not tree.complete:
            print("status: incomplete", file=out)
            return EXIT_INCOMPLETE
        print("status: complete", file=out)
    if value is None:
        print("status: infeasible", file=out)
        return EXIT_INCOMPLETE
    print(f"value: {format_rational(value)}", file=out)
    for line in solution_rows(plan):
        print(line, file=out)
    return EXIT_OK


def cmd_audit(args, out) -> int:
    inst = _load_instance(args.instance)
    try:
        with open(args.tree) as fh:
            tree = read_tree(fh)
    except (OSError, TreeFormatError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read tree dump {args.tree}: {exc}") from None
    if inst != hard_instance(inst.n):
        raise UsageError("audit applies only to the hard instance family")
    if tree.n != inst.n:
        raise UsageError(f"tree is for n={tree.n} but the instance has n={inst.n}")
    try:
        report = audit_tree(tree, inst.n, strict=args.strict)
    except IncompleteTreeError:
        print("error: incomplete tree", file=out)
        return EXIT_INCOMPLETE
    out.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_AUDIT_FAIL


def sweep_row(n: int, rule_kind: str, selection: str, seed: int, node_cap: int,
              timing: bool = False) -> dict:
    """One sweep measurement; failures are recorded, not raised."""
    row = dict.fromkeys(SWEEP_FIELDS, "")
    row.update(n=n, rule=rule_kind, selection=selection, seed=seed, bound=theorem_bound(n))
    start = time.perf_counter()
    try:
        value, _, tree = solve_bnb(hard_instance(n), BranchingRule(rule_kind, seed=seed),
                                   selection, node_cap=node_cap)
        stats = tree_stats(tree)
        row.update(nodes=stats["nodes"], leaves=stats["leaves"], depth=stats["depth"])
        if not tree.complete:
            row["bound_satisfied"] = "incomplete"
        else:
            row["opt"] = format_rational(value)
            report = audit_tree(tree, n)
            row["bound_satisfied"] = str(report.passed and stats["leaves"] >= row["bound"]).lower()
    except Exception as exc:  # noqa: BLE001 - the sweep keeps going
        row["bound_satisfied"] = f"error: {type(exc).__name__}: {exc}"
    if timing:
        row["wall_time_ms"] = int((time.perf_counter() - start) * 1000)
    return row


def _sweep_job(job):
    return sweep_row(*job)


def run_sweep(ns, rules, selections, seeds, node_cap=DEFAULT_NODE_CAP, jobs=1, timing=False) -> str:
    """CSV text for every ``(n, rule, selection, seed)`` combination, in sorted order."""
    combos = [(n, r, s, k, node_cap, timing)
              for n in sorted(set(ns)) for r in rules for s in selections for k in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_job, combos))
    else:
        rows = [_sweep_job(c) for c in combos]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args, out) -> int:
    rules = args.rule or ["most-fractional"]
    selections = args.selection or [BEST_BOUND]
    seeds = args.seed or [1]
    text = run_sweep(args.n, rules, selections, seeds, args.node_cap, args.jobs, args.timing)
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from None
    print(f"wrote {text.count(chr(10)) - 1} rows to {args.out}", file=out)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "audit": cmd_audit, "sweep": cmd_sweep}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
