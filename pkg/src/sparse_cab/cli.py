"""Command-line entry point.

Exit codes: 0 success, 2 invalid configuration, 3 infeasible (arm or
verification cap exceeded), 4 failed check (``slope --assert``
out of range, or an unsatisfied family in ``family verify``).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .errors import ArmCapExceededError, BudgetExceededError, CabError, InvalidArgumentsError
from .partition_family import PartitionFamily, build_random_family, verify_partition_assumption

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_ASSERT = 0, 2, 3, 4


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentsError(f"cannot read {path}: {exc}") from exc


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _configs(doc) -> list[dict]:
    if isinstance(doc, list):
        return doc
    if isinstance(doc, dict) and "configs" in doc:
        return list(doc["configs"])
    return [doc]


def cmd_family_build(args) -> int:
    fam = build_random_family(args.d, args.k, args.m, seed=args.seed)
    if args.out:
        fam.save(args.out)
    else:
        _emit(fam.to_dict(), None)
    print(f"built {len(fam)} partitions of d={fam.d} into k={fam.k} blocks", file=sys.stderr)
    return EXIT_OK


def cmd_family_verify(args) -> int:
    fam = PartitionFamily.from_dict(_load_json(args.input))
    report = verify_partition_assumption(fam, sample=args.sample, seed=args.seed, cap=args.cap)
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.satisfied else EXIT_ASSERT


def cmd_run(args) -> int:
    doc = _load_json(args.config)
    trace = harness.run_config(doc, args.seed, args.rounds)
    if args.out:
        trace.write_csv(args.out)
    else:
        sys.stdout.write(trace.to_csv())
    return EXIT_OK


def cmd_sweep(args) -> int:
    configs = _configs(_load_json(args.config))
    checkpoints = [int(c) for c in args.checkpoints] if args.checkpoints else list(harness.DEFAULT_CHECKPOINTS)
    rounds = args.rounds or max(checkpoints)
    for doc in configs:
        harness.build_run(doc, 0, rounds)  # validate before spending time
    cells = harness.run_sweep(
        configs, harness.parse_seed_range(args.seeds), checkpoints, rounds=rounds, parallelism=args.parallelism
    )
    summaries = harness.summarize(configs, cells)
    _emit(summaries[0] if len(summaries) == 1 else {"summaries": summaries}, args.out)
    if args.csv:
        Path(args.csv).write_text(harness.cells_to_csv(cells))
    return EXIT_OK


def cmd_slope(args) -> int:
    doc = _load_json(args.input)
    summaries = doc["summaries"] if "summaries" in doc else [doc]
    status = EXIT_OK
    for s in summaries:
        fit = harness.fit_slope(s["checkpoints"], s["mean_regret"], s.get("theory_exponent"))
        line = f"{s.get('name', 'config')}: slope={fit.slope:.4f} theory={fit.theory_exponent}"
        if args.assert_range:
            lo, hi = args.assert_range
            ok = lo <= fit.slope <= hi
            line += f" range=[{lo}, {hi}] {'PASS' if ok else 'FAIL'}"
            if not ok:
                status = EXIT_ASSERT
        print(line)
    return status


def cmd_lower_bound(args) -> int:
    report = harness.lower_bound_experiment(args.d, args.rounds, harness.parse_seed_range(args.seeds))
    _emit(report, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparse-cab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    fam = sub.add_parser("family", help="build or verify partition families")
    fsub = fam.add_subparsers(dest="family_command", required=True)
    b = fsub.add_parser("build")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--m", type=int, default=None, help="family size (default: minimum size)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_family_build)
    v = fsub.add_parser("verify")
    v.add_argument("--in", dest="input", required=True)
    mode = v.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="check every k-tuple (default)")
    mode.add_argument("--sample", type=int, default=None, metavar="N")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cap", type=int, default=10**6)
    v.add_argument("--out")
    v.set_defaults(func=cmd_family_verify)

    r = sub.add_parser("run", help="run CAB once and write a per-round trace CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--rounds", type=int, required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run configs x seeds and fit regret slopes")
    s.add_argument("--config", required=True)
    s.add_argument("--seeds", default="0..19", help="a..b (inclusive) or a,b,c")
    s.add_argument("--checkpoints", nargs="+", type=int)
    s.add_argument("--rounds", type=int)
    s.add_argument("--parallelism", type=int, default=1)
    s.add_argument("--out")
    s.add_argument("--csv", help="also write per-seed checkpoint regret here")
    s.set_defaults(func=cmd_sweep)

    sl = sub.add_parser("slope", help="refit slopes from a sweep summary")
    sl.add_argument("--in", dest="input", required=True)
    sl.add_argument("--assert", dest="assert_range", nargs=2, type=float, metavar=("LO", "HI"))
    sl.set_defaults(func=cmd_slope)

    lb = sub.add_parser("lower-bound", help="diagonal player versus the two-block adversary")
    lb.add_argument("--d", type=int, required=True)
    lb.add_argument("--rounds", type=int, required=True)
    lb.add_argument("--seeds", default="0..19")
    lb.add_argument("--out")
    lb.set_defaults(func=cmd_lower_bound)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ArmCapExceededError, BudgetExceededError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvalidArgumentsError, KeyError, TypeError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
