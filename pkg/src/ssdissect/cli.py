"""Command-line entry point: gen, plan, curve, solve, bench, selftest."""

from __future__ import annotations

import argparse
import csv
import os
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .instance import Instance, InstanceFormatError, SolutionVector, read_instance, render_instance
from .modulus import assign_moduli
from .solver import SolveReport, SolverConfig, solve, solve_baseline
from .tradeoff import curve_point, parse_sigma, plan_tree, schroeppel_shamir_tau, tau

KINDS = ("uniform", "planted", "all-equal", "parity-no")
ALGORITHMS = ("dissect", "brute", "hs", "ss")
BENCH_COLUMNS = ("n", "sigma", "tau_predicted", "algorithm", "seed", "wall_time_ns",
                 "peak_table_entries", "solutions_found", "bailouts", "witness_found")
CURVE_COLUMNS = ("sigma_num", "sigma_den", "tau_num", "tau_den", "tau_float",
                 "tau_ss_num", "tau_ss_den", "tau_ss_float")

EXIT_WITNESS, EXIT_NONE, EXIT_ERROR = 0, 1, 2


def default_seed() -> int:
    return int(os.environ.get("DISSECT_SEED", "0"))


def generate(kind: str, n: int, bits: int, seed: int) -> tuple[Instance, Optional[SolutionVector]]:
    if n < 1 or bits < 1:
        raise ValueError("n and bits must be >= 1")
    rng = random.Random(seed)
    if kind == "all-equal":
        return Instance([1] * n, n // 2), None
    if kind == "parity-no":
        items = [2 * rng.randrange(1 << (bits - 1)) for _ in range(n)]
        mask = rng.getrandbits(n)
        # an even subset sum plus one: odd, so unreachable, but in the plausible range
        return Instance(items, sum(a for i, a in enumerate(items) if mask >> i & 1) + 1), None
    items = [rng.randrange(1 << bits) for _ in range(n)]
    if kind == "uniform":
        return Instance(items, rng.randrange(sum(items) + 1)), None
    if kind == "planted":
        mask = rng.getrandbits(n)
        witness = SolutionVector.from_mask(mask, n)
        return Instance(items, sum(a for i, a in enumerate(items) if mask >> i & 1)), witness
    raise ValueError(f"unknown kind {kind!r}")


def cmd_gen(args) -> int:
    inst, witness = generate(args.kind, args.n, args.bits if args.bits else args.n, _seed(args))
    text = render_instance(inst, witness)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_plan(args) -> int:
    sigma = parse_sigma(args.sigma)
    tree = plan_tree(sigma, args.n)
    header = ("path", "sigma", "tau", "alpha", "beta", "gamma", "n")
    rows = [(v.path or "root", v.sigma, v.tau, v.alpha, v.beta, v.gamma, v.n) for v in tree.nodes()]
    _print_table(header, rows)
    assignment = assign_moduli(tree, args.n, random.Random(_seed(args)))
    print()
    _print_table(("path", "gamma", "bits(M')", "bits(M)"), assignment.rows())
    return 0


def _print_table(header, rows) -> None:
    cells = [tuple(str(c) for c in header)] + [tuple(str(c) for c in row) for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())


def curve_rows(grid: int) -> list[tuple]:
    rows = []
    for i in range(1, grid + 1):
        s = Fraction(i, grid)
        t, ss = tau(s), schroeppel_shamir_tau(s)
        rows.append((s.numerator, s.denominator, t.numerator, t.denominator, f"{float(t):.12g}",
                     ss.numerator, ss.denominator, f"{float(ss):.12g}"))
    return rows


def cmd_curve(args) -> int:
    if args.grid < 2:
        raise ValueError("--grid must be >= 2")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    writer.writerows(curve_rows(args.grid))
    return 0


def bench_row(n: int, sigma: Fraction, algorithm: str, seed: int, report: SolveReport) -> dict:
    return {
        "n": n,
        "sigma": f"{sigma.numerator}/{sigma.denominator}",
        "tau_predicted": str(tau(sigma)),
        "algorithm": algorithm,
        "seed": seed,
        "wall_time_ns": report.stats.wall_time_ns,
        "peak_table_entries": report.stats.peak_table_entries,
        "solutions_found": len(report.witnesses),
        "bailouts": report.stats.bailouts_triggered,
        "witness_found": int(report.found),
    }


def _append_rows(path: str, rows: list[dict]) -> None:
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        if fresh:
            writer.writeheader()
        writer.writerows(rows)


def run_one(inst: Instance, algorithm: str, sigma: Fraction, seed: int, rounds: Optional[int],
            threads: int) -> SolveReport:
    if algorithm == "dissect":
        config = SolverConfig(sigma=sigma, preprocess_rounds=rounds, rng_seed=seed, thread_count=threads)
        return solve(inst, config)
    return solve_baseline(inst, algorithm)


def cmd_solve(args) -> int:
    try:
        inst, _ = read_instance(args.instance)
        sigma = parse_sigma(args.sigma)
    except (OSError, InstanceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    seed = _seed(args)
    report = run_one(inst, args.algorithm, sigma, seed, args.preprocess_rounds, args.threads)
    print(str(report.witness) if report.found else "NO-WITNESS")
    if args.verbose:
        print(report.describe(), file=sys.stderr)
    if args.stats_out:
        name = args.algorithm if args.threads == 1 else f"{args.algorithm}@P{args.threads}"
        _append_rows(args.stats_out, [bench_row(inst.n, sigma, name, seed, report)])
    return EXIT_WITNESS if report.found else EXIT_NONE


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def bench(sigmas: Sequence[Fraction], ns: Sequence[int], seeds: int, threads_grid: Sequence[int],
          rounds: Optional[int] = None, kinds: Sequence[str] = ("planted", "parity-no")) -> list[dict]:
    rows = []
    for sigma in sigmas:
        for n in ns:
            for seed in range(seeds):
                for kind in kinds:
                    inst, _ = generate(kind, n, n, seed)
                    for threads in threads_grid:
                        name = "dissect" if threads == 1 else f"dissect@P{threads}"
                        report = run_one(inst, "dissect", sigma, seed, rounds, threads)
                        rows.append(bench_row(n, sigma, name, seed, report))
    return rows


def cmd_bench(args) -> int:
    sigmas = [parse_sigma(s) for s in args.sigma_list.split(",") if s.strip()]
    ns = _int_list(args.n_list)
    threads = _int_list(args.threads_grid)
    if not sigmas or not ns or not threads or args.seeds < 1:
        raise ValueError("bench grids must be non-empty")
    rows = bench(sigmas, ns, args.seeds, threads, args.preprocess_rounds)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return 0


def cmd_selftest(args) -> int:
    from . import selftest

    results = selftest.run(fault=args.inject_fault, seed=_seed(args))
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print("selftest: " + ("FAIL " + ",".join(failed) if failed else "PASS"))
    return 1 if failed else 0


def _seed(args) -> int:
    return args.seed if getattr(args, "seed", None) is not None else default_seed()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssdissect", description="Subset Sum by dissection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bits", type=int, default=None, help="item bit width (default: n)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--kind", choices=KINDS, default="uniform")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="print the dissection tree and modulus sizes")
    p.add_argument("--sigma", required=True)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("curve", help="emit the tradeoff curve as CSV")
    p.add_argument("--grid", type=int, default=100)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--sigma", default="1/8")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="dissect")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--preprocess-rounds", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--stats-out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a planted/parity-no grid and write CSV rows")
    p.add_argument("--sigma-list", default="1/7")
    p.add_argument("--n-list", default="16,20,24")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--threads-grid", default="1")
    p.add_argument("--preprocess-rounds", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="run the built-in check suites")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--inject-fault", default=None, help="deliberately break one suite (tau-coefficient)")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
