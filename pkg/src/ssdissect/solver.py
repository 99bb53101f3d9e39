"""Top-level Subset Sum driver: preprocess, plan, assign moduli, dissect, verify, repeat."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

from . import _kernel as K
from .dissect import BailoutPolicy, KernelRun, RunStats, generate_solutions, kernel_supported
from .enumerators import MemoryProbe, brute_force, horowitz_sahni, schroeppel_shamir
from .instance import Instance, ModularInstance, SolutionVector, subset_sum
from .modulus import assign_moduli
from .preprocess import IsolationParams, iter_preprocess, normalize_with_map
from .tradeoff import DissectionTree, as_rational, plan_tree

MODES = ("decision", "count_capped")


def default_rounds(n: int) -> int:
    return math.ceil(4 * math.log(max(n, 1))) + 4


@dataclass
class SolverConfig:
    sigma: Fraction = Fraction(1, 4)
    preprocess_rounds: Optional[int] = None  # None: ceil(4 ln n) + 4
    bailout_exponent: Optional[int] = None   # None: k + 1
    rng_seed: int = 0
    thread_count: int = 1
    mode: str = "decision"
    cap: Optional[int] = None                # count_capped: stop after this many witnesses
    slice_budget: int = 32                   # root s' values per round-robin turn
    engine: str = "auto"

    def __post_init__(self):
        self.sigma = as_rational(self.sigma)
        if not 0 < self.sigma <= 1:
            raise ValueError("sigma must lie in (0, 1]")
        if self.preprocess_rounds is not None and self.preprocess_rounds < 1:
            raise ValueError("preprocess_rounds must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if self.slice_budget < 1:
            raise ValueError("slice_budget must be >= 1")

    def rounds_for(self, n: int) -> int:
        return self.preprocess_rounds if self.preprocess_rounds is not None else default_rounds(n)

    def policy_for(self, tree: DissectionTree) -> BailoutPolicy:
        if self.bailout_exponent is None:
            return BailoutPolicy.default(tree)
        return BailoutPolicy(self.bailout_exponent, tree.k)


@dataclass
class SolveReport:
    witness: Optional[SolutionVector]
    stats: RunStats = field(default_factory=RunStats)
    rounds_used: int = 0
    instances_examined: int = 0
    instances_skipped: int = 0
    false_candidates: int = 0
    witnesses: list[SolutionVector] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.witness is not None

    def describe(self) -> str:
        lines = [f"witness: {self.witness if self.found else 'NO-WITNESS'}",
                 f"rounds_used: {self.rounds_used}",
                 f"instances_examined: {self.instances_examined}",
                 f"instances_skipped: {self.instances_skipped}",
                 f"false_candidates: {self.false_candidates}"]
        lines += [f"{k}: {v}" for k, v in self.stats.as_row().items()]
        return "\n".join(lines)


def verify(inst: Instance, x: SolutionVector) -> bool:
    if x.n != inst.n:
        raise ValueError(f"vector has {x.n} entries, instance has {inst.n} items")
    return subset_sum(inst.items, x.mask) == inst.target


def root_bits(n: int, target: int) -> int:
    """max(n, ceil(log2(n * target)))."""
    nt = n * target
    return max(n, (nt - 1).bit_length() if nt > 1 else 0)


# ---------------------------------------------------------------------------
# One dissection run over one preprocessed instance, advanced in slices
# ---------------------------------------------------------------------------


class _Job:
    def __init__(self, inst: Instance, sigma: Fraction, config: SolverConfig, seed: int,
                 sp_ranges: Optional[dict] = None):
        n = inst.n
        self.inst = inst
        self.tree = plan_tree(sigma, n)
        b = root_bits(n, inst.target)
        self.assignment = assign_moduli(self.tree, b, random.Random(seed))
        M = self.assignment.root_modulus
        if M < (1 << n) or M < n * inst.target:
            raise AssertionError("root modulus below max(2^n, n*t)")
        self.policy = config.policy_for(self.tree)
        self.stats = RunStats()
        minst = ModularInstance(inst.items, inst.target % M, M)
        use_kernel = config.engine != "python" and kernel_supported(self.tree, self.assignment)
        self.run: Optional[KernelRun] = None
        self.stream: Optional[Iterator[int]] = None
        if use_kernel:
            self.run = KernelRun(minst, self.tree, self.assignment, self.policy, sp_ranges)
        else:
            self.stream = generate_solutions(minst, self.tree.root, self.assignment, self.policy,
                                             self.stats, engine="python", sp_ranges=sp_ranges).masks()
        self.done = False

    def advance(self, budget: int) -> Iterator[int]:
        """Yield candidate masks found during one turn of about ``budget`` root s' values."""
        if self.run is None:
            x = next(self.stream, None)
            if x is None:
                self.done = True
            else:
                yield x
            return
        t0 = time.perf_counter_ns()
        try:
            while True:
                status = self.run.step(budget)
                if status == K.EMIT:
                    yield self.run.last_mask
                    continue
                if status == K.DONE:
                    self.done = True
                return
        finally:
            self.stats.wall_time_ns += time.perf_counter_ns() - t0
            self.run.fill_stats(self.stats)

    @property
    def false_candidates(self) -> int:
        return self.run.false_candidates if self.run is not None else 0


def _expand(mask: int, kept: tuple[int, ...]) -> int:
    out = 0
    for j, i in enumerate(kept):
        if mask >> j & 1:
            out |= 1 << i
    return out


class _Collector:
    """Double verification and witness bookkeeping shared by serial and parallel drivers."""

    def __init__(self, original: Instance, kept: tuple[int, ...], config: SolverConfig):
        self.original = original
        self.kept = kept
        self.config = config
        self.seen: set[int] = set()
        self.witnesses: list[SolutionVector] = []

    def offer(self, pre: Instance, mask: int) -> bool:
        """Record ``mask`` if it solves both instances; True once the solver should stop."""
        if subset_sum(pre.items, mask) != pre.target:
            return False
        return self.accept_original(_expand(mask, self.kept))

    def accept_original(self, full: int) -> bool:
        x = SolutionVector.from_mask(full, self.original.n)
        if not verify(self.original, x):
            return False
        if full not in self.seen:
            self.seen.add(full)
            self.witnesses.append(x)
        return self.satisfied

    @property
    def satisfied(self) -> bool:
        if self.config.mode == "decision":
            return bool(self.witnesses)
        return self.config.cap is not None and len(self.witnesses) >= self.config.cap


def _round_jobs(norm_inst: Instance, config: SolverConfig, rng: random.Random,
                report: SolveReport) -> Iterator[tuple[Instance, IsolationParams, int]]:
    """Preprocessed instances worth running, each with a seed for its modulus draw."""
    def skipped(count: int) -> None:
        report.instances_skipped += count

    for out, params in iter_preprocess(norm_inst, rng, prune=True, on_skip=skipped):
        yield out, params, rng.getrandbits(64)


def _run_round_robin(jobs: list[_Job], collector: _Collector, budget: int,
                     stop: Optional[Callable[[], bool]] = None) -> bool:
    active = list(jobs)
    while active:
        still = []
        for job in active:
            for mask in job.advance(budget):
                if collector.offer(job.inst, mask):
                    return True
            if stop is not None and stop():
                return True
            if not job.done:
                still.append(job)
        active = still
    return False


def solve(inst: Instance, config: SolverConfig) -> SolveReport:
    """Decide ``inst``; a returned witness always satisfies the original instance exactly."""
    report = SolveReport(witness=None)
    norm = normalize_with_map(inst)
    if norm.trivial:
        if norm.witness is not None:
            x = SolutionVector.from_mask(norm.witness, inst.n)
            assert verify(inst, x)
            report.witness = x
            report.witnesses = [x]
        return report
    work = norm.instance
    collector = _Collector(inst, norm.kept, config)
    rng = random.Random(config.rng_seed)
    rounds = config.rounds_for(work.n)
    stats = RunStats()
    t0 = time.perf_counter_ns()
    for r in range(rounds):
        report.rounds_used = r + 1
        specs = list(_round_jobs(work, config, rng, report))
        report.instances_examined += len(specs)
        if config.thread_count > 1:
            from .parallel import solve_round_parallel
            done = solve_round_parallel(specs, config, collector, stats, report)
        else:
            jobs = [_Job(out, config.sigma, config, seed) for out, _, seed in specs]
            done = _run_round_robin(jobs, collector, config.slice_budget)
            for job in jobs:
                stats.absorb(job.stats)
                report.false_candidates += job.false_candidates
        if done:
            break
    stats.wall_time_ns = time.perf_counter_ns() - t0
    report.stats = stats
    report.witnesses = list(collector.witnesses)
    report.witness = report.witnesses[0] if report.witnesses else None
    return report


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


_BASELINES = {"brute": brute_force, "hs": horowitz_sahni, "ss": schroeppel_shamir}


def solve_baseline(inst: Instance, algorithm: str) -> SolveReport:
    """Plain enumeration over the integers (modulus above every reachable sum)."""
    try:
        enumerate_ = _BASELINES[algorithm]
    except KeyError:
        raise ValueError(f"unknown baseline {algorithm!r}; choose from {sorted(_BASELINES)}") from None
    M = max(inst.n * inst.target, sum(inst.items), inst.target) + 1
    minst = ModularInstance(inst.items, inst.target, M)
    stats = RunStats()
    t0 = time.perf_counter_ns()
    if algorithm == "brute":
        stream = enumerate_(minst)
    else:
        probe = MemoryProbe()
        stream = enumerate_(minst, probe=probe)
    mask = stream.next_mask()
    stream.close()
    stats.wall_time_ns = time.perf_counter_ns() - t0
    if algorithm == "brute":
        # the brute-force scan keeps one chunk of low-item sums in memory
        stats.peak_table_entries = 1 << min(inst.n, 20)
    else:
        stats.peak_table_entries = probe.peak
    report = SolveReport(witness=None, stats=stats, rounds_used=1, instances_examined=1)
    if mask is not None:
        x = SolutionVector.from_mask(mask, inst.n)
        assert verify(inst, x)
        report.witness = x
        report.witnesses = [x]
        stats.solutions_emitted = 1
    return report

