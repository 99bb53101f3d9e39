"""Splitting the outer s' loop of a dissection across worker processes.

Workers are forked processes.  They share the immutable run description, one
emission counter for the root (so the root threshold holds globally) and a
cancellation flag.  Tables and streams stay private to each worker.
"""

from __future__ import annotations

import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from typing import Optional

from .dissect import BailoutPolicy, RunStats, generate_solutions, threshold
from .instance import Instance, ModularInstance, SolutionStream
from .modulus import ModulusAssignment
from .tradeoff import DissectNode, DissectionTree


class AllocationInfeasible(ValueError):
    pass


@dataclass
class ProcessorAllocation:
    node: DissectNode
    workers: int
    s_prime_shards: tuple[tuple[int, int], ...]
    right_branch_workers: int = 1
    right: Optional["ProcessorAllocation"] = None
    idle_workers: int = 0  # workers a leaf cannot use

    def tasks(self) -> list[dict[str, tuple[int, int]]]:
        """One s'-range restriction per worker task."""
        if self.node.is_leaf:
            return [{}]
        below = self.right.tasks() if self.right is not None else [{}]
        out = []
        for shard in self.s_prime_shards:
            for extra in below:
                task = {self.node.path: shard}
                task.update(extra)
                out.append(task)
        return out


def worker_bound(node: DissectNode) -> int:
    """2^{(2 tau - 1) n} at the node's own sigma and size, rounded to the nearest integer."""
    return max(1, round(2 ** float((2 * node.tau - 1) * node.n)))


def contiguous_shards(total: int, parts: int) -> tuple[tuple[int, int], ...]:
    base, extra = divmod(total, parts)
    shards, lo = [], 0
    for i in range(parts):
        hi = lo + base + (1 if i < extra else 0)
        shards.append((lo, hi))
        lo = hi
    return tuple(shards)


def allocate(tree: DissectionTree, assignment: ModulusAssignment, P: int, *,
             enforce_bound: bool = True) -> ProcessorAllocation:
    if P < 1:
        raise ValueError("P must be >= 1")
    return _allocate(tree.root, assignment, P, enforce_bound)


def _allocate(v: DissectNode, assignment: ModulusAssignment, P: int, enforce: bool) -> ProcessorAllocation:
    if enforce and P > worker_bound(v):
        raise AllocationInfeasible(
            f"{P} workers exceed the bound {worker_bound(v)} at node {v.path or 'root'}")
    if v.is_leaf:
        return ProcessorAllocation(v, 1, (), 1, None, idle_workers=P - 1)
    Mp = assignment.sub_modulus(v)
    if P <= Mp:
        return ProcessorAllocation(v, P, contiguous_shards(Mp, P))
    per_value = math.ceil(P / Mp)
    right = _allocate(v.right, assignment, per_value, enforce)
    return ProcessorAllocation(v, P, contiguous_shards(Mp, Mp), per_value, right)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


@dataclass
class ParallelStats(RunStats):
    workers: int = 1
    worker_peaks: list[int] = field(default_factory=list)
    overshoot: int = 0


# Fork-inherited context; set just before the pool starts.
_CTX: dict = {}


def _init_worker(counter, cancel):
    _CTX["counter"] = counter
    _CTX["cancel"] = cancel


def _run_task(index: int):
    inst, assignment, policy, tasks, root_cap = _CTX["job"]
    counter, cancel = _CTX["counter"], _CTX["cancel"]
    stats = RunStats()
    stream = generate_solutions(inst, assignment.tree.root, assignment, policy, stats,
                                sp_ranges=tasks[index])
    found = []
    overshoot = 0
    for mask in stream.masks():
        with counter.get_lock():
            counter.value += 1
            position = counter.value
        if position > root_cap:
            overshoot += 1
            cancel.set()
            break
        found.append(mask)
        if position == root_cap:
            cancel.set()
            break
        if cancel.is_set():
            break
    stream.close()
    return found, stats, overshoot


def parallel_generate(inst: ModularInstance, tree: DissectionTree, assignment: ModulusAssignment,
                      policy: BailoutPolicy, allocation: ProcessorAllocation,
                      stats: Optional[ParallelStats] = None) -> SolutionStream:
    """Run every task of ``allocation`` and stream the union of their emissions."""
    if stats is None:
        stats = ParallelStats()
    tasks = allocation.tasks()
    stats.workers = allocation.workers
    if allocation.workers == 1 and len(tasks) == 1:
        return generate_solutions(inst, tree.root, assignment, policy, stats)
    root_cap = threshold(tree.root, assignment, policy)
    ctx = mp.get_context("fork")
    counter = ctx.Value("q", 0)
    cancel = ctx.Event()
    _CTX["job"] = (inst, assignment, policy, tasks, root_cap)
    t0 = time.perf_counter_ns()
    masks: list[int] = []
    try:
        with ctx.Pool(min(allocation.workers, len(tasks)), initializer=_init_worker,
                      initargs=(counter, cancel)) as pool:
            for found, part, overshoot in pool.imap_unordered(_run_task, range(len(tasks))):
                masks.extend(found)
                stats.worker_peaks.append(part.peak_table_entries)
                stats.overshoot += overshoot
                part.solutions_emitted = len(found)
                part.wall_time_ns = 0
                stats.absorb(part)
    finally:
        _CTX.pop("job", None)
    stats.wall_time_ns = time.perf_counter_ns() - t0
    if stats.solutions_emitted >= root_cap:
        stats.bailouts_triggered = max(stats.bailouts_triggered, 1)
    return SolutionStream(iter(masks), inst.n)


# ---------------------------------------------------------------------------
# Solver integration: distinct preprocessed instances on distinct workers
# ---------------------------------------------------------------------------


def _solve_chunk(worker: int):
    from .solver import _Collector, _Job, _run_round_robin

    specs, config, original, kept, workers = _CTX["solve"]
    cancel = _CTX["cancel"]
    collector = _Collector(original, kept, config)
    mine = specs[worker::workers]
    jobs = [_Job(out, config.sigma, config, seed) for out, _, seed in mine]
    done = _run_round_robin(jobs, collector, config.slice_budget, stop=cancel.is_set)
    if done and collector.satisfied:
        cancel.set()
    stats = RunStats()
    false_candidates = 0
    for job in jobs:
        stats.absorb(job.stats)
        false_candidates += job.false_candidates
    return [w.mask for w in collector.witnesses], stats, false_candidates


def solve_round_parallel(specs, config, collector, stats: RunStats, report) -> bool:
    """Spread one round's preprocessed instances over ``config.thread_count`` processes."""
    workers = min(config.thread_count, max(1, len(specs)))
    ctx = mp.get_context("fork")
    cancel = ctx.Event()
    _CTX["solve"] = (specs, config, collector.original, collector.kept, workers)
    try:
        with ctx.Pool(workers, initializer=_init_worker, initargs=(ctx.Value("q", 0), cancel)) as pool:
            results = pool.map(_solve_chunk, range(workers))
    finally:
        _CTX.pop("solve", None)
    for masks, part, false_candidates in results:
        stats.absorb(part)
        report.false_candidates += false_candidates
        for full in masks:
            collector.accept_original(full)
    return collector.satisfied
