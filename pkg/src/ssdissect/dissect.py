"""Recursive solution generator over a dissection tree, with join tables and bailouts.

Two engines produce the same streams:

* ``"python"``: nested generators over arbitrary-precision integers.
* ``"kernel"``: the compiled state machine in :mod:`ssdissect._kernel`.
  When the root modulus is too large for machine words, the root join uses
  61-bit fingerprints and every root candidate is re-checked exactly here.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Iterator, Optional

import numpy as np

from . import _kernel as K
from .enumerators import iter_brute_force, iter_schroeppel_shamir, lex_subset_sums, quarter_sizes, MemoryProbe
from .instance import ModularInstance, SolutionStream, subset_sum
from .modulus import ModulusAssignment
from .tradeoff import LEAF_SIZE_FLOOR, DissectNode, DissectionTree

FINGERPRINT_PRIME = (1 << 61) - 1
_WORD_LIMIT = 1 << 62
KERNEL_MAX_N = 62
_UNBOUNDED = 1 << 62


@dataclass(frozen=True)
class BailoutPolicy:
    poly_exponent: int
    k_levels: int
    enabled: bool = True

    @classmethod
    def default(cls, tree: DissectionTree) -> "BailoutPolicy":
        return cls(poly_exponent=tree.k + 1, k_levels=tree.k)

    @classmethod
    def disabled(cls, tree: DissectionTree) -> "BailoutPolicy":
        # n_top^c stays 1 when n_top = 1, so no exponent alone can lift the cap; every
        # threshold becomes 2^n_v instead, which no stream can reach early
        return cls(poly_exponent=64, k_levels=tree.k, enabled=False)


def threshold_value(n_top: int, c: int, n_v: int, M_v: int) -> int:
    expected = max(1, -(-(1 << n_v) // M_v))
    return min(n_top ** c * expected, 1 << n_v)


def threshold(node: DissectNode, assignment: ModulusAssignment, policy: BailoutPolicy) -> int:
    if not policy.enabled:
        return 1 << node.n
    return threshold_value(assignment.tree.n_top, policy.poly_exponent, node.n, assignment.modulus(node))


@dataclass
class RunStats:
    solutions_emitted: int = 0
    bailouts_triggered: int = 0
    peak_table_entries: int = 0
    peak_leaf_entries: int = 0
    wall_time_ns: int = 0
    recursion_depth_reached: int = 0

    def absorb(self, other: "RunStats") -> None:
        """Fold in a run that happened after (or beside) this one."""
        self.solutions_emitted += other.solutions_emitted
        self.bailouts_triggered += other.bailouts_triggered
        self.peak_table_entries = max(self.peak_table_entries, other.peak_table_entries)
        self.peak_leaf_entries = max(self.peak_leaf_entries, other.peak_leaf_entries)
        self.wall_time_ns += other.wall_time_ns
        self.recursion_depth_reached = max(self.recursion_depth_reached, other.recursion_depth_reached)

    def as_row(self) -> dict:
        return asdict(self)


def _leaf_uses_brute_force(node: DissectNode) -> bool:
    return node.n <= LEAF_SIZE_FLOOR


# ---------------------------------------------------------------------------
# Reference engine
# ---------------------------------------------------------------------------


class _RefRun:
    def __init__(self, items, assignment, policy, stats, check, sp_ranges):
        self.items = items
        self.assignment = assignment
        self.policy = policy
        self.stats = stats
        self.check = check
        self.sp_ranges = sp_ranges or {}
        self.current_table = 0
        self.current_leaf = 0

    def _grow_table(self, k):
        self.current_table += k
        self.stats.peak_table_entries = max(self.stats.peak_table_entries, self.current_table)

    def node(self, v: DissectNode, target: int) -> Iterator[int]:
        self.stats.recursion_depth_reached = max(self.stats.recursion_depth_reached, v.depth)
        M = self.assignment.modulus(v)
        cap = threshold(v, self.assignment, self.policy)
        if v.is_leaf:
            yield from self._leaf(v, target, M, cap)
            return
        Mp = self.assignment.sub_modulus(v)
        reduced = {i: self.items[i] % M for i in v.index_range}
        t_sub = target % Mp
        count = 0
        lo, hi = self.sp_ranges.get(v.path, (0, Mp))
        for sp in range(lo, hi):
            table: dict[int, list[int]] = {}
            stored = 0
            try:
                for y in self.node(v.left, sp):
                    key = sum(reduced[i] for i in _bits(y)) % M
                    table.setdefault(key, []).append(y)
                    stored += 1
                    self._grow_table(1)
                for z in self.node(v.right, (t_sub - sp) % Mp):
                    key = (target - sum(reduced[i] for i in _bits(z))) % M
                    for y in table.get(key, ()):
                        x = y | z
                        if self.check:
                            assert subset_sum(self.items, x) % M == target % M, "join broke the congruence"
                        count += 1
                        if count >= cap:
                            self.stats.bailouts_triggered += 1
                        yield x
                        if count >= cap:
                            return
            finally:
                self.current_table -= stored

    def _leaf(self, v, target, M, cap):
        reduced = [a % M for a in self.items[v.lo:v.hi]]
        probe = _LeafProbe(self)
        if _leaf_uses_brute_force(v):
            # the compiled engine keeps the full sorted list of 2^n_v subset sums
            probe.add(1 << v.n)
            source = iter_brute_force(reduced, target, M)
        else:
            source = iter_schroeppel_shamir(reduced, target, M, probe)
        count = 0
        try:
            for local in source:
                count += 1
                if count >= cap:
                    self.stats.bailouts_triggered += 1
                yield local << v.lo
                if count >= cap:
                    return
        finally:
            source.close()
            if _leaf_uses_brute_force(v):
                probe.remove(1 << v.n)


class _LeafProbe(MemoryProbe):
    def __init__(self, run: _RefRun):
        super().__init__()
        self.run = run

    def add(self, k):
        self.run.current_leaf += k
        st = self.run.stats
        st.peak_leaf_entries = max(st.peak_leaf_entries, self.run.current_leaf)

    def remove(self, k):
        self.run.current_leaf -= k


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


# ---------------------------------------------------------------------------
# Compiled engine binding
# ---------------------------------------------------------------------------


def kernel_supported(tree: DissectionTree, assignment: ModulusAssignment) -> bool:
    n = tree.n_top
    if n > KERNEL_MAX_N:
        return False
    root = tree.root
    if root.is_leaf:
        return n * assignment.modulus(root) < _WORD_LIMIT
    return n * assignment.sub_modulus(root) < _WORD_LIMIT


class KernelRun:
    """Flat arrays describing one (instance, tree, assignment, policy) run."""

    def __init__(self, inst: ModularInstance, tree: DissectionTree, assignment: ModulusAssignment,
                 policy: BailoutPolicy, sp_ranges: Optional[dict[str, tuple[int, int]]] = None):
        if not kernel_supported(tree, assignment):
            raise ValueError("instance is outside the compiled engine's word-size limits")
        sp_ranges = sp_ranges or {}
        nodes = tree.nodes()
        index = {id(v): i for i, v in enumerate(nodes)}
        n = tree.n_top
        V = len(nodes)
        items = inst.items
        root = tree.root
        M_root = assignment.modulus(root)
        self.fingerprint = (not root.is_leaf) and n * M_root >= _WORD_LIMIT
        self.n = n
        self.M_root = M_root
        self.inst = inst

        cfg = np.zeros((V, K.NCFG), dtype=np.int64)
        chunks: list[list[int]] = [[0] * K.NSTATS]
        top = K.NSTATS

        def place(values) -> int:
            nonlocal top
            start = top
            values = list(values)
            chunks.append(values)
            top += len(values)
            return start

        sizes = {}
        for v in reversed(nodes):
            sizes[id(v)] = 1 if v.is_leaf else 1 + sizes[id(v.left)] + sizes[id(v.right)]
        for i, v in enumerate(nodes):
            row = cfg[i]
            row[K.C_LO], row[K.C_HI], row[K.C_N] = v.lo, v.hi, v.n
            row[K.C_DEPTH] = v.depth
            row[K.C_SUBEND] = i + sizes[id(v)]
            row[K.C_THR] = min(threshold(v, assignment, policy), _UNBOUNDED)
            M = assignment.modulus(v)
            if v.is_leaf:
                row[K.C_LEFT] = row[K.C_RIGHT] = -1
                row[K.C_MOD] = M
                reduced = [a % M for a in items[v.lo:v.hi]]
                if _leaf_uses_brute_force(v):
                    row[K.C_KIND] = K.KIND_BF
                    sums, masks = lex_subset_sums(reduced)
                    keys = [x % M for x in sums]
                    order = sorted(range(len(keys)), key=keys.__getitem__)
                    row[K.C_BO] = place(keys[o] for o in order)
                    row[K.C_BMASK] = place(masks[o] << v.lo for o in order)
                    row[K.C_BL] = len(order)
                else:
                    row[K.C_KIND] = K.KIND_SS
                    row[K.C_TOTAL] = sum(reduced)
                    q1, q2, q3, q4 = quarter_sizes(v.n)
                    bounds = [0, q1, q1 + q2, q1 + q2 + q3, v.n]
                    quarter_sums, quarter_masks = [], []
                    for qi in range(4):
                        qsums, qmasks = lex_subset_sums(reduced[bounds[qi]:bounds[qi + 1]])
                        shift = v.lo + bounds[qi]
                        if qi in (1, 3):
                            order = sorted(range(len(qsums)), key=qsums.__getitem__)
                            qsums = [qsums[o] for o in order]
                            qmasks = [qmasks[o] for o in order]
                        quarter_sums.append(qsums)
                        quarter_masks.append([m << shift for m in qmasks])
                    flat_sums = [x for part in quarter_sums for x in part]
                    base = place(flat_sums)
                    mask_base = place(m for part in quarter_masks for m in part)
                    row[K.C_QMASK] = mask_base - base
                    pos = base
                    for qi in range(4):
                        row[K.C_Q1O + 2 * qi] = pos
                        row[K.C_Q1L + 2 * qi] = len(quarter_sums[qi])
                        pos += len(quarter_sums[qi])
                    heap = (1 << q1) + (1 << q3)
                    row[K.C_HK] = place([0] * heap)
                    row[K.C_HI] = place([0] * heap)
                    row[K.C_HP] = place([0] * heap)
                    row[K.C_HRSHIFT] = 1 << q1
                    row[K.C_GO] = place([0] * (1 << (q1 + q2)))
                    row[K.C_STATIC] = len(flat_sums) + heap
                    s1, s2, s3, s4 = quarter_sums
                    row[K.C_MINL], row[K.C_MAXL] = min(s1) + s2[0], max(s1) + s2[-1]
                    row[K.C_MINR], row[K.C_MAXR] = min(s3) + s4[0], max(s3) + s4[-1]
            else:
                row[K.C_KIND] = K.KIND_INTERNAL
                row[K.C_LEFT], row[K.C_RIGHT] = index[id(v.left)], index[id(v.right)]
                Mp = assignment.sub_modulus(v)
                row[K.C_SUB] = Mp
                lo, hi = sp_ranges.get(v.path, (0, Mp))
                row[K.C_SPLO], row[K.C_SPHI] = lo, hi
                if v is root and self.fingerprint:
                    q = FINGERPRINT_PRIME
                    inv = pow(M_root % q, -1, q)
                    row[K.C_MOD] = q
                    row[K.C_WIN] = n
                    residues = [(items[j] % M_root) * inv % q if v.lo <= j < v.hi else 0 for j in range(n)]
                else:
                    row[K.C_MOD] = M
                    row[K.C_WIN] = 1
                    residues = [items[j] % M if v.lo <= j < v.hi else 0 for j in range(n)]
                row[K.C_AOFF] = place(residues)
                cap = min(threshold(v.left, assignment, policy), 1 << v.left.n)
                row[K.C_TKEY] = place([0] * cap)
                row[K.C_TMASK] = place([0] * cap)
        cfg[0, K.C_PAUSE] = 1

        mem = np.zeros(top, dtype=np.int64)
        pos = 0
        for part in chunks:
            mem[pos:pos + len(part)] = part
            pos += len(part)
        self.cfg = cfg
        self.st = np.zeros((V, K.NST), dtype=np.int64)
        self.mem = mem
        self.stack = np.zeros(tree.height() + 2, dtype=np.int64)

        t = inst.target % M_root
        if self.fingerprint:
            q = FINGERPRINT_PRIME
            root_target = t * pow(M_root % q, -1, q) % q
        else:
            root_target = t
        tsub = 0 if root.is_leaf else inst.target % assignment.sub_modulus(root)
        K.start_root(root_target, tsub, self.cfg, self.st, self.mem)
        self.done = False
        self.false_candidates = 0

    def step(self, budget: int = _UNBOUNDED) -> int:
        """Advance until a verified emission, the end of the stream, or ``budget`` root s' iterations."""
        while not self.done:
            status = K.run_root(budget, self.cfg, self.st, self.mem, self.stack)
            if status == K.DONE:
                self.done = True
                return status
            if status == K.EMIT and self.fingerprint and not self._exact(self.last_mask):
                self.false_candidates += 1
                continue
            return status
        return K.DONE

    def _exact(self, mask: int) -> bool:
        return subset_sum(self.inst.items, mask) % self.M_root == self.inst.target % self.M_root

    @property
    def last_mask(self) -> int:
        return int(self.st[0, K.S_OUT])

    def fill_stats(self, stats: RunStats) -> None:
        s = self.mem
        stats.solutions_emitted = int(s[K.X_EMIT]) - self.false_candidates
        stats.bailouts_triggered = int(s[K.X_BAIL])
        stats.peak_table_entries = int(s[K.X_PEAKT])
        stats.peak_leaf_entries = int(s[K.X_PEAKL])
        stats.recursion_depth_reached = int(s[K.X_DEPTH])

    def masks(self, stats: Optional[RunStats] = None) -> Iterator[int]:
        while True:
            t0 = time.perf_counter_ns()
            status = self.step()
            if stats is not None:
                stats.wall_time_ns += time.perf_counter_ns() - t0
                self.fill_stats(stats)
            if status != K.EMIT:
                return
            yield self.last_mask


# ---------------------------------------------------------------------------
# Public entry point
# ---------------------------------------------------------------------------


def _timed(source: Iterator[int], stats: RunStats) -> Iterator[int]:
    while True:
        t0 = time.perf_counter_ns()
        x = next(source, None)
        stats.wall_time_ns += time.perf_counter_ns() - t0
        if x is None:
            return
        yield x


def generate_solutions(inst: ModularInstance, node: DissectNode, assignment: ModulusAssignment,
                       policy: BailoutPolicy, stats: Optional[RunStats] = None, *,
                       engine: str = "auto", check: bool = False,
                       sp_ranges: Optional[dict[str, tuple[int, int]]] = None) -> SolutionStream:
    """Stream the solutions of ``inst`` at ``node`` (items indexed from the node's first item).

    ``sp_ranges`` restricts the s' loop of the named nodes (by path) to ``[lo, hi)``.
    ``check`` re-verifies every emission against the node's congruence.
    """
    if stats is None:
        stats = RunStats()
    M = assignment.modulus(node)
    if inst.modulus != M:
        raise ValueError(f"instance modulus {inst.modulus} differs from the node modulus {M}")
    if inst.n != node.n:
        raise ValueError(f"instance has {inst.n} items, node expects {node.n}")
    tree = assignment.tree
    use_kernel = engine == "kernel" or (
        engine == "auto" and node is tree.root and kernel_supported(tree, assignment))
    if use_kernel:
        if node is not tree.root:
            raise ValueError("the compiled engine only runs whole trees")
        run = KernelRun(inst, tree, assignment, policy, sp_ranges)
        source = run.masks(stats)
    elif engine in ("auto", "python"):
        # place the node's items at their global offsets so masks line up with the tree
        padded = (0,) * node.lo + inst.items
        ref = _RefRun(padded, assignment, policy, stats, check, sp_ranges)
        source = _timed((x >> node.lo for x in ref.node(node, inst.target_mod)), stats)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    counted = _count_root(source, stats) if not use_kernel else source
    verify = (lambda m: inst.satisfied_by(m)) if check else None
    return SolutionStream(counted, inst.n, check=verify)


def _count_root(source: Iterator[int], stats: RunStats) -> Iterator[int]:
    for x in source:
        stats.solutions_emitted += 1
        yield x
