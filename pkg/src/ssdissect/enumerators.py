"""Base-case enumerators over modular instances: brute force, Horowitz-Sahni, Schroeppel-Shamir.

The two meet-in-the-middle enumerators reduce every item mod M, after which a
subset solves the modular instance iff its integer sum is t + j*M for some
0 <= j < n.  Those integer targets are handled in increasing j.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .instance import ModularInstance, SolutionStream

BRUTE_FORCE_MAX_N = 32
_CHUNK_BITS = 20
_INT64_LIMIT = 1 << 62


class GuardViolation(ValueError):
    pass


@dataclass
class MemoryProbe:
    """Tracks the simultaneous number of stored sums and heap entries."""

    current: int = 0
    peak: int = 0

    def add(self, k: int) -> None:
        self.current += k
        if self.current > self.peak:
            self.peak = self.current

    def remove(self, k: int) -> None:
        self.current -= k


def lex_subset_sums(values: Sequence[int]) -> tuple[list[int], list[int]]:
    """All subset sums of ``values`` with local masks, in lexicographic order (item 0 slowest)."""
    sums, masks = [0], [0]
    for i in range(len(values) - 1, -1, -1):
        v, bit = values[i], 1 << i
        sums = sums + [s + v for s in sums]
        masks = masks + [m | bit for m in masks]
    return sums, masks


def _lex_arrays(values: Sequence[int], dtype) -> tuple[np.ndarray, np.ndarray]:
    sums = np.zeros(1, dtype=dtype)
    masks = np.zeros(1, dtype=np.int64)
    for i in range(len(values) - 1, -1, -1):
        sums = np.concatenate([sums, sums + values[i]])
        masks = np.concatenate([masks, masks | (1 << i)])
    return sums, masks


def iter_brute_force(reduced: Sequence[int], target: int, modulus: int) -> Iterator[int]:
    """Masks x in lexicographic order with sum(reduced * x) = target (mod modulus)."""
    n = len(reduced)
    if n > BRUTE_FORCE_MAX_N:
        raise GuardViolation(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    target %= modulus
    low = min(n, _CHUNK_BITS)
    high = n - low
    small = n * modulus < _INT64_LIMIT
    dtype = np.int64 if small else object
    low_vals = [int(v) for v in reduced[high:]]
    low_sums, low_masks = _lex_arrays(low_vals, dtype)
    low_masks = low_masks << high
    high_sums, high_masks = lex_subset_sums(list(reduced[:high]))
    for hs, hm in zip(high_sums, high_masks):
        hits = np.nonzero((low_sums + hs) % modulus == target)[0]
        for idx in hits:
            yield hm | int(low_masks[idx])


def brute_force(inst: ModularInstance, cap: Optional[int] = None) -> SolutionStream:
    if inst.n > BRUTE_FORCE_MAX_N:
        raise GuardViolation(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {inst.n}")
    return SolutionStream(iter_brute_force(inst.reduced, inst.target_mod, inst.modulus), inst.n, cap)


def _integer_targets(reduced: Sequence[int], target: int, modulus: int) -> Iterator[int]:
    total = sum(reduced)
    t = target % modulus
    for j in range(max(1, len(reduced))):
        goal = t + j * modulus
        if goal > total:
            return
        yield goal


def iter_horowitz_sahni(reduced: Sequence[int], target: int, modulus: int,
                        probe: Optional[MemoryProbe] = None) -> Iterator[int]:
    n = len(reduced)
    half = n // 2
    left_sums, left_masks = lex_subset_sums(list(reduced[:half]))
    right_sums, right_masks = lex_subset_sums(list(reduced[half:]))
    right_masks = [m << half for m in right_masks]
    lo = sorted(range(len(left_sums)), key=left_sums.__getitem__)
    ro = sorted(range(len(right_sums)), key=right_sums.__getitem__)
    ls = [left_sums[i] for i in lo]
    lm = [left_masks[i] for i in lo]
    rs = [right_sums[i] for i in ro]
    rm = [right_masks[i] for i in ro]
    if probe is not None:
        probe.add(len(ls) + len(rs))
    for goal in _integer_targets(reduced, target, modulus):
        i, k = 0, len(rs) - 1
        while i < len(ls) and k >= 0:
            total = ls[i] + rs[k]
            if total < goal:
                i += 1
            elif total > goal:
                k -= 1
            else:
                i2 = i
                while i2 < len(ls) and ls[i2] == ls[i]:
                    i2 += 1
                k2 = k
                while k2 >= 0 and rs[k2] == rs[k]:
                    k2 -= 1
                for r in range(k, k2, -1):
                    for l in range(i, i2):
                        yield lm[l] | rm[r]
                i, k = i2, k2


def horowitz_sahni(inst: ModularInstance, cap: Optional[int] = None,
                   probe: Optional[MemoryProbe] = None) -> SolutionStream:
    return SolutionStream(iter_horowitz_sahni(inst.reduced, inst.target_mod, inst.modulus, probe),
                          inst.n, cap)


def quarter_sizes(n: int) -> tuple[int, int, int, int]:
    half = n // 2
    q1, q3 = half // 2, (n - half) // 2
    return q1, half - q1, q3, n - half - q3


def _sorted_lists(values: Sequence[int], shift: int) -> tuple[list[int], list[int]]:
    sums, masks = lex_subset_sums(values)
    order = sorted(range(len(sums)), key=sums.__getitem__)
    return [sums[i] for i in order], [masks[i] << shift for i in order]


def iter_schroeppel_shamir(reduced: Sequence[int], target: int, modulus: int,
                           probe: Optional[MemoryProbe] = None) -> Iterator[int]:
    n = len(reduced)
    if n < 4:
        yield from iter_brute_force(reduced, target, modulus)
        return
    q1, q2, q3, q4 = quarter_sizes(n)
    b1, b2, b3 = q1, q1 + q2, q1 + q2 + q3
    s1, m1 = lex_subset_sums(list(reduced[:b1]))
    s2, m2 = _sorted_lists(reduced[b1:b2], b1)
    s3, m3 = lex_subset_sums(list(reduced[b2:b3]))
    m3 = [m << b2 for m in m3]
    s4, m4 = _sorted_lists(reduced[b3:], b3)
    probe = probe if probe is not None else MemoryProbe()
    held = 0

    def hold(k):
        nonlocal held
        held += k
        if k >= 0:
            probe.add(k)
        else:
            probe.remove(-k)

    hold(len(s1) + len(s2) + len(s3) + len(s4))
    last4 = len(s4) - 1
    min_left, max_left = min(s1) + s2[0], max(s1) + s2[-1]
    min_right, max_right = min(s3) + s4[0], max(s3) + s4[-1]
    try:
        for goal in _integer_targets(reduced, target, modulus):
            # left half ascending by (sum, i); right half descending by sum, ascending i.
            # Both heaps start at the first sum that can still pair up with the other side.
            L = []
            for i in range(len(s1)):
                p = bisect_left(s2, goal - max_right - s1[i])
                if p < len(s2):
                    L.append((s1[i] + s2[p], i, p))
            R = []
            for i in range(len(s3)):
                p = bisect_right(s4, goal - min_left - s3[i]) - 1
                if p >= 0:
                    R.append((-(s3[i] + s4[p]), i, p))
            heapq.heapify(L)
            heapq.heapify(R)
            live = len(L) + len(R)
            hold(live)
            while L and R:
                lsum = L[0][0]
                rsum = -R[0][0]
                if lsum + min_right > goal or rsum + max_left < goal:
                    break
                total = lsum + rsum
                if total < goal:
                    _, i, p = heapq.heappop(L)
                    if p + 1 < len(s2):
                        heapq.heappush(L, (s1[i] + s2[p + 1], i, p + 1))
                elif total > goal:
                    _, i, p = heapq.heappop(R)
                    if p > 0:
                        heapq.heappush(R, (-(s3[i] + s4[p - 1]), i, p - 1))
                else:
                    group = []
                    while L and L[0][0] == lsum:
                        _, i, p = heapq.heappop(L)
                        group.append(m1[i] | m2[p])
                        if p + 1 < len(s2):
                            heapq.heappush(L, (s1[i] + s2[p + 1], i, p + 1))
                    hold(len(group))
                    while R and -R[0][0] == rsum:
                        _, i, p = heapq.heappop(R)
                        right = m3[i] | m4[p]
                        if p > 0:
                            heapq.heappush(R, (-(s3[i] + s4[p - 1]), i, p - 1))
                        for left in group:
                            yield left | right
                    hold(-len(group))
            hold(-live)
    finally:
        hold(-held)


def schroeppel_shamir(inst: ModularInstance, cap: Optional[int] = None,
                      probe: Optional[MemoryProbe] = None) -> SolutionStream:
    return SolutionStream(iter_schroeppel_shamir(inst.reduced, inst.target_mod, inst.modulus, probe),
                          inst.n, cap)
