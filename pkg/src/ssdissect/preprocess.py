"""Two-stage randomized preprocessing: shrink the numbers, then isolate a few solutions.

Stage 1 reduces everything modulo a random prime with 3n+1 bits and guesses the
multiple of that prime hit by the true sum.  Stage 2 appends a random weight layer
in base ``n*t + 1`` so that only solutions with a guessed weighted sum survive.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .instance import Instance, subset_sum
from .modulus import next_prime, random_prime


@dataclass(frozen=True)
class IsolationParams:
    stage1_prime: int
    stage1_multiple: int
    stage2_guess: int
    stage2_prime: int
    weights: tuple[int, ...]
    offset: int
    multiple_guess: int


@dataclass(frozen=True)
class Normalized:
    """Result of :func:`normalize_with_map`.

    ``kept[i]`` is the original index of item ``i``.  When the exhaustive guard
    fired, ``trivial`` is True and ``witness`` holds an original-index mask (or None).
    """

    instance: Instance
    kept: tuple[int, ...]
    trivial: bool = False
    witness: Optional[int] = None


TRIVIAL_YES = Instance((), 0)
TRIVIAL_NO = Instance((), 1)


def _guard_fires(n: int, t: int) -> bool:
    """ln(n * t) > 2^n, with n the item count before dropping; an empty instance is always trivial."""
    if n == 0:
        return True
    if n >= 64 or n * t <= 1:
        return False
    return math.log(n * t) > (1 << n)


def normalize_with_map(inst: Instance) -> Normalized:
    kept = tuple(i for i, a in enumerate(inst.items) if a <= inst.target)
    items = tuple(inst.items[i] for i in kept)
    t = inst.target
    if not _guard_fires(inst.n, t):
        return Normalized(Instance(items, t), kept)
    for mask in range(1 << len(items)):
        if subset_sum(items, mask) == t:
            original = 0
            for j, i in enumerate(kept):
                if mask >> j & 1:
                    original |= 1 << i
            return Normalized(TRIVIAL_YES, (), True, original)
    return Normalized(TRIVIAL_NO, (), True, None)


def normalize(inst: Instance) -> Instance:
    return normalize_with_map(inst).instance


def stage1_prime(n: int, rng: random.Random) -> int:
    return random_prime(1 << (3 * n), (1 << (3 * n + 1)) - 1, rng, role="stage1").value


def stage1(inst: Instance, rng: random.Random, prime: Optional[int] = None) -> list[Instance]:
    n = inst.n
    P = stage1_prime(n, rng) if prime is None else prime
    items = tuple(a % P for a in inst.items)
    base = inst.target % P
    return [Instance(items, base + k * P) for k in range(n)]


def stage2_prime(s: int) -> int:
    return next_prime(1 << s)


def lift(inst: Instance, weights: tuple[int, ...], offset: int, P2: int, k: int) -> Instance:
    B = inst.n * inst.target + 1
    items = tuple(a + B * r for a, r in zip(inst.items, weights))
    return Instance(items, inst.target + B * (offset + P2 * k))


def iter_stage2(inst: Instance, rng: random.Random) -> Iterator[tuple[Instance, int, int, tuple[int, ...], int, int]]:
    """Yield ``(output, s, P2, weights, offset, k)`` for all n^2 guesses."""
    n = inst.n
    for s in range(n):
        P2 = stage2_prime(s)
        weights = tuple(rng.randrange(P2) for _ in range(n))
        offset = rng.randrange(P2)
        for k in range(n):
            yield lift(inst, weights, offset, P2, k), s, P2, weights, offset, k


def stage2(inst: Instance, rng: random.Random) -> list[Instance]:
    return [out for out, *_ in iter_stage2(inst, rng)]


def size_bound_holds(output: Instance, stage1_target: int) -> bool:
    n = output.n
    return output.target.bit_length() <= 3 * n + 2 + (n * stage1_target).bit_length()


def iter_preprocess(inst: Instance, rng: random.Random, *, prune: bool = False,
                    on_skip: Optional[Callable[[int], None]] = None) -> Iterator[tuple[Instance, IsolationParams]]:
    """Lazily produce the (up to n^3) preprocessed instances with their parameters.

    ``inst`` must already be normalized.  With ``prune``, outputs whose target exceeds
    the sum of all their items are dropped (a stage-1 output failing that test takes
    its n^2 lifts with it); ``on_skip`` receives the number dropped each time.
    """
    P1 = stage1_prime(inst.n, rng)
    for j, mid in enumerate(stage1(inst, rng, prime=P1)):
        if prune and surely_unsolvable(mid):
            if on_skip is not None:
                on_skip(inst.n * inst.n)
            continue
        for out, s, P2, weights, offset, k in iter_stage2(mid, rng):
            if not size_bound_holds(out, mid.target):
                raise AssertionError("preprocessed target exceeds its size bound")
            if prune and surely_unsolvable(out):
                if on_skip is not None:
                    on_skip(1)
                continue
            yield out, IsolationParams(P1, j, s, P2, weights, offset, k)


def preprocess(inst: Instance, rng: random.Random) -> list[Instance]:
    norm = normalize_with_map(inst)
    if norm.trivial:
        return [norm.instance]
    return [out for out, _ in iter_preprocess(norm.instance, rng)]


def surely_unsolvable(inst: Instance) -> bool:
    """True when no subset can reach the target because all items together fall short."""
    return inst.target > sum(inst.items)
