"""Primality helpers and the random modulus lattice attached to a dissection tree."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .tradeoff import DissectNode, DissectionTree

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)

# Deterministic witness set for n < 3.3e24 (covers all 64-bit inputs).
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_DETERMINISTIC_LIMIT = 3317044064679887385961981

# Each random round errs with probability <= 1/4; 40 rounds give < 2^-80.
_RANDOM_ROUNDS = 40


class SamplingExhausted(RuntimeError):
    """Rejection sampling for a prime ran out of attempts."""


def _miller_rabin_round(n: int, d: int, r: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(x: int) -> bool:
    """Deterministic below 3.3e24, Miller-Rabin with error < 2^-80 above."""
    if x < 2:
        return False
    for p in _SMALL_PRIMES:
        if x % p == 0:
            return x == p
    d, r = x - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    if x < _DETERMINISTIC_LIMIT:
        bases = _DETERMINISTIC_BASES
    else:
        # Bases come from a private generator so callers' streams are untouched.
        local = random.Random(x)
        bases = [local.randrange(2, x - 1) for _ in range(_RANDOM_ROUNDS)]
    return all(_miller_rabin_round(x, d, r, a) for a in bases)


def next_prime(x: int) -> int:
    """Smallest prime >= x."""
    candidate = max(2, x)
    while not is_prime(candidate):
        candidate += 1
    return candidate


@dataclass(frozen=True)
class PrimeSample:
    value: int
    lo: int
    hi: int
    role: str  # "level_prime(i)" or "root_booster"


def random_prime(lo: int, hi: int, rng: random.Random, *, role: str = "",
                 max_attempts: Optional[int] = None) -> PrimeSample:
    """Draw uniform integers from [lo, hi] until one is prime."""
    if lo < 2 or hi < lo:
        raise ValueError(f"need hi >= lo >= 2, got [{lo}, {hi}]")
    if max_attempts is None:
        max_attempts = 64 * hi.bit_length()
    for _ in range(max_attempts):
        candidate = rng.randint(lo, hi)
        if is_prime(candidate):
            return PrimeSample(candidate, lo, hi, role)
    raise SamplingExhausted(f"no prime found in [{lo}, {hi}] after {max_attempts} draws")


def split_rng(rng: random.Random, count: int) -> list[random.Random]:
    """Derive ``count`` independent generators from ``rng``."""
    return [random.Random(rng.getrandbits(128)) for _ in range(count)]


@dataclass(eq=False)
class ModulusAssignment:
    tree: DissectionTree
    b: int
    level_primes: tuple[PrimeSample, ...]
    root_booster: PrimeSample
    exponents: tuple[int, ...]
    M: dict[int, int] = field(default_factory=dict)        # id(node) -> M_v
    M_prime: dict[int, int] = field(default_factory=dict)  # id(node) -> M'_v

    def modulus(self, node: DissectNode) -> int:
        return self.M[id(node)]

    def sub_modulus(self, node: DissectNode) -> int:
        return self.M_prime[id(node)]

    @property
    def root_modulus(self) -> int:
        return self.M[id(self.tree.root)]

    def rows(self) -> list[tuple[str, Fraction, int, int]]:
        """(path, gamma, bitlength M'_v, bitlength M_v) per node carrying a modulus."""
        out = []
        for v in self.tree.nodes():
            if id(v) in self.M:
                out.append((v.path or "root", v.gamma,
                            self.M_prime.get(id(v), 1).bit_length(), self.M[id(v)].bit_length()))
        return out


def level_exponent(delta: Fraction, n: int) -> int:
    return max(2, math.ceil(delta * n))


def assign_moduli(tree: DissectionTree, b: int, rng: random.Random) -> ModulusAssignment:
    """Sample the per-node moduli so that M'_v | M_v, M_child = M'_parent and M_root >= 2^b."""
    if b < 1:
        raise ValueError("b must be positive")
    n = tree.n_top
    exponents = tuple(level_exponent(d, n) for d in tree.deltas)
    primes = tuple(
        random_prime(1 << e, 2 << e, rng, role=f"level_prime({i + 1})")
        for i, e in enumerate(exponents)
    )
    prefix = [1]
    for p in primes:
        prefix.append(prefix[-1] * p.value)

    M: dict[int, int] = {}
    M_prime: dict[int, int] = {}
    for v in tree.root.internal_nodes():
        M_prime[id(v)] = prefix[tree.level_index(v)]
    root = tree.root
    root_sub = M_prime.get(id(root), 1)
    # p0 >= 2^e0 and M'_root >= 2^(bitlen-1) give M_root >= 2^b.
    e0 = max(1, b + 1 - root_sub.bit_length())
    booster = random_prime(1 << e0, 2 << e0, rng, role="root_booster")
    M[id(root)] = booster.value * root_sub
    for v in root.internal_nodes():
        for child in (v.left, v.right):
            M[id(child)] = M_prime[id(v)]
    assignment = ModulusAssignment(tree=tree, b=b, level_primes=primes, root_booster=booster,
                                   exponents=exponents, M=M, M_prime=M_prime)
    problems = lattice_violations(assignment, check_window=False)
    if problems:
        raise AssertionError("modulus construction broke the lattice: " + "; ".join(problems))
    return assignment


def lattice_violations(assignment: ModulusAssignment, *, check_window: bool = True) -> list[str]:
    """Check divisibility, parent rule, root size and (optionally) magnitude windows."""
    tree = assignment.tree
    n, k = tree.n_top, tree.k
    problems = []
    root = tree.root
    if assignment.root_modulus < (1 << assignment.b):
        problems.append(f"M_root has {assignment.root_modulus.bit_length()} bits < b={assignment.b}")
    for v in root.internal_nodes():
        Mv, Mpv = assignment.M[id(v)], assignment.M_prime[id(v)]
        name = v.path or "root"
        if Mv % Mpv:
            problems.append(f"{name}: M' does not divide M")
        for child in (v.left, v.right):
            if assignment.M.get(id(child)) != Mpv:
                problems.append(f"{child.path}: M_child != M'_parent")
        if check_window:
            lo_exp = math.floor(v.gamma * n)
            hi_exp = k + math.ceil(v.gamma * n)
            if not ((1 << lo_exp) <= Mpv <= (1 << hi_exp)):
                problems.append(f"{name}: M'={Mpv} outside [2^{lo_exp}, 2^{hi_exp}]")
    return problems


def divisor_hit_probability_estimate(assignment: ModulusAssignment, Z_bits: int,
                                     node: Optional[DissectNode] = None,
                                     *, k: Optional[int] = None, n: Optional[int] = None,
                                     M_prime: Optional[int] = None) -> Fraction:
    """Analytical bound n^k / M'_v (capped at 1) on Pr[M'_v | Z] for a fixed Z <= 2^Z_bits.

    ``k``, ``n`` and ``M_prime`` override the values read from the assignment.
    """
    if Z_bits < 1:
        raise ValueError("Z_bits must be positive")
    if assignment is not None:
        node = node if node is not None else assignment.tree.root
        k = assignment.tree.k if k is None else k
        n = assignment.tree.n_top if n is None else n
        if M_prime is None:
            M_prime = assignment.M_prime.get(id(node), 1)
    return min(Fraction(1), Fraction(n ** k, M_prime))
