"""Quick built-in checks: curve identities, enumerator agreement, modulus lattice."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .dissect import BailoutPolicy, generate_solutions
from .enumerators import brute_force, horowitz_sahni, schroeppel_shamir
from .instance import ModularInstance
from .modulus import assign_moduli, lattice_violations
from .tradeoff import F, level, plan_tree, rho, tau

FAULTS = ("tau-coefficient",)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.detail})"


def _faulty_tau(sigma) -> Fraction:
    # slope coefficient off by one, for exercising the failure path
    sigma = Fraction(sigma)
    ell = level(sigma)
    if ell == 0:
        return Fraction(1, 2)
    return 1 - Fraction(1, ell + 1) - Fraction(rho(ell) - 1, ell + 1) * sigma


def curve_suite(tau_fn: Callable = tau) -> SuiteResult:
    anchors = {Fraction(1, 8): Fraction(19, 32), Fraction(1, 7): Fraction(4, 7),
               Fraction(1, 11): Fraction(7, 11), Fraction(1, 16): Fraction(11, 16),
               Fraction(1, 22): Fraction(16, 22), Fraction(1, 4): Fraction(1, 2),
               Fraction(1, 2): Fraction(1, 2), Fraction(1): Fraction(1, 2)}
    bad = [f"tau({s})={tau_fn(s)}" for s, want in anchors.items() if tau_fn(s) != want]
    grid = [Fraction(i, 120) for i in range(1, 121)]
    bad += [f"F({s})!=tau" for s in grid if F(s) != tau_fn(s)]
    return SuiteResult("curve-identity", not bad, "; ".join(bad[:3]) or f"{len(anchors)} anchors, {len(grid)} grid points")


def oracle_suite(seed: int = 0, trials: int = 40) -> SuiteResult:
    rng = random.Random(seed)
    bad = []
    for trial in range(trials):
        n = rng.randint(0, 12)
        items = [rng.randrange(1 << rng.randint(1, 10)) for _ in range(n)]
        M = rng.choice([1 << 40, rng.randint(2, 300)])
        inst = ModularInstance(items, rng.randrange(M), M)
        want = set(brute_force(inst).masks())
        if set(horowitz_sahni(inst).masks()) != want:
            bad.append(f"hs#{trial}")
        if set(schroeppel_shamir(inst).masks()) != want:
            bad.append(f"ss#{trial}")
    for trial, sigma in enumerate([Fraction(1, 5), Fraction(1, 7), Fraction(1, 8)] * 3):
        n = rng.randint(10, 16)
        items = [rng.randrange(1 << n) for _ in range(n)]
        tree = plan_tree(sigma, n)
        assignment = assign_moduli(tree, n, random.Random(rng.getrandbits(64)))
        M = assignment.root_modulus
        inst = ModularInstance(items, rng.randrange(M), M)
        got = list(generate_solutions(inst, tree.root, assignment, BailoutPolicy.disabled(tree)).masks())
        if len(got) != len(set(got)) or set(got) != set(brute_force(inst).masks()):
            bad.append(f"dissect@{sigma}#{trial}")
    return SuiteResult("oracle-equivalence", not bad, ", ".join(bad[:5]) or f"{trials} enumerator and 9 dissection instances")


def lattice_suite(seed: int = 0, draws: int = 25) -> SuiteResult:
    rng = random.Random(seed)
    tree = plan_tree(Fraction(1, 20), 360)
    bad = []
    for i in range(draws):
        problems = lattice_violations(assign_moduli(tree, 360, rng))
        if problems:
            bad.append(f"draw {i}: {problems[0]}")
    return SuiteResult("modulus-lattice", not bad, "; ".join(bad[:3]) or f"{draws} assignments")


def run(fault: Optional[str] = None, seed: int = 0) -> list[SuiteResult]:
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
    tau_fn = _faulty_tau if fault == "tau-coefficient" else tau
    return [curve_suite(tau_fn), oracle_suite(seed), lattice_suite(seed)]
