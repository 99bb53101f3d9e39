import random

import pytest

from conftest import brute_solutions
from ssdissect.enumerators import (
    GuardViolation, MemoryProbe, brute_force, horowitz_sahni, iter_schroeppel_shamir, lex_subset_sums,
    quarter_sizes, schroeppel_shamir,
)
from ssdissect.instance import ModularInstance


def strings(stream, n):
    return {format_mask(m, n) for m in stream.masks()}


def format_mask(mask, n):
    return "".join(str(mask >> i & 1) for i in range(n))


def test_brute_force_examples():
    assert strings(brute_force(ModularInstance((1, 2, 3), 3, 10 ** 9)), 3) == {"110", "001"}
    assert [m for m in brute_force(ModularInstance((), 0, 7)).masks()] == [0]
    assert strings(brute_force(ModularInstance((5, 7), 2, 5)), 2) == {"01", "11"}


def test_brute_force_guard():
    with pytest.raises(GuardViolation):
        brute_force(ModularInstance(tuple(range(33)), 1, 1000))


def test_brute_force_lexicographic_order():
    masks = list(brute_force(ModularInstance((1, 1, 1, 1), 2, 1 << 40)).masks())
    as_text = [format_mask(m, 4) for m in masks]
    assert as_text == sorted(as_text)


def test_brute_force_large_modulus_uses_exact_arithmetic():
    M = (1 << 70) + 25
    items = (M - 1, M - 2, 3, (1 << 69))
    inst = ModularInstance(items, 0, M)
    assert set(brute_force(inst).masks()) == brute_solutions(items, 0, M)


def test_horowitz_sahni_examples():
    inst = ModularInstance((3, 5, 8, 9), 17, 1 << 40)
    assert set(horowitz_sahni(inst).masks()) == set(brute_force(inst).masks()) == {0b1100, 0b1011}
    ones = ModularInstance((1, 1, 1, 1), 2, 1 << 40)
    assert len(set(horowitz_sahni(ones).masks())) == 6
    capped = horowitz_sahni(ones, cap=1)
    assert len(list(capped.masks())) == 1


def test_schroeppel_shamir_examples():
    inst = ModularInstance(tuple(range(1, 9)), 12, 1 << 50)
    assert set(schroeppel_shamir(inst).masks()) == brute_solutions(inst.items, 12)
    zeros = ModularInstance((0,) * 8, 0, 7)
    stream = schroeppel_shamir(zeros, cap=10)
    got = list(stream.masks())
    assert len(got) == 10 == len(set(got))
    assert list(schroeppel_shamir(ModularInstance((2, 4, 6, 8), 1, 2)).masks()) == []


def test_quarter_sizes():
    assert quarter_sizes(9) == (2, 2, 2, 3)
    for n in range(4, 40):
        q = quarter_sizes(n)
        assert sum(q) == n and max(q) - min(q) <= 1


def test_lex_subset_sums():
    sums, masks = lex_subset_sums([1, 2, 4])
    assert sums == [0, 4, 2, 6, 1, 5, 3, 7]
    assert all(s == sum(v for i, v in enumerate([1, 2, 4]) if m >> i & 1) for s, m in zip(sums, masks))


def test_small_n_delegates():
    for n in range(4):
        items = tuple(range(1, n + 1))
        inst = ModularInstance(items, 3, 100)
        assert set(schroeppel_shamir(inst).masks()) == brute_solutions(items, 3, 100)


@pytest.mark.parametrize("seed", range(6))
def test_random_agreement(seed):
    rng = random.Random(seed)
    for _ in range(25):
        n = rng.randint(0, 14)
        items = tuple(rng.randrange(1 << rng.randint(1, 12)) for _ in range(n))
        M = rng.choice([1 << 45, rng.randint(1, 50), rng.randint(100, 5000)])
        inst = ModularInstance(items, rng.randrange(M), M)
        want = brute_solutions(items, inst.target, M)
        for fn in (brute_force, horowitz_sahni, schroeppel_shamir):
            got = list(fn(inst).masks())
            assert len(got) == len(set(got)) and set(got) == want, fn.__name__


def test_streams_are_restartable():
    inst = ModularInstance(tuple(range(3, 17)), 40, 1 << 40)
    assert list(schroeppel_shamir(inst).masks()) == list(schroeppel_shamir(inst).masks())


def test_schroeppel_shamir_memory_scaling():
    ratios = []
    for n in (12, 16, 20, 24):
        rng = random.Random(n)
        items = [rng.randrange(1 << n) for _ in range(n)]
        probe = MemoryProbe()
        for _ in iter_schroeppel_shamir(items, sum(items) // 2, 1 << 60, probe):
            pass
        assert probe.current == 0
        ratios.append(probe.peak / (2 ** (n / 4) * n))
    assert max(ratios) <= 1.0


def test_horowitz_sahni_memory_probe():
    probe = MemoryProbe()
    list(horowitz_sahni(ModularInstance(tuple(range(10)), 9, 1 << 40), probe=probe).masks())
    assert probe.peak == 2 * 32
