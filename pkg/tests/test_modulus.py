import random
from fractions import Fraction as Fr

import pytest

from ssdissect.modulus import (
    SamplingExhausted, assign_moduli, divisor_hit_probability_estimate, is_prime, lattice_violations,
    level_exponent, next_prime, random_prime, split_rng,
)
from ssdissect.tradeoff import plan_tree


def sieve(limit):
    flags = [True] * (limit + 1)
    flags[0] = flags[1] = False
    for i in range(2, int(limit ** 0.5) + 1):
        if flags[i]:
            flags[i * i::i] = [False] * len(flags[i * i::i])
    return flags


def test_is_prime_examples():
    assert is_prime(2)
    assert not is_prime(561)
    assert is_prime((1 << 61) - 1)


def test_is_prime_matches_sieve():
    flags = sieve(20000)
    assert all(is_prime(x) == flags[x] for x in range(len(flags)))


def test_is_prime_large():
    assert is_prime((1 << 127) - 1)
    assert not is_prime((1 << 128) + 1)
    assert not is_prime(((1 << 61) - 1) * ((1 << 89) - 1))
    # strong pseudoprime to bases 2..37 below the deterministic limit
    assert not is_prime(318665857834031151167461)


def test_next_prime():
    assert [next_prime(x) for x in (0, 1, 2, 8, 14, 24)] == [2, 2, 2, 11, 17, 29]


def test_random_prime_examples():
    rng = random.Random(1)
    for _ in range(50):
        assert random_prime(8, 16, rng).value in (11, 13)
    assert random_prime(2, 2, rng).value == 2
    with pytest.raises(SamplingExhausted):
        random_prime(24, 28, rng)
    with pytest.raises(ValueError):
        random_prime(1, 5, rng)


def test_random_prime_records_interval():
    p = random_prime(100, 200, random.Random(3), role="level_prime(1)")
    assert 100 <= p.value <= 200 and (p.lo, p.hi, p.role) == (100, 200, "level_prime(1)")


def test_split_rng_is_deterministic():
    a = [r.random() for r in split_rng(random.Random(5), 3)]
    b = [r.random() for r in split_rng(random.Random(5), 3)]
    assert a == b and len(set(a)) == 3


def test_single_leaf_assignment():
    tree = plan_tree(Fr(1, 4), 16)
    a = assign_moduli(tree, 16, random.Random(0))
    assert a.root_modulus >= 1 << 16
    assert a.M_prime == {} and a.modulus(tree.root) == a.root_modulus
    assert a.level_primes == ()


def test_one_level_construction():
    # sigma = 1/7 at n = 14: one gamma level with delta_1 * n = (2/7) * 14 = 4
    tree = plan_tree(Fr(1, 7), 14)
    assert tree.k == 1 and tree.deltas[0] * 14 == 4
    for seed in range(30):
        a = assign_moduli(tree, 12, random.Random(seed))
        p1 = a.sub_modulus(tree.root)
        assert 16 <= p1 <= 32 and is_prime(p1)
        assert a.root_modulus >= 4096 and a.root_modulus % p1 == 0
        assert lattice_violations(a) == []


def test_lattice_many_shapes():
    for sigma in (Fr(1, 5), Fr(1, 8), Fr(1, 13), Fr(1, 20)):
        for n in (20, 40, 90):
            tree = plan_tree(sigma, n)
            for seed in range(5):
                a = assign_moduli(tree, 3 * n, random.Random(seed))
                assert lattice_violations(a, check_window=False) == []
                for v in tree.root.internal_nodes():
                    assert a.modulus(v) % a.sub_modulus(v) == 0


def test_level_exponent_floor():
    assert level_exponent(Fr(1, 100), 20) == 2
    assert level_exponent(Fr(7, 30), 40) == 10


def test_assignment_is_reproducible():
    tree = plan_tree(Fr(1, 20), 60)
    a = assign_moduli(tree, 60, random.Random(9))
    b = assign_moduli(tree, 60, random.Random(9))
    assert [p.value for p in a.level_primes] == [p.value for p in b.level_primes]
    assert a.root_modulus == b.root_modulus


def test_rows_cover_every_node():
    tree = plan_tree(Fr(1, 8), 32)
    rows = assign_moduli(tree, 32, random.Random(0)).rows()
    assert [r[0] for r in rows] == [v.path or "root" for v in tree.nodes()]


def test_b_must_be_positive():
    with pytest.raises(ValueError):
        assign_moduli(plan_tree(Fr(1, 8), 20), 0, random.Random(0))


@pytest.mark.parametrize("k,n,Mp,want", [(1, 20, 17, Fr(1)), (2, 20, 1000, Fr(2, 5)), (1, 30, 1 << 20, Fr(30, 1 << 20))])
def test_divisor_hit_bound(k, n, Mp, want):
    assert divisor_hit_probability_estimate(None, 64, k=k, n=n, M_prime=Mp) == want


def test_divisor_hit_bound_from_assignment():
    tree = plan_tree(Fr(1, 7), 28)
    a = assign_moduli(tree, 28, random.Random(0))
    got = divisor_hit_probability_estimate(a, 28)
    assert got == min(1, Fr(28, a.sub_modulus(tree.root)))
