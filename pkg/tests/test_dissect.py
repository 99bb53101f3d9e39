import random
from fractions import Fraction as Fr

import pytest

from conftest import brute_solutions, planted
from ssdissect.dissect import (
    BailoutPolicy, KernelRun, RunStats, generate_solutions, kernel_supported, threshold, threshold_value,
)
from ssdissect.enumerators import iter_schroeppel_shamir
from ssdissect.instance import ModularInstance, subset_sum
from ssdissect.modulus import assign_moduli
from ssdissect.tradeoff import plan_tree


def setup(sigma, items, b, seed, target=None):
    n = len(items)
    tree = plan_tree(sigma, n)
    a = assign_moduli(tree, b, random.Random(seed))
    M = a.root_modulus
    t = sum(items) // 2 if target is None else target
    return tree, a, ModularInstance(items, t % M, M)


def test_threshold_examples():
    assert threshold_value(24, 2, 12, 1 << 10) == 24 ** 2 * 4
    assert threshold_value(24, 2, 10, 1 << 20) == 24 ** 2
    assert threshold_value(24, 0, 12, 1 << 10) == 4
    assert threshold_value(24, 0, 10, 1 << 20) == 1
    # never more than the number of distinct vectors
    assert threshold_value(24, 5, 3, 2) == 8


def test_default_policy_exponent():
    tree = plan_tree(Fr(1, 20), 60)
    assert BailoutPolicy.default(tree).poly_exponent == tree.k + 1


def test_leaf_node_matches_brute_force():
    tree, a, inst = setup(Fr(1, 4), tuple(range(1, 9)), 50, 0, 12)
    got = list(generate_solutions(inst, tree.root, a, BailoutPolicy.disabled(tree)).masks())
    assert set(got) == brute_solutions(inst.items, 12) and len(got) == len(set(got))


def test_all_ones_internal_node():
    items = (1,) * 12
    tree, a, inst = setup(Fr(1, 5), items, 12, 3, 6)
    assert not tree.root.is_leaf and a.root_modulus >= 1 << 12
    got = list(generate_solutions(inst, tree.root, a, BailoutPolicy.disabled(tree), check=True).masks())
    assert all(bin(m).count("1") == 6 for m in got)
    assert len(got) == 924


@pytest.mark.parametrize("sigma", [Fr(1, 5), Fr(1, 7), Fr(1, 8)])
def test_engines_agree_with_brute_force(sigma):
    rng = random.Random(int(1 / sigma))
    for trial in range(15):
        n = rng.randint(9, 17)
        items = tuple(rng.randint(0, rng.choice([3, 1 << n])) for _ in range(n))
        tree, a, inst = setup(sigma, items, rng.choice([n, n + 3, 70]), trial, rng.randint(0, sum(items)))
        want = brute_solutions(items, inst.target, inst.modulus)
        policy = BailoutPolicy.disabled(tree)
        s_ref, s_ker = RunStats(), RunStats()
        ref = list(generate_solutions(inst, tree.root, a, policy, s_ref, engine="python", check=True).masks())
        ker = list(generate_solutions(inst, tree.root, a, policy, s_ker, check=True).masks())
        assert set(ref) == set(ker) == want
        assert len(ref) == len(ker) == len(want)
        assert s_ref.bailouts_triggered == s_ker.bailouts_triggered == 0
        assert s_ker.recursion_depth_reached <= tree.height()


def test_engines_emit_identical_sequences_and_stats():
    rng = random.Random(77)
    compared = 0
    for trial in range(30):
        sigma = rng.choice([Fr(1, 5), Fr(1, 7), Fr(1, 8)])
        n = rng.randint(9, 18)
        items = tuple(rng.randint(0, rng.choice([3, 1 << n])) for _ in range(n))
        tree, a, inst = setup(sigma, items, n, trial, rng.randint(0, sum(items)))
        for policy in (BailoutPolicy.disabled(tree), BailoutPolicy(0, tree.k)):
            s_ref, s_ker = RunStats(), RunStats()
            ref = list(generate_solutions(inst, tree.root, a, policy, s_ref, engine="python").masks())
            ker = list(generate_solutions(inst, tree.root, a, policy, s_ker, engine="kernel").masks())
            assert ref == ker
            assert (s_ref.peak_table_entries, s_ref.bailouts_triggered, s_ref.solutions_emitted) == \
                (s_ker.peak_table_entries, s_ker.bailouts_triggered, s_ker.solutions_emitted)
            compared += 1
    assert compared == 60


def test_compiled_leaf_matches_schroeppel_shamir_order():
    rng = random.Random(5)
    for trial in range(40):
        n = rng.randint(9, 16)
        items = tuple(rng.randint(0, rng.choice([3, 1 << n])) for _ in range(n))
        tree = plan_tree(Fr(1, 3), n)
        a = assign_moduli(tree, rng.randint(2, 12), rng)
        M = a.root_modulus
        inst = ModularInstance(items, rng.randrange(M), M)
        ref = list(iter_schroeppel_shamir(inst.reduced, inst.target, M))
        ker = list(generate_solutions(inst, tree.root, a, BailoutPolicy(60, 0), engine="kernel").masks())
        assert ref == ker


def test_bailout_caps_every_stream():
    items = (0,) * 14
    tree, a, inst = setup(Fr(1, 7), items, 14, 0, 0)
    policy = BailoutPolicy(0, tree.k)
    cap = threshold(tree.root, a, policy)
    for engine in ("python", "kernel"):
        stats = RunStats()
        got = list(generate_solutions(inst, tree.root, a, policy, stats, engine=engine).masks())
        assert len(got) == cap and stats.bailouts_triggered >= 1
        assert all(subset_sum(items, m) % inst.modulus == 0 for m in got)


def test_fingerprint_root_mode():
    # a root modulus far above machine words forces fingerprinted root joins
    rng = random.Random(2)
    for trial in range(8):
        n = 16
        items = tuple(rng.randrange(1 << 90) for _ in range(n))
        mask = rng.getrandbits(n)
        target = subset_sum(items, mask)
        tree, a, inst = setup(Fr(1, 7), items, 100, trial, target)
        run = KernelRun(inst, tree, a, BailoutPolicy.default(tree))
        assert run.fingerprint
        got = list(run.masks())
        assert mask in got
        assert all(subset_sum(items, m) % inst.modulus == inst.target for m in got)
        ref = list(generate_solutions(inst, tree.root, a, BailoutPolicy.default(tree), engine="python").masks())
        assert sorted(ref) == sorted(got)


def test_sp_ranges_partition_the_root_loop():
    inst0, _ = planted(18, 4)
    tree, a, inst = setup(Fr(1, 7), inst0.items, 18, 1, inst0.target)
    policy = BailoutPolicy.default(tree)
    whole = list(generate_solutions(inst, tree.root, a, policy).masks())
    Mp = a.sub_modulus(tree.root)
    cut = Mp // 3
    parts = []
    for lo, hi in ((0, cut), (cut, Mp)):
        parts += list(generate_solutions(inst, tree.root, a, policy, sp_ranges={"": (lo, hi)}).masks())
    assert parts == whole


def test_non_root_node_uses_python_engine():
    items = tuple(range(1, 19))
    tree, a, inst = setup(Fr(1, 8), items, 18, 0)
    child = tree.root.right
    M = a.modulus(child)
    sub = ModularInstance(items[child.lo:child.hi], 5 % M, M)
    got = list(generate_solutions(sub, child, a, BailoutPolicy.disabled(tree), check=True).masks())
    assert set(got) == brute_solutions(sub.items, 5, M)
    with pytest.raises(ValueError):
        generate_solutions(sub, child, a, BailoutPolicy.disabled(tree), engine="kernel")


def test_precondition_checks():
    items = tuple(range(1, 13))
    tree, a, inst = setup(Fr(1, 5), items, 12, 0)
    with pytest.raises(ValueError):
        generate_solutions(ModularInstance(items, 0, inst.modulus + 1), tree.root, a, BailoutPolicy.default(tree))
    with pytest.raises(ValueError):
        generate_solutions(ModularInstance(items[:-1], 0, inst.modulus), tree.root, a, BailoutPolicy.default(tree))


def test_kernel_support_limits():
    tree = plan_tree(Fr(1, 7), 70)
    a = assign_moduli(tree, 70, random.Random(0))
    assert not kernel_supported(tree, a)


def test_space_bound_on_planted_grid():
    for n in (16, 20, 24):
        inst0, _ = planted(n, n)
        tree, a, inst = setup(Fr(1, 7), inst0.items, n, 0, inst0.target)
        policy = BailoutPolicy.default(tree)
        stats = RunStats()
        list(generate_solutions(inst, tree.root, a, policy, stats).masks())
        bound = n ** (policy.poly_exponent + 1) * 2 ** -(-n // 7)
        assert 0 < stats.peak_table_entries <= bound
        # the only join table lives at the root and holds one left stream at a time
        assert stats.peak_table_entries <= threshold(tree.root.left, a, policy)


def test_disabled_policy_is_uncapped_for_a_single_item():
    tree = plan_tree(Fr(1, 5), 1)
    a = assign_moduli(tree, 1, random.Random(0))
    policy = BailoutPolicy.disabled(tree)
    assert threshold(tree.root, a, policy) == 2
    inst = ModularInstance((0,), 0, a.root_modulus)
    for engine in ("python", "auto"):
        assert sorted(generate_solutions(inst, tree.root, a, policy, engine=engine).masks()) == [0, 1]
