import random
from fractions import Fraction as Fr

import pytest

from conftest import brute_solutions, parity_no, planted
from ssdissect.instance import Instance, SolutionVector
from ssdissect.solver import SolverConfig, default_rounds, root_bits, solve, solve_baseline, verify


def test_verify_examples():
    inst = Instance((2, 3, 5), 8)
    assert not verify(inst, SolutionVector.parse("110"))
    assert not verify(inst, SolutionVector.parse("101"))
    assert verify(inst, SolutionVector.parse("011"))
    assert verify(Instance((), 0), SolutionVector(()))
    with pytest.raises(ValueError):
        verify(inst, SolutionVector.parse("01"))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(sigma=Fr(0))
    with pytest.raises(ValueError):
        SolverConfig(preprocess_rounds=0)
    with pytest.raises(ValueError):
        SolverConfig(mode="all")
    assert SolverConfig(sigma="1/8").sigma == Fr(1, 8)
    assert default_rounds(28) == 18


def test_root_bits():
    assert root_bits(20, 5) == 20
    assert root_bits(4, 1 << 30) == 32
    assert root_bits(3, 0) == 3


@pytest.mark.parametrize("sigma", [Fr(1, 7), Fr(1, 8)])
def test_planted_instances_are_solved(sigma):
    for seed in range(4):
        inst, _ = planted(16, seed)
        report = solve(inst, SolverConfig(sigma=sigma, preprocess_rounds=8, rng_seed=seed))
        assert report.found and verify(inst, report.witness)
        assert report.stats.peak_table_entries > 0


def test_parity_instances_never_yield_a_witness():
    for seed in range(3):
        inst = parity_no(16, seed)
        report = solve(inst, SolverConfig(sigma=Fr(1, 7), preprocess_rounds=1, rng_seed=seed))
        assert not report.found and report.witnesses == []
        assert report.rounds_used == 1 and report.instances_examined > 0


def test_sigma_one_single_leaf_pipeline():
    inst, _ = planted(14, 3)
    report = solve(inst, SolverConfig(sigma=Fr(1), preprocess_rounds=4, rng_seed=1))
    assert report.found and verify(inst, report.witness)


def test_trivial_guard_path():
    inst = Instance((2, 1 << 10, 3), 1 << 10)
    report = solve(inst, SolverConfig())
    assert report.found and verify(inst, report.witness) and report.rounds_used == 0
    assert not solve(Instance((5,), 7), SolverConfig()).found


def test_witness_uses_original_indices():
    items = [10 ** 9, 3, 5, 10 ** 9 + 7, 7, 11, 13, 17, 19, 23, 29, 31]
    inst = Instance(items, 3 + 7 + 13 + 31)
    report = solve(inst, SolverConfig(sigma=Fr(1, 5), preprocess_rounds=6, rng_seed=2))
    assert report.found and verify(inst, report.witness)
    assert report.witness.bits[0] == report.witness.bits[3] == 0


def test_count_capped_mode():
    inst = Instance([1] * 8, 4)
    config = SolverConfig(sigma=Fr(1, 5), preprocess_rounds=10, rng_seed=0, mode="count_capped", cap=5)
    report = solve(inst, config)
    assert len(report.witnesses) == 5
    assert len({w.mask for w in report.witnesses}) == 5
    assert all(verify(inst, w) for w in report.witnesses)


def test_runs_are_reproducible():
    inst, _ = planted(16, 9)
    a = solve(inst, SolverConfig(sigma=Fr(1, 8), preprocess_rounds=3, rng_seed=4))
    b = solve(inst, SolverConfig(sigma=Fr(1, 8), preprocess_rounds=3, rng_seed=4))
    assert (a.witness, a.instances_examined, a.stats.peak_table_entries) == \
        (b.witness, b.instances_examined, b.stats.peak_table_entries)


def test_threaded_solve_agrees():
    inst, _ = planted(16, 2)
    report = solve(inst, SolverConfig(sigma=Fr(1, 7), preprocess_rounds=4, rng_seed=0, thread_count=2))
    assert report.found and verify(inst, report.witness)
    assert not solve(parity_no(14, 0), SolverConfig(sigma=Fr(1, 7), preprocess_rounds=1, thread_count=2)).found


def test_python_engine_fallback():
    inst, _ = planted(12, 1)
    report = solve(inst, SolverConfig(sigma=Fr(1, 5), preprocess_rounds=4, rng_seed=0, engine="python"))
    assert report.found and verify(inst, report.witness)


def test_agreement_with_brute_force():
    rng = random.Random(21)
    for trial in range(6):
        n = rng.randint(10, 14)
        items = [rng.randrange(1 << n) for _ in range(n)]
        target = rng.randrange(sum(items) // 3, sum(items) // 2 + 1)
        inst = Instance(items, target)
        truth = bool(brute_solutions(items, target))
        found = [solve(inst, SolverConfig(sigma=Fr(1, 7), preprocess_rounds=6, rng_seed=s)).found for s in range(3)]
        if truth:
            assert sum(found) >= 2
        else:
            assert not any(found)


def test_baselines():
    inst = Instance((3, 5, 8, 9, 11, 13), 24)
    want = brute_solutions(inst.items, 24)
    for algorithm in ("brute", "hs", "ss"):
        report = solve_baseline(inst, algorithm)
        assert report.found and report.witness.mask in want
    assert solve_baseline(Instance((), 0), "ss").witness == SolutionVector(())
    assert not solve_baseline(Instance((1,), 2), "hs").found
    with pytest.raises(ValueError):
        solve_baseline(inst, "dp")
