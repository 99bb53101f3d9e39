import random

import pytest

from ssdissect.instance import Instance


def planted(n: int, seed: int, bits: int = None) -> tuple[Instance, int]:
    rng = random.Random(seed)
    bits = n if bits is None else bits
    items = [rng.randrange(1 << bits) for _ in range(n)]
    mask = rng.getrandbits(n)
    return Instance(items, sum(a for i, a in enumerate(items) if mask >> i & 1)), mask


def parity_no(n: int, seed: int, bits: int = None) -> Instance:
    rng = random.Random(seed)
    bits = n if bits is None else bits
    items = [2 * rng.randrange(1 << max(bits - 1, 0)) for _ in range(n)]
    mask = rng.getrandbits(n)
    return Instance(items, sum(a for i, a in enumerate(items) if mask >> i & 1) + 1)


def brute_solutions(items, target, modulus=None) -> set[int]:
    out = set()
    for mask in range(1 << len(items)):
        s = sum(a for i, a in enumerate(items) if mask >> i & 1)
        if (s == target) if modulus is None else (s % modulus == target % modulus):
            out.add(mask)
    return out


@pytest.fixture
def rng():
    return random.Random(12345)
