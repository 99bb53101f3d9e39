"""Problem instances, 0/1 solution vectors, solution streams and the plain-text instance format."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence


@dataclass(frozen=True)
class Instance:
    items: tuple[int, ...]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(int(a) for a in self.items))
        object.__setattr__(self, "target", int(self.target))
        if self.target < 0 or any(a < 0 for a in self.items):
            raise ValueError("items and target must be non-negative")

    @property
    def n(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class ModularInstance:
    """Items and target are kept as given; ``reduced``/``target_mod`` are the residues mod ``modulus``."""

    items: tuple[int, ...]
    target: int
    modulus: int
    reduced: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be >= 1")
        object.__setattr__(self, "items", tuple(int(a) for a in self.items))
        object.__setattr__(self, "reduced", tuple(a % self.modulus for a in self.items))

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def target_mod(self) -> int:
        return self.target % self.modulus

    @classmethod
    def from_instance(cls, inst: Instance, modulus: int) -> "ModularInstance":
        return cls(inst.items, inst.target % modulus, modulus)

    def satisfied_by(self, mask: int) -> bool:
        return subset_sum(self.items, mask) % self.modulus == self.target_mod


@dataclass(frozen=True)
class SolutionVector:
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("solution bits must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.bits)

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "SolutionVector":
        return cls(tuple((mask >> i) & 1 for i in range(n)))

    @classmethod
    def parse(cls, text: str) -> "SolutionVector":
        text = text.strip()
        if any(c not in "01" for c in text):
            raise ValueError(f"not a 0/1 string: {text!r}")
        return cls(tuple(int(c) for c in text))

    @property
    def mask(self) -> int:
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    def __str__(self) -> str:
        # item 0 is the leftmost character
        return "".join(str(b) for b in self.bits)


def subset_sum(items: Sequence[int], mask: int) -> int:
    total, i = 0, 0
    while mask:
        if mask & 1:
            total += items[i]
        mask >>= 1
        i += 1
    return total


class SolutionStream:
    """Single-owner iterator over solutions with an optional emission cap.

    ``source`` yields integer masks (bit i = item i).
    """

    def __init__(self, source: Iterable[int], n: int, cap: Optional[int] = None,
                 check: Optional[Callable[[int], bool]] = None):
        if cap is not None and cap < 0:
            raise ValueError("cap must be non-negative")
        self._source: Optional[Iterator[int]] = iter(source)
        self.n = n
        self.cap = cap
        self.emitted_count = 0
        self._check = check
        self._seen: Optional[set[int]] = set() if check is not None else None

    @property
    def exhausted(self) -> bool:
        return self._source is None

    def next_mask(self) -> Optional[int]:
        if self._source is None:
            return None
        if self.cap is not None and self.emitted_count >= self.cap:
            self.close()
            return None
        mask = next(self._source, None)
        if mask is None:
            self.close()
            return None
        if self._check is not None:
            if mask in self._seen:
                raise AssertionError(f"stream emitted pattern {mask:#x} twice")
            self._seen.add(mask)
            if not self._check(mask):
                raise AssertionError(f"stream emitted non-solution {mask:#x}")
        self.emitted_count += 1
        return mask

    def next(self) -> Optional[SolutionVector]:
        mask = self.next_mask()
        return None if mask is None else SolutionVector.from_mask(mask, self.n)

    def close(self) -> None:
        src, self._source = self._source, None
        if src is not None and hasattr(src, "close"):
            src.close()

    def masks(self) -> Iterator[int]:
        while True:
            mask = self.next_mask()
            if mask is None:
                return
            yield mask

    def __iter__(self) -> Iterator[SolutionVector]:
        while True:
            x = self.next()
            if x is None:
                return
            yield x


# ---------------------------------------------------------------------------
# Instance files: n / items / target, plus optional '#' comment lines
# ---------------------------------------------------------------------------


class InstanceFormatError(ValueError):
    pass


def _parse_decimal(token: str, what: str) -> int:
    if not token.isdigit():
        raise InstanceFormatError(f"{what}: {token!r} is not a non-negative decimal integer")
    if len(token) > 1 and token[0] == "0":
        raise InstanceFormatError(f"{what}: leading zero in {token!r}")
    return int(token)


def render_instance(inst: Instance, witness: Optional[SolutionVector] = None) -> str:
    lines = [str(inst.n), " ".join(str(a) for a in inst.items), str(inst.target)]
    if witness is not None:
        lines.append(f"# witness {witness}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> tuple[Instance, Optional[SolutionVector]]:
    """Parse the three-line format. Returns the instance and a sidecar witness if present."""
    witness = None
    body = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "witness":
                witness = SolutionVector.parse(parts[1])
            continue
        body.append(line)
    # an empty item list renders as a blank second line
    while len(body) > 3 and body[-1] == "":
        body.pop()
    if len(body) != 3:
        raise InstanceFormatError(f"expected 3 lines, found {len(body)}")
    n = _parse_decimal(body[0], "line 1")
    tokens = body[1].split()
    if len(tokens) != n:
        raise InstanceFormatError(f"line 2 has {len(tokens)} integers, expected {n}")
    items = tuple(_parse_decimal(tok, "line 2") for tok in tokens)
    target = _parse_decimal(body[2], "line 3")
    inst = Instance(items, target)
    if witness is not None and witness.n != n:
        raise InstanceFormatError("witness length does not match n")
    return inst, witness


def read_instance(path: str) -> tuple[Instance, Optional[SolutionVector]]:
    with open(path, encoding="ascii") as fh:
        return parse_instance(fh.read())


def write_instance(path: str, inst: Instance, witness: Optional[SolutionVector] = None) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(render_instance(inst, witness))
