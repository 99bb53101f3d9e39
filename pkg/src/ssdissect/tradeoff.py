"""Exact-rational tradeoff curve, the runtime recurrence, and dissection-tree planning.

Everything here is computed with :class:`fractions.Fraction`; floats never
enter the planning layer, so curve identities can be checked as exact
equalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Union

RationalLike = Union[Fraction, int, str]

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)

# Nodes at or below this many items are leaves regardless of sigma.
LEAF_SIZE_FLOOR = 8


class DomainError(ValueError):
    """Raised when sigma lies outside (0, 1]."""


def as_rational(value: RationalLike) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floating point sigma is not accepted; pass a Fraction or 'p/q'")
    return Fraction(value)


def _check_sigma(sigma: RationalLike) -> Fraction:
    sigma = as_rational(sigma)
    if not (0 < sigma <= 1):
        raise DomainError(f"sigma must lie in (0, 1], got {sigma}")
    return sigma


def rho(ell: int) -> int:
    """Magic sequence 2, 4, 7, 11, 16, 22, ..."""
    if ell < 1:
        raise DomainError(f"rho is defined for ell >= 1, got {ell}")
    return 1 + ell * (ell + 1) // 2


def level(sigma: RationalLike) -> int:
    """Return ell with 1/rho(ell+1) < sigma <= 1/rho(ell), or 0 when sigma > 1/2."""
    sigma = _check_sigma(sigma)
    if sigma > HALF:
        return 0
    ell = 1
    while not sigma > Fraction(1, rho(ell + 1)):
        ell += 1
    return ell


def tau(sigma: RationalLike) -> Fraction:
    """Time exponent of the dissection tradeoff at space exponent ``sigma``."""
    sigma = _check_sigma(sigma)
    ell = level(sigma)
    if ell == 0:
        return HALF
    return 1 - Fraction(1, ell + 1) - Fraction(rho(ell) - 2, ell + 1) * sigma


def split_parameters(sigma: RationalLike) -> tuple[Fraction, Fraction]:
    """(alpha, beta) = (1 - tau, 1 - tau - sigma)."""
    sigma = _check_sigma(sigma)
    alpha = 1 - tau(sigma)
    return alpha, alpha - sigma


@lru_cache(maxsize=None)
def _F(sigma: Fraction) -> Fraction:
    if sigma >= QUARTER:
        return HALF
    alpha, beta = split_parameters(sigma)
    return beta + max(alpha * _F(sigma / alpha), (1 - alpha) * _F(sigma / (1 - alpha)))


def F(sigma: RationalLike) -> Fraction:
    """Runtime exponent defined by direct recursion over the split (no closed form used)."""
    return _F(_check_sigma(sigma))


def schroeppel_shamir_tau(sigma: RationalLike) -> Fraction:
    """Hybrid baseline curve S^2 T = 2^n: tau = 1 - 2 sigma up to sigma = 1/4, then 1/2."""
    sigma = _check_sigma(sigma)
    if sigma >= QUARTER:
        return HALF
    return 1 - 2 * sigma


@dataclass(frozen=True)
class CurvePoint:
    sigma: Fraction
    level: int
    rho: Optional[int]
    tau: Fraction
    alpha: Fraction
    beta: Fraction


def curve_point(sigma: RationalLike) -> CurvePoint:
    sigma = _check_sigma(sigma)
    ell = level(sigma)
    alpha, beta = split_parameters(sigma)
    return CurvePoint(
        sigma=sigma,
        level=ell,
        rho=rho(ell) if ell >= 1 else None,
        tau=tau(sigma),
        alpha=alpha,
        beta=beta,
    )


# ---------------------------------------------------------------------------
# Dissection tree
# ---------------------------------------------------------------------------


def round_half_even(value: Fraction) -> int:
    return round(value)  # Fraction.__round__ rounds ties to even


@dataclass(eq=False)
class DissectNode:
    sigma: Fraction
    tau: Fraction
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    n: int
    size_exact: Fraction
    lo: int
    hi: int
    depth: int
    path: str
    left: Optional["DissectNode"] = None
    right: Optional["DissectNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def index_range(self) -> range:
        return range(self.lo, self.hi)

    def walk(self) -> Iterator["DissectNode"]:
        """Preorder traversal."""
        yield self
        if self.left is not None:
            yield from self.left.walk()
            yield from self.right.walk()

    def internal_nodes(self) -> Iterator["DissectNode"]:
        return (v for v in self.walk() if not v.is_leaf)

    def height(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.height(), self.right.height())


@dataclass(eq=False)
class DissectionTree:
    root: DissectNode
    n_top: int
    sigma_top: Fraction
    gamma_levels: tuple[Fraction, ...] = field(default_factory=tuple)
    deltas: tuple[Fraction, ...] = field(default_factory=tuple)

    @property
    def k(self) -> int:
        return len(self.gamma_levels)

    def nodes(self) -> list[DissectNode]:
        return list(self.root.walk())

    def level_index(self, node: DissectNode) -> int:
        """1-based position of the node's gamma among gamma_levels."""
        return self.gamma_levels.index(node.gamma) + 1

    def height(self) -> int:
        return self.root.height()


def _build(sigma: Fraction, sigma_top: Fraction, n: int, size: Fraction,
           lo: int, depth: int, path: str) -> DissectNode:
    t = tau(sigma)
    alpha, beta = split_parameters(sigma)
    node = DissectNode(
        sigma=sigma, tau=t, alpha=alpha, beta=beta,
        gamma=beta * sigma_top / sigma,
        n=n, size_exact=size, lo=lo, hi=lo + n, depth=depth, path=path,
    )
    if sigma >= QUARTER or n <= LEAF_SIZE_FLOOR:
        return node
    n_left = min(max(round_half_even(alpha * n), 1), n - 1)
    node.left = _build(sigma / alpha, sigma_top, n_left, alpha * size, lo, depth + 1, path + "L")
    node.right = _build(sigma / (1 - alpha), sigma_top, n - n_left, (1 - alpha) * size,
                        lo + n_left, depth + 1, path + "R")
    return node


def plan_tree(sigma: RationalLike, n: int) -> DissectionTree:
    """Build the dissection tree for space exponent ``sigma`` over ``n`` items."""
    sigma = _check_sigma(sigma)
    if n < 1:
        raise ValueError("plan_tree needs n >= 1")
    root = _build(sigma, sigma, n, Fraction(n), 0, 0, "")
    levels = sorted({v.gamma for v in root.internal_nodes()})
    deltas = tuple(b - a for a, b in zip([Fraction(0)] + levels[:-1], levels))
    return DissectionTree(root=root, n_top=n, sigma_top=sigma,
                          gamma_levels=tuple(levels), deltas=deltas)


class CostModelError(RuntimeError):
    pass


def predict_cost(tree: DissectionTree) -> tuple[Fraction, Fraction]:
    """(time exponent, space exponent) of a plan; recursion and closed form must agree."""
    recursive = F(tree.sigma_top)
    closed = tau(tree.sigma_top)
    if recursive != closed:
        raise CostModelError(f"F({tree.sigma_top}) = {recursive} but tau = {closed}")
    return recursive, tree.sigma_top


def parse_sigma(text: str) -> Fraction:
    """Parse an exact 'p/q' (or integer) sigma; decimals are rejected."""
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ValueError(f"sigma must be an exact rational 'p/q', got {text!r}")
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse sigma {text!r}") from exc
    return _check_sigma(value)
