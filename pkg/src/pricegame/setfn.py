"""Exact set functions on a small ground set, stored as dense bitmask tables.

Items are numbered 1..n at the API surface; internally a subset is an int
bitmask with bit ``i-1`` standing for item ``i``.  The ground set is capped at
16 items so dense tables and exhaustive structure checks stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .rationals import parse_value

MAX_ITEMS = 16


def mask_of(items, n: int) -> int:
    """Bitmask for an iterable of 1-based item numbers."""
    mask = 0
    for i in items:
        if not 1 <= i <= n:
            raise ValidationError(f"item {i} outside ground set 1..{n}")
        mask |= 1 << (i - 1)
    return mask


def items_of(mask: int) -> tuple[int, ...]:
    """Sorted 1-based item numbers of a bitmask."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def submasks(mask: int):
    """All subsets of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class Classification:
    normalized: bool
    monotone: bool
    additive: bool
    submodular: bool
    subadditive: bool


class SetFunction:
    """A normalized rational-valued function on all subsets of 1..n.

    Immutable after construction; all values are exact Fractions and the empty
    set maps to zero.
    """

    __slots__ = ("n", "values", "weights")

    def __init__(self, n: int, values, weights=None):
        if not 1 <= n <= MAX_ITEMS:
            raise ValidationError(f"ground set size {n} outside 1..{MAX_ITEMS}")
        values = tuple(parse_value(v) for v in values)
        if len(values) != 1 << n:
            raise ValidationError(
                f"dense table needs {1 << n} entries for n={n}, got {len(values)}"
            )
        if values[0] != 0:
            raise ValidationError(f"not normalized: value of empty set is {values[0]}")
        for mask, v in enumerate(values):
            if v < 0:
                raise ValidationError(
                    f"negative value {v} at subset {items_of(mask)}"
                )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, *_):
        raise AttributeError("SetFunction is immutable")

    @classmethod
    def from_table(cls, n: int, table: dict) -> "SetFunction":
        """Build from a mapping of item tuples (or bitmask ints) to values."""
        values = [Fraction(0)] * (1 << n)
        for key, v in table.items():
            mask = key if isinstance(key, int) else mask_of(key, n)
            values[mask] = parse_value(v)
        return cls(n, values)

    @classmethod
    def additive(cls, per_item) -> "SetFunction":
        """Additive valuation from per-item values; the dense table is derived."""
        weights = tuple(parse_value(v) for v in per_item)
        n = len(weights)
        if not 1 <= n <= MAX_ITEMS:
            raise ValidationError(f"ground set size {n} outside 1..{MAX_ITEMS}")
        values = [Fraction(0)] * (1 << n)
        for mask in range(1, 1 << n):
            low = mask & (-mask)
            values[mask] = values[mask ^ low] + weights[low.bit_length() - 1]
        return cls(n, values, weights=weights)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def value(self, mask: int) -> Fraction:
        if mask < 0 or mask > self.full_mask:
            raise ValidationError(f"subset mask {mask} outside ground set of {self.n}")
        return self.values[mask]

    def marginal(self, item: int, mask: int) -> Fraction:
        """Value of adding ``item`` on top of the subset ``mask``."""
        if not 1 <= item <= self.n:
            raise ValidationError(f"item {item} outside ground set 1..{self.n}")
        bit = 1 << (item - 1)
        if mask & bit:
            raise ValidationError(f"item {item} already in subset {items_of(mask)}")
        return self.value(mask | bit) - self.value(mask)

    def top_marginal(self, item: int) -> Fraction:
        """Marginal of ``item`` on top of everything else, v(N) - v(N minus item)."""
        return self.marginal(item, self.full_mask & ~(1 << (item - 1)))

    def classify(self) -> Classification:
        """Decide structure flags by exhaustive checks over the dense table.

        Subadditivity is checked over disjoint pairs, which matches the
        unrestricted definition whenever the function is monotone (all
        valuations here are meant to be monotone).
        """
        n, values = self.n, self.values
        full = self.full_mask

        monotone = True
        for mask in range(full + 1):
            rest = full & ~mask
            m = rest
            while m:
                low = m & (-m)
                if values[mask | low] < values[mask]:
                    monotone = False
                    break
                m ^= low
            if not monotone:
                break

        additive = True
        singles = [values[1 << b] for b in range(n)]
        for mask in range(full + 1):
            total = Fraction(0)
            m = mask
            while m:
                low = m & (-m)
                total += singles[low.bit_length() - 1]
                m ^= low
            if values[mask] != total:
                additive = False
                break

        # Pairwise local condition, equivalent to the S subset-of T definition.
        submodular = True
        for x in range(n):
            xb = 1 << x
            for y in range(n):
                if y == x:
                    continue
                yb = 1 << y
                others = full & ~(xb | yb)
                sub = others
                while True:
                    if (
                        values[sub | xb] - values[sub]
                        < values[sub | xb | yb] - values[sub | yb]
                    ):
                        submodular = False
                        break
                    if sub == 0:
                        break
                    sub = (sub - 1) & others
                if not submodular:
                    break
            if not submodular:
                break

        subadditive = True
        for mask in range(1, full + 1):
            rest = full & ~mask
            sub = rest
            while True:
                if sub and values[mask | sub] > values[mask] + values[sub]:
                    subadditive = False
                    break
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            if not subadditive:
                break

        return Classification(
            normalized=True,
            monotone=monotone,
            additive=additive,
            submodular=submodular,
            subadditive=subadditive,
        )

    def dense(self) -> tuple[Fraction, ...]:
        return self.values

    def __eq__(self, other):
        return (
            isinstance(other, SetFunction)
            and self.n == other.n
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.n, self.values))

    def __repr__(self):
        if self.weights is not None:
            return f"SetFunction.additive({list(map(str, self.weights))})"
        return f"SetFunction(n={self.n})"
