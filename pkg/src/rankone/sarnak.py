"""Correlation sums of mu against cylinder functions of a rank-one word.

A cylinder function f = f_{n_1} ... f_{n_l} evaluates to x(n+n_1)...x(n+n_l)
at time n. Sums run over n in [max(1, delta+1), N] with delta = max |n_i|, so
only coordinates of the one-sided prefix are read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import compress
from typing import Iterable, Sequence

import numpy as np

from rankone.errors import InvalidArgumentError, OutOfRangeError, ResourceLimitError
from rankone.mobius import MobiusTable, masked_mobius_sum

MAX_EXPANSION = 20


@dataclass(frozen=True)
class CylinderFunction:
    offsets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(int(o) for o in self.offsets))
        if not self.offsets:
            raise InvalidArgumentError("a cylinder function needs at least one offset")

    @property
    def delta(self) -> int:
        return max(abs(o) for o in self.offsets)

    @property
    def start(self) -> int:
        return max(1, self.delta + 1)


@dataclass(frozen=True, eq=False)
class PositionSet:
    positions: np.ndarray = field(repr=False)
    lo: int
    hi: int
    degenerate: bool = False

    @classmethod
    def from_word(cls, symbols: np.ndarray, lo: int = 0) -> PositionSet:
        """Zero positions of a 0/1 word laid out on [lo, lo + len)."""
        return cls(np.flatnonzero(np.asarray(symbols) == 0).astype(np.int64) + lo, lo, lo + len(symbols))

    def __len__(self):
        return int(self.positions.size)

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.hi - self.lo, dtype=bool)
        out[self.positions - self.lo] = True
        return out


def m_prime(M: PositionSet, offsets: Sequence[int]) -> PositionSet:
    """{n in [lo + delta, hi - delta) : n + n_i in M for every offset}."""
    if M.hi <= M.lo:
        raise InvalidArgumentError("window is empty")
    offs = [int(o) for o in offsets]
    delta = max((abs(o) for o in offs), default=0)
    lo, hi = M.lo + delta, M.hi - delta
    if hi <= lo:
        return PositionSet(np.zeros(0, dtype=np.int64), lo, max(lo, hi), degenerate=True)
    member = M.indicator()
    keep = np.ones(hi - lo, dtype=bool)
    for o in offs:
        keep &= member[lo - M.lo + o : hi - M.lo + o]
    return PositionSet(np.flatnonzero(keep).astype(np.int64) + lo, lo, hi)


def _products(x_prefix: np.ndarray, f: CylinderFunction, start: int, stop: int) -> np.ndarray:
    """prod_i x(n + n_i) for n in [start, stop), as a boolean array."""
    prod = np.ones(max(stop - start, 0), dtype=bool)
    for o in f.offsets:
        prod &= x_prefix[start + o : stop + o] != 0
    return prod


def _validate(table: MobiusTable, x_prefix: np.ndarray, f: CylinderFunction, N: int) -> None:
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    table.require(N)
    if N + f.delta >= len(x_prefix):
        raise OutOfRangeError(
            f"prefix of length {len(x_prefix)} is too short: coordinates up to N + delta = {N + f.delta} are read"
        )


@dataclass(frozen=True)
class Correlation:
    S: int
    N: int
    start: int

    @property
    def S_over_N(self) -> float:
        return self.S / self.N


def correlation_sum(table: MobiusTable, x_prefix: np.ndarray, f: CylinderFunction, N: int) -> Correlation:
    """S = sum_{n = start}^{N} mu(n) x(n+n_1) ... x(n+n_l), exact."""
    x = np.asarray(x_prefix)
    _validate(table, x, f, N)
    start = f.start
    if start > N:
        return Correlation(0, N, start)
    mu = table.values[start : N + 1]
    return Correlation(int(mu.sum(where=_products(x, f, start, N + 1), dtype=np.int64)), N, start)


def inclusion_exclusion_expand(f: CylinderFunction) -> list[tuple[tuple[int, ...], int]]:
    """Signed subsets from expanding prod_i (1 - (1 - x(n+n_i))).

    Subsets are 1-based index tuples in binary-counting order; the sign is
    (-1)^|I|.
    """
    l = len(f.offsets)
    if l > MAX_EXPANSION:
        raise ResourceLimitError(f"2^{l} terms exceed the expansion budget 2^{MAX_EXPANSION}")
    out = []
    for mask in range(1 << l):
        subset = tuple(compress(range(1, l + 1), ((mask >> i) & 1 for i in range(l))))
        out.append((subset, -1 if len(subset) % 2 else 1))
    return out


def expanded_correlation_sum(
    table: MobiusTable, x_prefix: np.ndarray, f: CylinderFunction, N: int
) -> int:
    """The correlation sum rebuilt from masked sums of mu over the sets M'_I."""
    x = np.asarray(x_prefix)
    _validate(table, x, f, N)
    start = f.start
    if start > N:
        return 0
    zeros = PositionSet.from_word(x)
    total = 0
    for subset, sign in inclusion_exclusion_expand(f):
        if subset:
            mask = m_prime(zeros, [f.offsets[i - 1] for i in subset]).positions
            mask = mask[mask >= start]
        else:
            mask = np.arange(start, N + 1, dtype=np.int64)
        total += sign * masked_mobius_sum(table, mask, N)
    return total


@dataclass(frozen=True)
class CurveRow:
    N: int
    S: int
    mask_count: int

    @property
    def S_over_N(self) -> float:
        return self.S / self.N

    @property
    def mask_density(self) -> float:
        return self.mask_count / self.N


def decay_curve(
    table: MobiusTable, x_prefix: np.ndarray, f: CylinderFunction, checkpoints: Iterable[int]
) -> list[CurveRow]:
    """Correlation sums at each checkpoint from one running sum."""
    points = sorted(set(int(c) for c in checkpoints))
    if not points:
        return []
    x = np.asarray(x_prefix)
    top = points[-1]
    _validate(table, x, f, top)
    start = f.start
    prod = _products(x, f, start, top + 1)
    running = np.cumsum(table.values[start : top + 1] * prod, dtype=np.int64)
    hits = np.cumsum(prod, dtype=np.int64)
    rows = []
    for n in points:
        if n < 1:
            raise InvalidArgumentError(f"checkpoint {n} must be >= 1")
        if n < start:
            rows.append(CurveRow(n, 0, 0))
        else:
            rows.append(CurveRow(n, int(running[n - start]), int(hits[n - start])))
    return rows
