"""Short-interval arithmetic-progression sums of mu and their admissibility test.

For modulus q, scale L, horizon N and offset z the evaluated quantity is

    sum_{j=0}^{N // (L q)} sum_{a=0}^{q-1} | sum_{m in [z + j L q, z + (j+1) L q), m = a mod q} mu(m) |

with the outer range read inclusively and mu(m) = 0 for m <= 0 or m beyond
the sieve limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from rankone.errors import InvalidArgumentError, OutOfRangeError
from rankone.mobius import HarmonicSum, MobiusTable, prime_harmonic

J_RANGE_CONVENTION = "inclusive: j = 0 .. floor(N / (L q))"


def as_fraction(value: float | str | Fraction) -> Fraction:
    """Exact rational for a decimal literal: 0.005 becomes 1/200, not the binary float."""
    if isinstance(value, Fraction):
        return value
    return Fraction(str(value))


@dataclass(frozen=True)
class KlrQuery:
    q: int
    L: int
    N: int
    z: int = 0
    epsilon: float | None = None

    def __post_init__(self):
        if self.q < 1:
            raise InvalidArgumentError(f"q must be >= 1, got {self.q}")
        if self.L < 1:
            raise InvalidArgumentError(f"L must be >= 1, got {self.L}")
        if not 0 <= self.z < self.L * self.q:
            raise InvalidArgumentError(f"z = {self.z} outside [0, Lq) = [0, {self.L * self.q})")

    @property
    def block(self) -> int:
        return self.L * self.q

    @property
    def blocks(self) -> int:
        return self.N // self.block + 1


def klr_double_sum(table: MobiusTable, query: KlrQuery) -> int:
    if query.N < 1:
        return 0
    span = query.blocks * query.block
    if query.z + span > table.limit + query.block:
        raise OutOfRangeError(
            f"intervals reach {query.z + span - 1}, beyond sieve limit {table.limit} by more than Lq"
        )
    mu = table.window(query.z, query.z + span).astype(np.int64)
    # row t of a block holds positions t*q .. t*q+q-1, so column a is one residue class
    cells = mu.reshape(query.blocks, query.L, query.q).sum(axis=1)
    return int(np.abs(cells).sum())


@dataclass(frozen=True)
class OffsetSearch:
    z: int
    value: int
    searched: int


def klr_best_offset(
    table: MobiusTable, q: int, L: int, N: int, search: str = "exhaustive", step: int = 1
) -> OffsetSearch:
    """Offset z minimizing the double sum; ties go to the smallest z.

    ``search`` is ``"exhaustive"`` or ``"stride"`` (z = 0, step, 2 step, ...).
    """
    if search == "exhaustive":
        step = 1
    elif search != "stride":
        raise InvalidArgumentError(f"unknown search {search!r}")
    if step < 1:
        raise InvalidArgumentError(f"stride must be >= 1, got {step}")
    candidates = range(0, L * q, step)
    if len(candidates) == 0:
        raise InvalidArgumentError("empty offset search set")
    best = None
    for z in candidates:
        value = klr_double_sum(table, KlrQuery(q, L, N, z))
        if best is None or value < best[1]:
            best = (z, value)
    return OffsetSearch(best[0], best[1], len(candidates))


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    divisor_sum: HarmonicSum
    prime_sum: HarmonicSum
    epsilon: Fraction

    def to_dict(self) -> dict[str, Any]:
        return {
            "admissible": self.admissible,
            "sum_p_divides_q": self.divisor_sum.value,
            "sum_p_up_to_L": self.prime_sum.value,
            "scaled_bound": float((1 - self.epsilon) * self.prime_sum.exact),
            "epsilon_exact": f"{self.epsilon.numerator}/{self.epsilon.denominator}",
        }


def klr_admissible(q: int, L: int, epsilon: float | str | Fraction) -> Admissibility:
    """sum_{p | q} 1/p <= (1 - eps) sum_{p <= L} 1/p, decided on exact rationals."""
    eps = as_fraction(epsilon)
    if not 0 < eps < Fraction(1, 100):
        raise InvalidArgumentError(f"epsilon must lie in (0, 1/100), got {epsilon}")
    if q < 1:
        raise InvalidArgumentError(f"q must be >= 1, got {q}")
    if L < 2:
        raise InvalidArgumentError(f"L must be >= 2, got {L}")
    lhs = prime_harmonic("divisors", q)
    rhs = prime_harmonic("upto", L)
    return Admissibility(lhs.exact <= (1 - eps) * rhs.exact, lhs, rhs, eps)


def klr_record(table: MobiusTable, query: KlrQuery, value: int | None = None) -> dict[str, Any]:
    """One-line JSON record for the CLI."""
    value = klr_double_sum(table, query) if value is None else value
    rec: dict[str, Any] = {
        "q": query.q,
        "L": query.L,
        "N": query.N,
        "z": query.z,
        "value": value,
        "value_over_N": value / query.N if query.N else None,
        "admissible": None,
        "j_range": J_RANGE_CONVENTION,
    }
    if query.epsilon is not None and query.L >= 2:
        rec["admissible"] = klr_admissible(query.q, query.L, query.epsilon).admissible
    return rec
