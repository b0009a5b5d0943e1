"""Segmented Mobius sieve and the scalar statistics built on it."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from rankone.errors import InvalidArgumentError, OutOfRangeError

DEFAULT_SEGMENT_SIZE = 1 << 18


def primes_up_to(n: int) -> np.ndarray:
    """Primes p <= n by a plain Eratosthenes sieve (int64 array)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    return np.flatnonzero(is_prime).astype(np.int64)


@dataclass(frozen=True, eq=False)
class MobiusTable:
    """mu(n) for 1 <= n <= limit.

    ``values`` is an int8 array of length ``limit + 1``; slot 0 holds 0 so that
    ``values[n] == mu(n)`` without index shifting.
    """

    limit: int
    values: np.ndarray = field(repr=False)
    segment_size: int = DEFAULT_SEGMENT_SIZE

    def __post_init__(self):
        if self.values.shape != (self.limit + 1,):
            raise InvalidArgumentError(
                f"values must have length limit+1={self.limit + 1}, got {self.values.shape}"
            )
        self.values.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, MobiusTable):
            return NotImplemented
        return self.limit == other.limit and np.array_equal(self.values, other.values)

    def __len__(self):
        return self.limit

    def __getitem__(self, n: int) -> int:
        if n <= 0:
            return 0
        if n > self.limit:
            raise OutOfRangeError(f"mu({n}) requested but table limit is {self.limit}")
        return int(self.values[n])

    @cached_property
    def prefix(self) -> np.ndarray:
        """prefix[n] = M(n) = sum_{k<=n} mu(k), with prefix[0] = 0."""
        out = np.cumsum(self.values, dtype=np.int64)
        out.setflags(write=False)
        return out

    def window(self, lo: int, hi: int) -> np.ndarray:
        """mu over [lo, hi) as int8, with 0 for every n <= 0 or n > limit."""
        if hi < lo:
            raise InvalidArgumentError(f"empty window [{lo}, {hi})")
        out = np.zeros(hi - lo, dtype=np.int8)
        a, b = max(lo, 1), min(hi, self.limit + 1)
        if a < b:
            out[a - lo : b - lo] = self.values[a:b]
        return out

    def require(self, n: int, what: str = "N") -> None:
        if n > self.limit:
            raise OutOfRangeError(f"{what}={n} exceeds the sieve limit {self.limit}")


def _sieve_segment(lo: int, hi: int, base_primes: np.ndarray) -> np.ndarray:
    n = np.arange(lo, hi, dtype=np.int64)
    mu = np.ones(hi - lo, dtype=np.int8)
    rad = np.ones(hi - lo, dtype=np.int64)
    for p in base_primes:
        p = int(p)
        if p * p >= hi:
            break
        start = (-lo) % p
        mu[start::p] *= -1
        rad[start::p] *= p
        p2 = p * p
        mu[(-lo) % p2 :: p2] = 0
    # a leftover cofactor is a single prime above sqrt(hi)
    mu[rad != n] *= -1
    return mu


def mobius_sieve(
    limit: int, segment_size: int = DEFAULT_SEGMENT_SIZE, threads: int = 1
) -> MobiusTable:
    """Compute mu on [1, limit] one segment at a time.

    Working memory is one segment plus the base primes up to sqrt(limit); the
    output is independent of ``segment_size`` and ``threads``.
    """
    if limit < 1:
        raise InvalidArgumentError(f"limit must be >= 1, got {limit}")
    if segment_size < 1:
        raise InvalidArgumentError(f"segment_size must be >= 1, got {segment_size}")
    base = primes_up_to(math.isqrt(limit))
    values = np.zeros(limit + 1, dtype=np.int8)
    bounds = [(lo, min(lo + segment_size, limit + 1)) for lo in range(1, limit + 1, segment_size)]

    def fill(b):
        lo, hi = b
        values[lo:hi] = _sieve_segment(lo, hi, base)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, bounds))
    else:
        for b in bounds:
            fill(b)
    return MobiusTable(limit=limit, values=values, segment_size=segment_size)


@dataclass(frozen=True)
class MertensReport:
    N: int
    mertens: int

    @property
    def density(self) -> float:
        return self.mertens / self.N

    def riemann_ratio(self, epsilon: float) -> float:
        """|M(N)| / N^(1/2 + epsilon)."""
        return abs(self.mertens) / self.N ** (0.5 + epsilon)


def mertens(table: MobiusTable, N: int) -> MertensReport:
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    table.require(N)
    return MertensReport(N=N, mertens=int(table.prefix[N]))


def chowla_sum(table: MobiusTable, exponents: Sequence[int], N: int) -> int:
    """sum_{n<=N} mu(n+1)^i_1 * ... * mu(n+k)^i_k."""
    exps = list(exponents)
    if not exps:
        raise InvalidArgumentError("exponent list must be nonempty")
    if any(e not in (0, 1, 2) for e in exps):
        raise InvalidArgumentError(f"exponents must lie in {{0, 1, 2}}, got {exps}")
    if 1 not in exps:
        raise InvalidArgumentError("at least one exponent must equal 1")
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    k = len(exps)
    table.require(N + k, "N + k")
    prod = np.ones(N, dtype=np.int64)
    for j, e in enumerate(exps, start=1):
        if e == 0:
            continue
        seg = table.values[1 + j : N + 1 + j].astype(np.int64)
        prod *= seg if e == 1 else seg * seg
    return int(prod.sum())


def masked_mobius_sum(table: MobiusTable, M: Iterable[int] | np.ndarray, N: int) -> int:
    """sum of mu(n) over n in M with 1 <= n <= N."""
    table.require(N)
    pos = np.asarray(M if isinstance(M, np.ndarray) else list(M), dtype=np.int64)
    if pos.size == 0:
        return 0
    pos = pos[(pos >= 1) & (pos <= N)]
    return int(table.values[pos].astype(np.int64).sum())


class HarmonicSum(NamedTuple):
    exact: Fraction
    value: float


def _sum_reciprocals(primes: Sequence[int]) -> Fraction:
    # pairwise merge keeps big-int products balanced; denominators stay coprime
    terms = [(1, int(p)) for p in primes]
    if not terms:
        return Fraction(0)
    while len(terms) > 1:
        merged = []
        for i in range(0, len(terms) - 1, 2):
            (a, b), (c, d) = terms[i], terms[i + 1]
            merged.append((a * d + c * b, b * d))
        if len(terms) % 2:
            merged.append(terms[-1])
        terms = merged
    num, den = terms[0]
    return Fraction(num, den)


def prime_divisors(q: int) -> list[int]:
    out = []
    p = 2
    while p * p <= q:
        if q % p == 0:
            out.append(p)
            while q % p == 0:
                q //= p
        p += 1 if p == 2 else 2
    if q > 1:
        out.append(q)
    return out


def prime_harmonic(mode: str, argument: int) -> HarmonicSum:
    """Sum of 1/p over primes dividing ``argument`` (mode ``"divisors"``) or
    over primes up to ``argument`` (mode ``"upto"``)."""
    if argument < 1:
        raise InvalidArgumentError(f"argument must be >= 1, got {argument}")
    if mode == "divisors":
        primes = prime_divisors(argument)
    elif mode == "upto":
        primes = primes_up_to(argument).tolist()
    else:
        raise InvalidArgumentError(f"unknown mode {mode!r}; use 'divisors' or 'upto'")
    exact = _sum_reciprocals(primes)
    return HarmonicSum(exact, float(exact))
