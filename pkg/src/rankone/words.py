"""Rank-one words from cutting and spacer parameters.

Stage words follow v_0 = "0" and
v_{n+1} = v_n 1^{s_{n,1}} v_n 1^{s_{n,2}} ... v_n 1^{s_{n,r_n}}.
Symbols are held as uint8 0/1 arrays while being built and bit-packed
(first symbol in the least significant bit) once finished.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from rankone.errors import InvalidArgumentError, ResourceLimitError

POSITION_LIMIT = (1 << 63) - 1
DEFAULT_MAX_LENGTH = 1 << 27
DEFAULT_MAX_INDICES = 1 << 26
GENERATORS = ("explicit", "classic-katok", "km", "constant")


def expand_schedule(schedule: Any, depth: int, name: str = "cutting") -> list[int]:
    """A list of ints, or ``{"affine": [a, b]}`` meaning a*n + b for n < depth."""
    if isinstance(schedule, Mapping):
        if set(schedule) != {"affine"}:
            raise InvalidArgumentError(f"{name}: unknown schedule form {sorted(schedule)}")
        a, b = schedule["affine"]
        return [int(a) * n + int(b) for n in range(depth)]
    values = [int(v) for v in schedule]
    if len(values) < depth:
        raise InvalidArgumentError(f"{name}: {len(values)} entries but depth is {depth}")
    return values[:depth]


@dataclass(frozen=True)
class RankOneParams:
    """Cutting parameters r_0..r_{depth-1} and spacer rows s_{n,1..r_n}.

    ``depth`` is the largest stage that can be built, so v_depth is available.
    """

    cutting: tuple[int, ...]
    spacers: tuple[tuple[int, ...], ...]
    generator: str = "explicit"
    m: int | None = None
    t_table: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "cutting", tuple(int(r) for r in self.cutting))
        object.__setattr__(self, "spacers", tuple(tuple(int(s) for s in row) for row in self.spacers))
        if self.generator not in GENERATORS:
            raise InvalidArgumentError(f"unknown generator {self.generator!r}")
        if len(self.cutting) != len(self.spacers):
            raise InvalidArgumentError(
                f"{len(self.cutting)} cutting parameters but {len(self.spacers)} spacer rows"
            )
        for n, (r, row) in enumerate(zip(self.cutting, self.spacers)):
            if r < 2:
                raise InvalidArgumentError(f"cutting[{n}] = {r}; cutting parameters must exceed 1")
            if len(row) != r:
                raise InvalidArgumentError(f"spacers[{n}] has {len(row)} entries, expected r_{n} = {r}")
            if any(s < 0 for s in row):
                raise InvalidArgumentError(f"spacers[{n}] has a negative entry")

    @property
    def depth(self) -> int:
        return len(self.cutting)

    def truncated(self, depth: int) -> RankOneParams:
        return RankOneParams(self.cutting[:depth], self.spacers[:depth], self.generator, self.m,
                             None if self.t_table is None else self.t_table[:depth])

    @cached_property
    def _spacer_shifts(self) -> tuple[np.ndarray, ...]:
        # offset of copy i in v_{n+1} beyond i |v_n|: the spacers laid down before it
        out = []
        for row in self.spacers:
            shift = np.zeros(len(row), dtype=np.int64)
            np.cumsum(np.asarray(row[:-1], dtype=np.int64), out=shift[1:])
            out.append(shift)
        return tuple(out)

    @property
    def all_spacers_zero(self) -> bool:
        return all(s == 0 for row in self.spacers for s in row)

    @classmethod
    def explicit(cls, cutting: Sequence[int], spacers: Sequence[Sequence[int]]) -> RankOneParams:
        return cls(tuple(cutting), tuple(tuple(r) for r in spacers))

    @classmethod
    def constant(cls, r: int, row: Sequence[int], depth: int) -> RankOneParams:
        return cls((r,) * depth, (tuple(row),) * depth, generator="constant")

    @classmethod
    def classic_katok(cls, r_schedule: Sequence[int]) -> RankOneParams:
        rows = []
        for n, r in enumerate(r_schedule):
            if r % 2:
                raise InvalidArgumentError(f"classic Katok needs even r_n; r_{n} = {r}")
            rows.append((0,) * (r // 2) + (1,) * (r // 2))
        return cls(tuple(r_schedule), tuple(rows), generator="classic-katok")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RankOneParams:
        gen = data.get("generator", "explicit")
        if gen not in GENERATORS:
            raise InvalidArgumentError(f"generator: unknown value {gen!r}; expected one of {GENERATORS}")
        if "depth" in data:
            depth = int(data["depth"])
        elif isinstance(data.get("cutting"), list):
            depth = len(data["cutting"])
        else:
            raise InvalidArgumentError("depth: required when cutting is not an explicit list")
        if depth < 0:
            raise InvalidArgumentError(f"depth: must be >= 0, got {depth}")

        if gen == "explicit":
            cutting = expand_schedule(data.get("cutting", []), depth)
            spacers = data.get("spacers", [])
            if len(spacers) < depth:
                raise InvalidArgumentError(f"spacers: {len(spacers)} rows but depth is {depth}")
            return cls.explicit(cutting, spacers[:depth])
        if gen == "constant":
            cutting, spacers = data.get("cutting"), data.get("spacers")
            r = cutting[0] if isinstance(cutting, list) else cutting
            row = spacers[0] if spacers and isinstance(spacers[0], list) else spacers
            if r is None or row is None:
                raise InvalidArgumentError("constant generator needs cutting and spacers")
            return cls.constant(int(r), row, depth)
        if gen == "classic-katok":
            return cls.classic_katok(expand_schedule(data.get("cutting", []), depth))
        # km
        from rankone.katok import KatokParams

        if "m" not in data or "t_table" not in data:
            raise InvalidArgumentError("km generator needs m and t_table")
        kp = KatokParams(
            m=int(data["m"]),
            r_schedule=tuple(expand_schedule(data.get("cutting", []), depth)),
            t_table=tuple(tuple(int(t) for t in row) for row in expand_schedule_rows(data["t_table"], depth)),
        )
        params = kp.to_params()
        given = data.get("spacers")
        if given:
            if [list(r) for r in params.spacers] != [list(r) for r in given[:depth]]:
                raise InvalidArgumentError("spacers: rows disagree with the km t_table")
        return params

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "generator": self.generator,
            "depth": self.depth,
            "cutting": list(self.cutting),
            "spacers": [list(row) for row in self.spacers],
        }
        if self.generator == "km":
            out["m"] = self.m
            out["t_table"] = [list(row) for row in self.t_table or ()]
        return out


def expand_schedule_rows(rows: Any, depth: int) -> list[list[int]]:
    rows = list(rows)
    if len(rows) == 1 and depth > 1:
        rows = rows * depth
    if len(rows) < depth:
        raise InvalidArgumentError(f"t_table: {len(rows)} rows but depth is {depth}")
    return [list(r) for r in rows[:depth]]


# ---------------------------------------------------------------- lengths


def stage_lengths(params: RankOneParams, upto: int | None = None) -> list[int]:
    """[|v_0|, ..., |v_upto|] as exact integers; raises before 63-bit overflow."""
    upto = params.depth if upto is None else upto
    _check_stage(params, upto)
    lengths = [1]
    for n in range(upto):
        nxt = params.cutting[n] * lengths[-1] + sum(params.spacers[n])
        if nxt > POSITION_LIMIT:
            raise ResourceLimitError(f"|v_{n + 1}| = {nxt} overflows 63-bit positions")
        lengths.append(nxt)
    return lengths


def stage_length(params: RankOneParams, n: int) -> int:
    return stage_lengths(params, n)[-1]


def zero_count(params: RankOneParams, n: int) -> int:
    _check_stage(params, n)
    out = 1
    for r in params.cutting[:n]:
        out *= r
    return out


def copy_starts(params: RankOneParams, n: int, length_n: int | None = None) -> np.ndarray:
    """Start positions of the r_n copies of v_n inside v_{n+1}."""
    if length_n is None:
        length_n = stage_length(params, n)
    return np.arange(params.cutting[n], dtype=np.int64) * length_n + params._spacer_shifts[n]


def _check_stage(params: RankOneParams, n: int) -> None:
    if n < 0 or n > params.depth:
        raise InvalidArgumentError(f"stage {n} outside 0..{params.depth}")


# ---------------------------------------------------------------- words


@dataclass(frozen=True, eq=False)
class StageWord:
    stage: int
    length: int
    data: np.ndarray = field(repr=False)

    @classmethod
    def from_symbols(cls, symbols: Sequence[int] | np.ndarray | str, stage: int = -1) -> StageWord:
        if isinstance(symbols, str):
            symbols = np.frombuffer(symbols.encode(), dtype=np.uint8) - ord("0")
        arr = np.asarray(symbols, dtype=np.uint8)
        if arr.size and arr.max() > 1:
            raise InvalidArgumentError("symbols must be 0 or 1")
        return cls(stage, int(arr.size), np.packbits(arr, bitorder="little"))

    @cached_property
    def symbols(self) -> np.ndarray:
        out = np.unpackbits(self.data, count=self.length, bitorder="little")
        out.setflags(write=False)
        return out

    def __len__(self):
        return self.length

    def __getitem__(self, i):
        return self.symbols[i]

    def __eq__(self, other):
        if not isinstance(other, StageWord):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.symbols, other.symbols)

    def __str__(self):
        return (self.symbols + ord("0")).tobytes().decode()

    def count_zeros(self) -> int:
        return self.length - int(np.count_nonzero(self.symbols))

    def to_bytes(self) -> bytes:
        return self.data.tobytes()


def _unfold(prev: np.ndarray, starts: np.ndarray, total: int) -> np.ndarray:
    out = np.ones(total, dtype=np.uint8)
    if prev.size and starts.size:
        zeros_at = np.flatnonzero(prev == 0)
        out[(starts[:, None] + zeros_at[None, :]).ravel()] = 0
    return out


def _symbols(params: RankOneParams, n: int, max_length: int) -> np.ndarray:
    lengths = stage_lengths(params, n)
    for k, length in enumerate(lengths):
        if length > max_length:
            raise ResourceLimitError(f"stage {k} has length {length}, above the budget {max_length}")
    word = np.zeros(1, dtype=np.uint8)
    for k in range(n):
        word = _unfold(word, copy_starts(params, k, lengths[k]), lengths[k + 1])
    return word


def build_stage(params: RankOneParams, n: int, max_length: int = DEFAULT_MAX_LENGTH) -> StageWord:
    """Materialize v_n."""
    word = _symbols(params, n, max_length)
    return StageWord(n, int(word.size), np.packbits(word, bitorder="little"))


def zero_positions(word: StageWord | np.ndarray) -> np.ndarray:
    symbols = word.symbols if isinstance(word, StageWord) else np.asarray(word)
    return np.flatnonzero(symbols == 0).astype(np.int64)


@dataclass(frozen=True, eq=False)
class OccurrenceIndex:
    m: int
    n: int
    indices: np.ndarray = field(repr=False)

    def __len__(self):
        return int(self.indices.size)


def occurrence_index(
    params: RankOneParams, m: int, n: int, max_size: int = DEFAULT_MAX_INDICES
) -> OccurrenceIndex:
    """I_{m,n}: start positions of the copies of v_m inside v_n, in increasing order."""
    if m > n:
        raise InvalidArgumentError(f"occurrence index needs m <= n, got m={m}, n={n}")
    _check_stage(params, m)
    _check_stage(params, n)
    size = 1
    for r in params.cutting[m:n]:
        size *= r
    if size > max_size:
        raise ResourceLimitError(f"|I_{{{m},{n}}}| = {size} exceeds the budget {max_size}")
    lengths = stage_lengths(params, n)
    idx = np.zeros(1, dtype=np.int64)
    for k in range(m, n):
        idx = (copy_starts(params, k, lengths[k])[:, None] + idx[None, :]).ravel()
    return OccurrenceIndex(m, n, idx)


def canonical_prefix(params: RankOneParams, N: int, max_length: int = DEFAULT_MAX_LENGTH) -> np.ndarray:
    """First N symbols of V = lim v_n (uint8 array)."""
    if N < 0:
        raise InvalidArgumentError(f"prefix length must be >= 0, got {N}")
    if N > max_length:
        raise ResourceLimitError(f"prefix length {N} above the budget {max_length}")
    lengths = stage_lengths(params)
    reach = next((k for k, length in enumerate(lengths) if length >= N), None)
    if reach is None:
        raise ResourceLimitError(
            f"depth {params.depth} reaches only |v_{params.depth}| = {lengths[-1]} < {N}"
        )
    if reach == 0:
        return np.zeros(N, dtype=np.uint8)
    prev = _symbols(params, reach - 1, max_length)
    starts = copy_starts(params, reach - 1, lengths[reach - 1])
    used = starts[starts < N]
    # only the copies that begin inside the prefix are laid down
    last = int(used[-1]) + lengths[reach - 1]
    out = _unfold(prev, used, max(last, N))
    return out[:N]


# ---------------------------------------------------------------- reports


_HASH_MOD = (1 << 31) - 1
_HASH_BASE = 1_000_003


def _powers_mod(base: int, count: int, mod: int) -> np.ndarray:
    block = 1024
    small = np.empty(block, dtype=np.int64)
    small[0] = 1
    for i in range(1, block):
        small[i] = small[i - 1] * base % mod
    step = small[-1] * base % mod
    n_blocks = -(-count // block)
    big = np.empty(n_blocks, dtype=np.int64)
    big[0] = 1
    for i in range(1, n_blocks):
        big[i] = big[i - 1] * step % mod
    return ((big[:, None] * small[None, :]) % mod).ravel()[:count]


def smallest_period(symbols: np.ndarray, upto: int | None = None) -> int | None:
    """Smallest p in [1, upto] with w[i] == w[i+p] for every valid i, else None.

    A polynomial hash screens all shifts at once; survivors are confirmed by an
    exact comparison, so the answer never depends on the hash.
    """
    w = np.ascontiguousarray(symbols, dtype=np.uint8)
    n = int(w.size)
    upto = n - 1 if upto is None else min(upto, n - 1)
    if upto < 1:
        return None
    pw = _powers_mod(_HASH_BASE, n + 1, _HASH_MOD)
    # prefix[i] = sum_{j<i} w_j B^j mod P; 0/1 symbols keep the cumsum inside int64
    prefix = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(w.astype(np.int64) * pw[:n], out=prefix[1:])
    prefix %= _HASH_MOD
    p = np.arange(1, upto + 1)
    tail = (prefix[n] - prefix[p]) % _HASH_MOD
    head = (prefix[n - p] * pw[p]) % _HASH_MOD
    buf = w.tobytes()
    for cand in p[tail == head]:
        if buf.startswith(buf[int(cand):]):
            return int(cand)
    return None


@dataclass(frozen=True)
class ParamsReport:
    horizon: int
    cutting: list[int]
    spacer_totals: list[int]
    min_bound: int
    bound: int | None
    bounded_up_to_horizon: bool
    eq2_partial_sums: list[Fraction]
    aperiodic_heuristic: bool | None
    period_checked_length: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "horizon": self.horizon,
            "cutting": self.cutting,
            "spacer_totals": self.spacer_totals,
            "min_bound": self.min_bound,
            "bound": self.bound,
            "bounded_up_to_horizon": self.bounded_up_to_horizon,
            "eq2_partial_sums": [
                {"exact": f"{s.numerator}/{s.denominator}", "value": float(s)} for s in self.eq2_partial_sums
            ],
            "aperiodic_heuristic": self.aperiodic_heuristic,
            "aperiodic_heuristic_note": "heuristic: v_horizon has no period <= |v_horizon|/2 "
            "(checked on the first period_checked_length symbols)",
            "period_checked_length": self.period_checked_length,
        }


def params_report(
    params: RankOneParams, horizon: int, bound: int | None = None, period_cap: int = 1 << 20
) -> ParamsReport:
    """Structural summary up to ``horizon``.

    Boundedness is only "bounded up to the horizon": ``min_bound`` is the
    smallest M with r_n < M and s_{n,i} < M for n < horizon, and the flag
    compares it with ``bound`` when one is declared.
    """
    _check_stage(params, horizon)
    lengths = stage_lengths(params, horizon)
    cutting = list(params.cutting[:horizon])
    totals = [sum(row) for row in params.spacers[:horizon]]
    biggest = max([*cutting, *(s for row in params.spacers[:horizon] for s in row)], default=0)
    min_bound = biggest + 1
    partial, acc = [], Fraction(0)
    for n in range(horizon):
        acc += Fraction(lengths[n + 1] - cutting[n] * lengths[n], lengths[n + 1])
        partial.append(acc)
    checked = min(lengths[horizon], period_cap)
    try:
        prefix = canonical_prefix(params.truncated(horizon), checked)
        aperiodic = smallest_period(prefix, checked // 2) is None
    except ResourceLimitError:
        aperiodic, checked = None, 0
    return ParamsReport(
        horizon=horizon,
        cutting=cutting,
        spacer_totals=totals,
        min_bound=min_bound,
        bound=bound,
        bounded_up_to_horizon=bound is None or min_bound <= bound,
        eq2_partial_sums=partial,
        aperiodic_heuristic=aperiodic,
        period_checked_length=checked,
    )
