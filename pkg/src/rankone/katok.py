"""Generalized Katok spacer schemes, segment data and growth-condition reports."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from rankone.errors import IntegrityError, InvalidArgumentError
from rankone.words import RankOneParams, stage_lengths


@dataclass(frozen=True)
class KatokParams:
    """m constant runs per spacer row; t_table[n] holds (t_{n,1}, ..., t_{n,m})."""

    m: int
    r_schedule: tuple[int, ...]
    t_table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.m < 2:
            raise InvalidArgumentError(f"m must be >= 2, got {self.m}")
        if len(self.t_table) < len(self.r_schedule):
            raise InvalidArgumentError(
                f"t_table has {len(self.t_table)} rows for {len(self.r_schedule)} stages"
            )
        for n, row in enumerate(self.t_table):
            if len(row) != self.m:
                raise InvalidArgumentError(f"t_table[{n}] has {len(row)} entries, expected m = {self.m}")
            if any(t < 0 or t > self.m - 1 for t in row):
                raise InvalidArgumentError(f"t_table[{n}] = {row}: entries must lie in [0, {self.m - 1}]")

    @property
    def depth(self) -> int:
        return len(self.r_schedule)

    def to_params(self) -> RankOneParams:
        rows = tuple(tuple(km_spacers(self, n)) for n in range(self.depth))
        return RankOneParams(
            self.r_schedule, rows, generator="km", m=self.m, t_table=self.t_table[: self.depth]
        )


def km_spacers(kp: KatokParams, n: int) -> list[int]:
    """s_{n,i} = t_{n, ceil(m i / r_n)} for 1 <= i <= r_n."""
    r, m = kp.r_schedule[n], kp.m
    if r % m:
        raise InvalidArgumentError(f"r_{n} = {r} is not divisible by m = {m}")
    t = kp.t_table[n]
    return [t[-(-m * i // r) - 1] for i in range(1, r + 1)]


@dataclass(frozen=True)
class SegmentationRow:
    stage: int
    sigma: tuple[int, ...]
    q: tuple[int, ...]


def segmentation(kp: KatokParams, n: int, params: RankOneParams | None = None) -> SegmentationRow:
    """Boundaries of the runs u_{n,1..m} inside v_{n+1} and their periods."""
    params = kp.to_params() if params is None else params
    lengths = stage_lengths(params, n + 1)
    vn = lengths[n]
    reps = kp.r_schedule[n] // kp.m
    t = kp.t_table[n]
    sigma = [0]
    for tl in t:
        sigma.append(sigma[-1] + (vn + tl) * reps)
    if sigma[-1] != lengths[n + 1]:
        raise IntegrityError(f"sigma_{{{n},{kp.m}}} = {sigma[-1]} but |v_{n + 1}| = {lengths[n + 1]}")
    return SegmentationRow(n, tuple(sigma), tuple(vn + tl for tl in t))


def ccc_check(S: Iterable[int] | np.ndarray, q: int, a: int, b: int) -> bool:
    """True iff membership in S is q-periodic on [a, b): n in S <=> n+q in S for n in [a, b-q)."""
    if b < a:
        raise InvalidArgumentError(f"interval [{a}, {b}) is reversed")
    if q < 1:
        raise InvalidArgumentError(f"modulus must be >= 1, got {q}")
    if b - a <= q:
        return True
    pos = np.asarray(S if isinstance(S, np.ndarray) else list(S), dtype=np.int64)
    pos = pos[(pos >= a) & (pos < b)]
    member = np.zeros(b - a, dtype=bool)
    member[pos - a] = True
    return bool(np.array_equal(member[:-q], member[q:]))


@dataclass(frozen=True)
class ChangePoints:
    c_list: tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.c_list)


def change_points(row: Sequence[int]) -> ChangePoints:
    """C_n = {1, r_n} together with every 2 <= i <= r_n - 1 where s_{i-1} != s_i (1-based)."""
    r = len(row)
    if r < 2:
        raise InvalidArgumentError(f"spacer row needs r_n >= 2 entries, got {r}")
    inner = [i for i in range(2, r) if row[i - 2] != row[i - 1]]
    return ChangePoints(tuple(sorted({1, r, *inner})))


def _loglog(x: float) -> float | None:
    if x <= 1:
        return None
    inner = math.log(x)
    return math.log(inner) if inner > 0 else None


def _logloglog(x: float) -> float | None:
    ll = _loglog(x)
    if ll is None or ll <= 0:
        return None
    return math.log(ll)


def cond3_term(r: int, length: int) -> float | None:
    """log log r / log log log |v_n| (natural logs), None where undefined."""
    num, den = _loglog(r), _logloglog(length)
    if num is None or den is None or den <= 0:
        return None
    return num / den


def cond_i_term(r: int, p: int) -> float | None:
    """log log(r/p) / log log r, None where undefined."""
    num, den = _loglog(r / p), _loglog(r)
    if num is None or den is None or den <= 0:
        return None
    return num / den


def cond_iv_holds(row: Sequence[int], m: int, epsilon: float) -> bool:
    """Keep the indices of the m most frequent spacer values; they must cover (1-eps) r_n."""
    top = sum(c for _, c in Counter(row).most_common(m))
    return top >= (1 - epsilon) * len(row)


@dataclass
class StageConditions:
    stage: int
    r: int
    length: int
    p: int
    cond3: float | None
    cond_i: float | None
    cond_ii: float
    cond_ii_running_max: float
    flat_stack_ratio: float
    cond_iv: dict[str, bool]
    skipped: list[str] = field(default_factory=list)


@dataclass
class ConditionReport:
    horizon: int
    tail: int
    stages: list[StageConditions]

    def _tail_range(self, values: list[float | None]) -> dict[str, float | None]:
        valid = [v for v in values if v is not None][-self.tail :] if self.tail else []
        return {"min": min(valid) if valid else None, "max": max(valid) if valid else None, "count": len(valid)}

    @property
    def cond3_sequence(self) -> list[float | None]:
        return [s.cond3 for s in self.stages]

    @property
    def cond_i_sequence(self) -> list[float | None]:
        return [s.cond_i for s in self.stages]

    @property
    def cond_iii_sequence(self) -> list[float | None]:
        return self.cond3_sequence

    @property
    def cond_ii_K(self) -> float | None:
        return self.stages[-1].cond_ii_running_max if self.stages else None

    @property
    def flat_stack_ratios(self) -> list[float]:
        return [s.flat_stack_ratio for s in self.stages]

    def to_dict(self) -> dict[str, Any]:
        return {
            "horizon": self.horizon,
            "note": "finite-horizon sequences; liminf/limsup are not extrapolated",
            "cond3_sequence": self.cond3_sequence,
            "cond3_tail": self._tail_range(self.cond3_sequence),
            "cond_i_sequence": self.cond_i_sequence,
            "cond_i_tail": self._tail_range(self.cond_i_sequence),
            "cond_ii_sequence": [s.cond_ii for s in self.stages],
            "cond_ii_K": self.cond_ii_K,
            "cond_iii_sequence": self.cond_iii_sequence,
            "cond_iii_tail": self._tail_range(self.cond_iii_sequence),
            "cond_iv": [s.cond_iv for s in self.stages],
            "flat_stack_ratios": self.flat_stack_ratios,
            "stages": [
                {
                    "n": s.stage, "r_n": s.r, "v_n_length": s.length, "p_n": s.p,
                    "cond3": s.cond3, "cond_i": s.cond_i, "cond_ii": s.cond_ii,
                    "flat_stack_ratio": s.flat_stack_ratio, "skipped": s.skipped,
                }
                for s in self.stages
            ],
        }

    def csv_rows(self) -> list[list[Any]]:
        keys = sorted({k for s in self.stages for k in s.cond_iv})
        header = ["n", "r_n", "v_n_length", "p_n", "cond3", "cond_i", "cond_ii",
                  "cond_ii_running_max", "flat_stack_ratio", *[f"cond_iv[{k}]" for k in keys], "skipped"]
        rows = [header]
        for s in self.stages:
            rows.append([
                s.stage, s.r, s.length, s.p,
                "" if s.cond3 is None else repr(s.cond3),
                "" if s.cond_i is None else repr(s.cond_i),
                repr(s.cond_ii), repr(s.cond_ii_running_max), repr(s.flat_stack_ratio),
                *[s.cond_iv.get(k, "") for k in keys],
                ";".join(s.skipped),
            ])
        return rows


def condition_report(
    params: RankOneParams,
    horizon: int,
    m_candidates: Sequence[int] = (1, 2, 3, 4),
    epsilons: Sequence[float] = (0.1, 0.01),
    tail: int = 3,
) -> ConditionReport:
    """Per-stage terms of the growth conditions for n < horizon."""
    if horizon > params.depth:
        raise InvalidArgumentError(f"horizon {horizon} exceeds depth {params.depth}")
    lengths = stage_lengths(params, horizon)
    stages, running = [], 0.0
    for n in range(horizon):
        r, vn, row = params.cutting[n], lengths[n], params.spacers[n]
        cp = change_points(row)
        skipped = []
        if r < 16 or vn < 16:
            skipped.append("cond3: needs r_n >= 16 and |v_n| >= 16")
            c3 = None
        else:
            c3 = cond3_term(r, vn)
            if c3 is None:
                skipped.append("cond3: iterated log not positive")
        ci = cond_i_term(r, cp.p)
        if ci is None:
            skipped.append("cond_i: iterated log not positive")
        c2 = sum(row) / (r * vn)
        running = max(running, c2)
        iv = {f"m={m},eps={e}": cond_iv_holds(row, m, e) for m in m_candidates for e in epsilons}
        stages.append(StageConditions(
            stage=n, r=r, length=vn, p=cp.p, cond3=c3, cond_i=ci, cond_ii=c2,
            cond_ii_running_max=running, flat_stack_ratio=sum(1 for s in row if s) / r,
            cond_iv=iv, skipped=skipped,
        ))
    return ConditionReport(horizon, tail, stages)
