"""Building blocks, residue-set fits and odometer-clause checks on finite stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from rankone.errors import IntegrityError, InvalidArgumentError, ResourceLimitError
from rankone.words import (
    DEFAULT_MAX_LENGTH,
    RankOneParams,
    build_stage,
    occurrence_index,
    stage_lengths,
    zero_positions,
)


@dataclass(frozen=True, eq=False)
class BuildingBlock:
    """A with 0 in A, and translates a_i such that the zero set is the union of A + a_i."""

    A: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)
    window: int
    stage: int

    @property
    def max_a(self) -> int:
        return int(self.A[-1])

    def union(self) -> np.ndarray:
        return np.unique((self.offsets[:, None] + self.A[None, :]).ravel())

    def covered(self) -> int:
        """End of the region where the union matches the zero set exactly."""
        return int(self.offsets[-1]) + self.max_a + 1 if self.offsets.size else 0


@dataclass(frozen=True)
class ResidueSet:
    k: int
    members: frozenset[int]

    def __post_init__(self):
        if any(d < 0 or d >= self.k for d in self.members):
            raise InvalidArgumentError(f"residues {sorted(self.members)} not all in [0, {self.k})")

    def sorted(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class ResidueFit:
    residues: ResidueSet
    discrepancy: Fraction
    degenerate: bool = False

    def __iter__(self):
        return iter((self.residues, self.discrepancy))


def _check_offsets(offsets: np.ndarray, max_a: int) -> None:
    gaps = np.diff(offsets)
    bad = (gaps <= max_a) & (gaps != 0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise IntegrityError(
            f"offsets {int(offsets[i])} and {int(offsets[i + 1])} are closer than max(A) = {max_a}"
        )


def block_decomposition(
    params: RankOneParams, block_stage: int, window: int, max_length: int = DEFAULT_MAX_LENGTH
) -> BuildingBlock:
    """Tile the zero set of V on [0, window) by copies of A = zero_positions(v_n)."""
    lengths = stage_lengths(params)
    if block_stage > params.depth:
        raise InvalidArgumentError(f"block stage {block_stage} exceeds depth {params.depth}")
    host = next((h for h in range(block_stage, params.depth + 1) if lengths[h] >= window), None)
    if host is None:
        raise ResourceLimitError(f"no stage up to depth {params.depth} has length >= {window}")
    A = zero_positions(build_stage(params, block_stage, max_length))
    starts = occurrence_index(params, block_stage, host).indices
    offsets = starts[starts + A[-1] < window]
    _check_offsets(offsets, int(A[-1]))
    return BuildingBlock(A=A, offsets=offsets, window=window, stage=block_stage)


def _class_counts(A: np.ndarray, k: int, upper: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-residue (members of A, integers in [0, upper]) counts mod k."""
    inside = np.bincount(A % k, minlength=k)
    total = np.full(k, (upper + 1) // k, dtype=np.int64)
    total[: (upper + 1) % k] += 1
    return inside, total


def _majority(inside: np.ndarray, total: np.ndarray) -> tuple[np.ndarray, int]:
    outside = total - inside
    take = inside > outside  # a tie excludes the class
    cost = int(np.where(take, outside, inside).sum())
    return take, cost


def optimal_residue_set(A: Iterable[int] | np.ndarray, k: int) -> ResidueFit:
    """D minimizing |{0 <= n <= max A : n mod k in D} symmetric-difference A| / max A.

    Residue classes are disjoint, so including exactly the classes that are
    more than half inside A is optimal.
    """
    if k < 1:
        raise InvalidArgumentError(f"modulus must be >= 1, got {k}")
    arr = np.unique(np.asarray(A if isinstance(A, np.ndarray) else list(A), dtype=np.int64))
    if arr.size == 0 or arr[0] != 0:
        raise InvalidArgumentError("A must be nonempty and contain 0")
    max_a = int(arr[-1])
    if max_a == 0:
        return ResidueFit(ResidueSet(k, frozenset({0})), Fraction(0), degenerate=True)
    inside, total = _class_counts(arr, k, max_a)
    take, cost = _majority(inside, total)
    return ResidueFit(ResidueSet(k, frozenset(int(d) for d in np.flatnonzero(take))), Fraction(cost, max_a))


@dataclass
class TargetEvidence:
    target: int
    stage: int | None
    max_a: int | None
    residues: list[int] | None
    discrepancy: Fraction | None

    @property
    def conclusive(self) -> bool:
        return self.stage is not None


@dataclass
class AcccReport:
    epsilon: float
    per_k: dict[int, list[TargetEvidence]]
    stages_examined: list[int]

    def witnesses(self) -> list[int]:
        """k for which every target has some block with discrepancy < epsilon."""
        eps = Fraction(str(self.epsilon))
        return [
            k for k, rows in self.per_k.items()
            if rows and all(r.conclusive and r.discrepancy < eps for r in rows)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "note": "finite-horizon evidence for P(M, eps, k), not a proof that M is an accc",
            "stages_examined": self.stages_examined,
            "witnesses": self.witnesses(),
            "per_k": {
                str(k): [
                    {
                        "target": r.target,
                        "status": "ok" if r.conclusive else "inconclusive",
                        "stage": r.stage,
                        "max_A": r.max_a,
                        "D": r.residues,
                        "discrepancy": None if r.discrepancy is None else float(r.discrepancy),
                        "discrepancy_exact": None if r.discrepancy is None
                        else f"{r.discrepancy.numerator}/{r.discrepancy.denominator}",
                    }
                    for r in rows
                ]
                for k, rows in self.per_k.items()
            },
        }


def default_k_candidates(params: RankOneParams, max_length: int = DEFAULT_MAX_LENGTH) -> list[int]:
    lengths = [n for n in stage_lengths(params)[1:] if n <= max_length]
    return sorted(set(range(2, 65)) | set(lengths))


def accc_check(
    params: RankOneParams,
    epsilon: float,
    k_candidates: Sequence[int] | None = None,
    n_targets: Sequence[int] = (10, 100, 1000),
    max_length: int = DEFAULT_MAX_LENGTH,
) -> AcccReport:
    """Search stage blocks A_n = zero_positions(v_n) for residue fits below epsilon."""
    if params.all_spacers_zero:
        raise InvalidArgumentError(
            "nontriviality warning: every spacer is 0, so V is periodic; refusing to certify"
        )
    if not 0 < epsilon:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    ks = default_k_candidates(params, max_length) if k_candidates is None else list(k_candidates)
    lengths = stage_lengths(params)
    top = max(n for n in range(params.depth + 1) if lengths[n] <= max_length)
    zeros = zero_positions(build_stage(params, top, max_length))
    # v_n is a prefix of v_top, so each stage block is a slice of one zero set
    blocks = {n: zeros[: np.searchsorted(zeros, lengths[n])] for n in range(top + 1)}
    per_k: dict[int, list[TargetEvidence]] = {}
    for k in ks:
        rows = []
        for target in n_targets:
            best: TargetEvidence | None = None
            for n, A in blocks.items():
                if int(A[-1]) < target:
                    continue
                fit = optimal_residue_set(A, k)
                if best is None or fit.discrepancy < best.discrepancy:
                    best = TargetEvidence(target, n, int(A[-1]), fit.residues.sorted(), fit.discrepancy)
            rows.append(best or TargetEvidence(target, None, None, None, None))
        per_k[k] = rows
    return AcccReport(epsilon, per_k, sorted(blocks))


@dataclass(frozen=True)
class ClauseA:
    residue: int
    fraction: Fraction


def odometer_clause_a(params: RankOneParams, m: int, n: int, k: int) -> ClauseA:
    """Best single residue j for I_{m,n}: minimizes the share of indices not congruent to j."""
    if not m < n:
        raise InvalidArgumentError(f"clause (a) needs m < n, got m={m}, n={n}")
    if k < 1:
        raise InvalidArgumentError(f"modulus must be >= 1, got {k}")
    idx = occurrence_index(params, m, n).indices
    counts = np.bincount(idx % k, minlength=k)
    j = int(np.argmax(counts))
    return ClauseA(j, Fraction(int(idx.size - counts[j]), int(idx.size)))


def odometer_clause_b(params: RankOneParams, l: int, m: int, k: int) -> ResidueFit:
    """D fitting I_{l,m} inside {0, ..., |v_m|}, normalized by |I_{l,m}|."""
    if l > m:
        raise InvalidArgumentError(f"clause (b) needs l <= m, got l={l}, m={m}")
    if k < 1:
        raise InvalidArgumentError(f"modulus must be >= 1, got {k}")
    idx = occurrence_index(params, l, m).indices
    upper = stage_lengths(params, m)[m]
    inside, total = _class_counts(idx, k, upper)
    take, cost = _majority(inside, total)
    return ResidueFit(ResidueSet(k, frozenset(int(d) for d in np.flatnonzero(take))), Fraction(cost, int(idx.size)))
