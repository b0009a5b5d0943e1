import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import occurrences, unfold_word
from rankone.errors import InvalidArgumentError, ResourceLimitError
from rankone.words import (
    RankOneParams,
    StageWord,
    build_stage,
    canonical_prefix,
    occurrence_index,
    params_report,
    smallest_period,
    stage_length,
    stage_lengths,
    zero_count,
    zero_positions,
)

V1 = RankOneParams.explicit([4], [[0, 0, 1, 1]])
V2 = RankOneParams.explicit([2, 2], [[0, 1], [0, 1]])


@st.composite
def small_params(draw, max_depth=5, max_r=6, max_s=3):
    depth = draw(st.integers(0, max_depth))
    cutting = [draw(st.integers(2, max_r)) for _ in range(depth)]
    spacers = [[draw(st.integers(0, max_s)) for _ in range(r)] for r in cutting]
    return RankOneParams.explicit(cutting, spacers)


class TestBuild:
    def test_stage_zero(self):
        assert str(build_stage(V1, 0)) == "0"

    def test_one_step(self):
        assert str(build_stage(V1, 1)) == "000101"

    def test_two_steps(self):
        assert str(build_stage(V2, 2)) == "0010011"

    @given(small_params())
    @settings(max_examples=60, deadline=None)
    def test_against_string_unfolding(self, p):
        for n in range(p.depth + 1):
            assert str(build_stage(p, n)) == unfold_word(p.cutting[:n], p.spacers[:n])

    def test_budget_names_the_stage(self):
        p = RankOneParams.constant(10, [0] * 10, 4)
        with pytest.raises(ResourceLimitError, match="stage 3"):
            build_stage(p, 4, max_length=500)

    def test_packed_layout(self):
        w = build_stage(V2, 2)
        # 0010011 -> bits 0,0,1,0,0,1,1 from the least significant bit up
        assert w.to_bytes() == bytes([0b1100100])

    def test_stage_outside_depth(self):
        with pytest.raises(InvalidArgumentError):
            build_stage(V2, 3)


class TestParams:
    @pytest.mark.parametrize(
        "cutting, spacers",
        [([1], [[0]]), ([3], [[0, 0]]), ([2], [[0, -1]]), ([2, 2], [[0, 0]])],
    )
    def test_invalid(self, cutting, spacers):
        with pytest.raises(InvalidArgumentError):
            RankOneParams(tuple(cutting), tuple(tuple(r) for r in spacers))

    def test_classic_katok_rows(self):
        p = RankOneParams.classic_katok([2, 4])
        assert p.spacers == ((0, 1), (0, 0, 1, 1))
        with pytest.raises(InvalidArgumentError):
            RankOneParams.classic_katok([3])

    @pytest.mark.parametrize(
        "data",
        [
            {"generator": "explicit", "depth": 2, "cutting": [2, 2], "spacers": [[0, 1], [0, 1]]},
            {"generator": "classic-katok", "depth": 3, "cutting": {"affine": [2, 2]}},
            {"generator": "constant", "depth": 3, "cutting": [3], "spacers": [[0, 1, 2]]},
            {"generator": "km", "depth": 2, "m": 2, "cutting": [4, 6], "t_table": [[0, 1], [1, 0]]},
        ],
    )
    def test_json_round_trip(self, data):
        p = RankOneParams.from_dict(data)
        again = RankOneParams.from_dict(json.loads(json.dumps(p.to_dict())))
        assert again == p

    def test_affine_schedule(self):
        p = RankOneParams.from_dict({"generator": "classic-katok", "depth": 3, "cutting": {"affine": [2, 2]}})
        assert p.cutting == (2, 4, 6)


class TestLengths:
    def test_small(self):
        assert (stage_length(V1, 0), zero_count(V1, 0)) == (1, 1)
        assert (stage_length(V1, 1), zero_count(V1, 1)) == (6, 4)

    def test_katok_depth20_cross_check(self):
        p = RankOneParams.classic_katok([2 * n + 2 for n in range(20)])
        for n in range(13):
            length = stage_length(p, n)
            if length <= 1 << 24:
                w = build_stage(p, n)
                assert w.length == length
                assert w.count_zeros() == zero_count(p, n)
            assert length == p.cutting[n - 1] * stage_length(p, n - 1) + sum(p.spacers[n - 1]) if n else length == 1
        # lengths grow past 2^63 before stage 20
        with pytest.raises(ResourceLimitError):
            stage_lengths(p)

    def test_overflow_guard(self):
        p = RankOneParams.constant(1 << 20, [0] * (1 << 20), 4)
        with pytest.raises(ResourceLimitError, match="63-bit"):
            stage_lengths(p)


class TestZeroPositions:
    @pytest.mark.parametrize("word, expected", [("0", [0]), ("000101", [0, 1, 2, 4]), ("0010011", [0, 1, 3, 4])])
    def test_read_off(self, word, expected):
        assert zero_positions(StageWord.from_symbols(word)).tolist() == expected


class TestOccurrences:
    def test_diagonal(self):
        assert occurrence_index(V2, 2, 2).indices.tolist() == [0]

    def test_I12(self):
        assert occurrence_index(V2, 1, 2).indices.tolist() == [0, 3]

    def test_I02_is_zero_set(self):
        assert occurrence_index(V2, 0, 2).indices.tolist() == zero_positions(build_stage(V2, 2)).tolist()

    def test_order(self):
        with pytest.raises(InvalidArgumentError):
            occurrence_index(V2, 2, 1)

    @given(small_params(max_depth=4))
    @settings(max_examples=50, deadline=None)
    def test_against_concatenation_oracle(self, p):
        for m in range(p.depth + 1):
            for n in range(m, p.depth + 1):
                got = occurrence_index(p, m, n).indices.tolist()
                assert got == occurrences(p.cutting, p.spacers, m, n)

    def test_size_budget(self):
        p = RankOneParams.constant(10, [0] * 10, 6)
        with pytest.raises(ResourceLimitError):
            occurrence_index(p, 0, 6, max_size=1000)


class TestPrefix:
    def test_first_symbol(self):
        assert canonical_prefix(V2, 1).tolist() == [0]

    def test_katok_prefix(self):
        assert "".join(map(str, canonical_prefix(V2, 6))) == "001001"

    def test_insufficient_depth(self):
        with pytest.raises(ResourceLimitError):
            canonical_prefix(V2, 8)

    @given(small_params(), st.integers(1, 400))
    @settings(max_examples=60, deadline=None)
    def test_stable_across_stages(self, p, N):
        lengths = stage_lengths(p)
        for n, length in enumerate(lengths):
            k = min(length, N)
            if length >= N:
                assert np.array_equal(canonical_prefix(p, N), build_stage(p, n).symbols[:N])
            assert np.array_equal(canonical_prefix(p.truncated(n), k), build_stage(p, n).symbols[:k])


class TestReport:
    def test_no_spacers(self):
        p = RankOneParams.constant(2, [0, 0], 5)
        rep = params_report(p, 5)
        assert all(s == 0 for s in rep.eq2_partial_sums)
        assert rep.aperiodic_heuristic is False

    def test_stage_zero_term(self):
        assert params_report(V1, 1).eq2_partial_sums == [Fraction(1, 3)]

    def test_katok_partial_sums_grow_below_declared_bound(self):
        p = RankOneParams.classic_katok([2 * n + 2 for n in range(10)])
        rep = params_report(p, 10, bound=100)
        sums = rep.eq2_partial_sums
        assert all(a < b for a, b in zip(sums, sums[1:]))
        assert rep.bounded_up_to_horizon and rep.min_bound == 21
        lengths = stage_lengths(p)
        expected = sum(Fraction(lengths[n + 1] - p.cutting[n] * lengths[n], lengths[n + 1]) for n in range(10))
        assert sums[-1] == expected
        assert not params_report(p, 10, bound=20).bounded_up_to_horizon

    def test_period_helper(self):
        assert smallest_period(np.array([0, 1, 0, 1, 0]), 2) == 2
        assert smallest_period(np.array([0, 0, 1]), 1) is None
