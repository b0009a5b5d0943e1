import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankone.errors import IntegrityError, InvalidArgumentError
from rankone.katok import (
    KatokParams,
    ccc_check,
    change_points,
    cond3_term,
    cond_i_term,
    cond_iv_holds,
    condition_report,
    km_spacers,
    segmentation,
)
from rankone.words import RankOneParams, build_stage, stage_lengths, zero_positions


def random_km(rng, depth=4, max_m=4, max_reps=3):
    m = rng.randint(2, max_m)
    r = [m * rng.randint(1, max_reps) for _ in range(depth)]
    t = [[rng.randint(0, m - 1) for _ in range(m)] for _ in range(depth)]
    return KatokParams(m, tuple(r), tuple(tuple(row) for row in t))


class TestSpacers:
    @pytest.mark.parametrize(
        "m, r, t, row",
        [
            (2, 4, (0, 1), [0, 0, 1, 1]),
            (2, 2, (0, 1), [0, 1]),
            (3, 6, (2, 0, 1), [2, 2, 0, 0, 1, 1]),
        ],
    )
    def test_examples(self, m, r, t, row):
        assert km_spacers(KatokParams(m, (r,), (t,)), 0) == row

    def test_indivisible(self):
        with pytest.raises(InvalidArgumentError):
            km_spacers(KatokParams(3, (4,), ((0, 1, 2),)), 0)

    def test_t_range(self):
        with pytest.raises(InvalidArgumentError):
            KatokParams(2, (4,), ((0, 2),))

    @given(st.integers(0, 10_000))
    def test_constant_runs(self, seed):
        kp = random_km(random.Random(seed), depth=1)
        row, m, r = km_spacers(kp, 0), kp.m, kp.r_schedule[0]
        runs = [row[i * r // m : (i + 1) * r // m] for i in range(m)]
        assert runs == [[kp.t_table[0][i]] * (r // m) for i in range(m)]

    def test_classic_matches_m2(self):
        kp = KatokParams(2, (4, 6, 8), ((0, 1),) * 3)
        assert kp.to_params().spacers == RankOneParams.classic_katok([4, 6, 8]).spacers


class TestSegmentation:
    def test_stage_zero(self):
        row = segmentation(KatokParams(2, (4, 4), ((0, 1), (0, 1))), 0)
        assert row.sigma == (0, 2, 6) and row.q == (1, 2)

    def test_stage_one(self):
        row = segmentation(KatokParams(2, (4, 4), ((0, 1), (0, 1))), 1)
        assert row.sigma == (0, 12, 26) and row.q == (6, 7)

    def test_cross_check(self):
        kp = KatokParams(2, (4, 4), ((0, 1), (0, 1)))
        wrong = RankOneParams.explicit([4, 4], [[0, 0, 1, 0], [0, 0, 0, 0]])
        with pytest.raises(IntegrityError):
            segmentation(kp, 0, wrong)

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_ends_at_next_length(self, seed):
        kp = random_km(random.Random(seed))
        lengths = stage_lengths(kp.to_params())
        for n in range(kp.depth):
            sigma = segmentation(kp, n).sigma
            assert sigma[0] == 0 and sigma[-1] == lengths[n + 1]
            assert all(a < b for a, b in zip(sigma, sigma[1:]))


class TestCcc:
    def test_vacuous(self):
        assert ccc_check([0, 5], 10, 0, 10)
        assert ccc_check([], 3, 4, 4)

    def test_multiples(self):
        assert ccc_check(range(0, 30, 3), 3, 0, 30)
        assert not ccc_check([0, 3, 6, 10], 3, 0, 12)

    def test_reversed(self):
        with pytest.raises(InvalidArgumentError):
            ccc_check([], 2, 5, 4)

    def test_window_ignores_outside(self):
        assert ccc_check([0, 1, 4, 8, 12, 99], 4, 4, 16)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_km_segments(self, seed):
        kp = random_km(random.Random(seed))
        params = kp.to_params()
        zeros = zero_positions(build_stage(params, kp.depth))
        for n in range(kp.depth):
            seg = segmentation(kp, n, params)
            for l in range(kp.m):
                assert ccc_check(zeros, seg.q[l], seg.sigma[l], seg.sigma[l + 1])

    def test_non_km_segment_fails(self):
        # a row with three values in two halves breaks the period in the first half
        kp = KatokParams(2, (4,), ((0, 1),))
        p = RankOneParams.explicit([4], [[0, 1, 1, 1]])
        seg = segmentation(kp, 0, RankOneParams.explicit([4], [[0, 0, 1, 1]]))
        zeros = zero_positions(build_stage(p, 1))
        assert not ccc_check(zeros, seg.q[0], 0, 5)


class TestChangePoints:
    def test_examples(self):
        assert change_points([0, 0, 1, 1]).c_list == (1, 3, 4)
        assert change_points([2] * 5).c_list == (1, 5)
        cp = change_points([0, 1, 0, 1])
        assert cp.c_list == (1, 2, 3, 4) and cp.p == 4

    def test_short_row(self):
        with pytest.raises(InvalidArgumentError):
            change_points([0])

    @given(st.integers(0, 10_000))
    def test_km_bound(self, seed):
        kp = random_km(random.Random(seed), depth=1, max_m=6, max_reps=5)
        cp = change_points(km_spacers(kp, 0))
        assert cp.c_list[0] == 1 and cp.c_list[-1] == kp.r_schedule[0]
        assert list(cp.c_list) == sorted(set(cp.c_list))
        assert cp.p <= 2 * kp.m


class TestConditionTerms:
    def test_cond3_example(self):
        assert cond3_term(256, 10**6) == pytest.approx(1.774, abs=5e-4)
        assert cond3_term(256, 10**6) == pytest.approx(
            math.log(math.log(256)) / math.log(math.log(math.log(10**6))), rel=1e-12
        )

    def test_cond_i_example(self):
        assert cond_i_term(10**6, 3) == pytest.approx(0.968, abs=5e-4)

    def test_undefined(self):
        assert cond3_term(1, 10**6) is None
        assert cond3_term(256, 10) is None
        assert cond_i_term(4, 4) is None

    def test_cond_iv(self):
        assert cond_iv_holds([0, 0, 1, 1], 2, 0.01)
        assert not cond_iv_holds([0, 0, 1, 1], 1, 0.1)
        assert cond_iv_holds([0] * 19 + [1], 1, 0.05)

    @given(st.integers(0, 10_000), st.floats(1e-6, 0.9))
    def test_cond_iv_true_number_of_values(self, seed, eps):
        kp = random_km(random.Random(seed), depth=1)
        row = km_spacers(kp, 0)
        assert cond_iv_holds(row, len(set(kp.t_table[0])), eps)


class TestReport:
    def test_classic_flat_stack(self):
        rep = condition_report(RankOneParams.classic_katok([2, 4, 16, 256]), 4)
        assert rep.flat_stack_ratios == [0.5] * 4

    def test_skips_small_stages(self):
        rep = condition_report(RankOneParams.classic_katok([16, 256, 65536]), 3)
        assert rep.cond3_sequence[0] is None and rep.stages[0].skipped
        assert rep.cond3_sequence[1] == pytest.approx(cond3_term(256, 24))
        assert rep.cond_iii_sequence == rep.cond3_sequence

    def test_cond_ii(self):
        p = RankOneParams.explicit([2, 2], [[0, 2], [1, 1]])
        rep = condition_report(p, 2)
        assert [s.cond_ii for s in rep.stages] == [1.0, 2 / 8]
        assert rep.cond_ii_K == 1.0

    def test_horizon(self):
        with pytest.raises(InvalidArgumentError):
            condition_report(RankOneParams.classic_katok([2]), 2)

    def test_serializes(self):
        rep = condition_report(RankOneParams.classic_katok([16, 256]), 2)
        d = rep.to_dict()
        assert d["cond3_tail"]["count"] == 1
        rows = rep.csv_rows()
        assert rows[0][0] == "n" and len(rows) == 3
