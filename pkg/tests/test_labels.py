import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ordmtl.labels import (
    LabelError,
    OrdinalScale,
    ThresholdSet,
    binarize_for_task,
    decompose,
    decompose_many,
    one_hot,
    rank_from_multihot_scores,
    rank_from_onehot_scores,
    task_score_from_onehot,
    task_scores_from_onehot_matrix,
)

FULL = ThresholdSet.full()


class TestTypes:
    def test_default_scale(self):
        s = OrdinalScale()
        assert s.num_ranks == 4
        assert s.rank_names == ("1", "2", "3", "4-5")

    def test_custom_scale_names(self):
        assert OrdinalScale(3).rank_names == ("1", "2", "3")
        with pytest.raises(LabelError):
            OrdinalScale(3, ("a", "b"))
        with pytest.raises(LabelError):
            OrdinalScale(1)

    @pytest.mark.parametrize("ts", [(), (0,), (4,), (2, 1), (1, 1)])
    def test_invalid_threshold_sets(self, ts):
        with pytest.raises(LabelError):
            ThresholdSet(ts)

    def test_full_set(self):
        assert FULL.thresholds == (1, 2, 3)


class TestDecompose:
    @pytest.mark.parametrize(
        "rank,expected", [(1, [0, 0, 0]), (2, [1, 0, 0]), (3, [1, 1, 0]), (4, [1, 1, 1])]
    )
    def test_rank_groupings(self, rank, expected):
        # thresholds 1, 2, 3 are "1 vs 2-5", "1-2 vs 3-5", "1-3 vs 4-5"
        assert decompose(rank, FULL).tolist() == expected

    @pytest.mark.parametrize("rank", [0, 5, -1])
    def test_out_of_range_names_rank(self, rank):
        with pytest.raises(LabelError, match=str(rank)):
            decompose(rank, FULL)

    def test_many_matches_scalar(self):
        ranks = np.array([1, 2, 3, 4, 2, 3])
        expected = np.stack([decompose(r, FULL) for r in ranks])
        assert np.array_equal(decompose_many(ranks, FULL), expected)

    def test_many_rejects_bad_rank(self):
        with pytest.raises(LabelError):
            decompose_many([1, 5], FULL)

    @pytest.mark.parametrize("k", range(2, 9))
    def test_monotone_and_single_bit_exhaustive(self, k):
        scale = OrdinalScale(k)
        full = ThresholdSet.full(scale)
        for n_t in range(1, k):
            for ts in itertools.combinations(range(1, k), n_t):
                tset = ThresholdSet(ts, scale)
                for r in scale.ranks:
                    bits = decompose(r, tset)
                    assert np.all(np.diff(bits) <= 0)
        for a in range(1, k):
            diff = decompose(a, full) != decompose(a + 1, full)
            assert diff.sum() == 1

    @pytest.mark.parametrize("k", range(2, 9))
    def test_round_trip_full_set(self, k):
        scale = OrdinalScale(k)
        full = ThresholdSet.full(scale)
        for r in scale.ranks:
            assert rank_from_multihot_scores(decompose(r, full), 0.5) == r


class TestBinarize:
    def test_examples(self):
        assert binarize_for_task(2, 1) == 1
        assert binarize_for_task(2, 2) == 0
        assert binarize_for_task(4, 3) == 1

    def test_matches_decompose(self):
        for r in range(1, 5):
            for t in range(1, 4):
                assert binarize_for_task(r, t) == decompose(r, ThresholdSet((t,)))[0]

    def test_bad_threshold(self):
        with pytest.raises(LabelError):
            binarize_for_task(2, 4)


class TestOneHot:
    @pytest.mark.parametrize("rank,expected", [(1, [1, 0, 0, 0]), (4, [0, 0, 0, 1]), (2, [0, 1, 0, 0])])
    def test_examples(self, rank, expected):
        assert one_hot(rank).tolist() == expected

    def test_argmax_recovers_rank(self):
        for r in range(1, 5):
            assert rank_from_onehot_scores(one_hot(r)) == r

    def test_out_of_range(self):
        with pytest.raises(LabelError):
            one_hot(0)


class TestRankFromOneHotScores:
    def test_examples(self):
        assert rank_from_onehot_scores([0.9, 0.05, 0.03, 0.02]) == 1
        assert rank_from_onehot_scores([0.2, 0.2, 0.2, 0.4]) == 4
        assert rank_from_onehot_scores([0.5, 0.5, 0.1, 0.1]) == 1

    def test_tie_break_exhaustive(self):
        # every 0/1 pattern over 4 scores: the winner is the lowest index holding the maximum
        for pattern in itertools.product([0.0, 1.0], repeat=4):
            expected = 1 + min(i for i, v in enumerate(pattern) if v == max(pattern))
            assert rank_from_onehot_scores(pattern) == expected

    @pytest.mark.parametrize("bad", [[], [0.1, float("nan")], [float("inf"), 0.0]])
    def test_rejects(self, bad):
        with pytest.raises(LabelError):
            rank_from_onehot_scores(bad)


class TestTaskScore:
    def test_examples(self):
        assert task_score_from_onehot([1, 0, 0, 0], 1) == 0.0
        assert task_score_from_onehot([0, 0, 0, 1], 3) == 1.0
        assert task_score_from_onehot([0.25] * 4, 2) == 0.5

    @pytest.mark.parametrize("bad", [[0, 0, 0, 0], [0.5, -0.1, 0.3, 0.3]])
    def test_rejects(self, bad):
        with pytest.raises(LabelError):
            task_score_from_onehot(bad, 1)

    @given(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda s: sum(s) > 0))
    def test_non_increasing_in_threshold(self, scores):
        vals = [task_score_from_onehot(scores, t) for t in (1, 2, 3)]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_matrix_matches_scalar(self):
        rng = np.random.default_rng(3)
        s = rng.random((20, 4))
        for t in (1, 2, 3):
            expected = [task_score_from_onehot(row, t) for row in s]
            np.testing.assert_allclose(task_scores_from_onehot_matrix(s, t), expected, rtol=0, atol=1e-15)


class TestRankFromMultihot:
    def test_examples(self):
        assert rank_from_multihot_scores([0.9, 0.8, 0.7]) == 4
        assert rank_from_multihot_scores([0.1, 0.2, 0.3]) == 1
        assert rank_from_multihot_scores([0.9, 0.2, 0.8]) == 3

    def test_count_rule(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            s = rng.random(5)
            assert rank_from_multihot_scores(s, 0.4) == 1 + sum(v >= 0.4 for v in s)

    def test_cutoff_range(self):
        with pytest.raises(LabelError):
            rank_from_multihot_scores([0.5], 1.0)
