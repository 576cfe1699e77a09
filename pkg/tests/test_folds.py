import numpy as np
import pytest

from ordmtl.folds import FoldError, fold_rank_proportions, make_folds, split
from ordmtl.labels import OrdinalScale
from ordmtl.synthgen import Dataset, GeneratorConfig, class_proportions, generate


def _dataset(patient_ids, ranks):
    n = len(ranks)
    return Dataset(OrdinalScale(4), np.arange(n), patient_ids, ranks, ranks, np.zeros((n, 1)))


@pytest.fixture(scope="module")
def default_ds():
    return generate(GeneratorConfig(seed=0))


class TestMakeFolds:
    def test_equal_patients_fill_folds_evenly(self):
        ds = _dataset(np.repeat(np.arange(10), 2), np.ones(20, dtype=int))
        plan = make_folds(ds, 5, seed=3)
        folds = plan.fold_of_samples(ds)
        assert np.bincount(folds).tolist() == [4] * 5
        assert np.bincount(list(plan.assignments.values())).tolist() == [2] * 5

    def test_balanced_rank_pairs(self):
        # each patient holds one rank-1 and one rank-3 image
        ranks = np.tile([1, 3], 10)
        ds = _dataset(np.repeat(np.arange(10), 2), ranks)
        assert np.bincount(make_folds(ds, 5).fold_of_samples(ds)).tolist() == [4] * 5

    def test_every_patient_assigned_once(self, default_ds):
        plan = make_folds(default_ds, 5, 1)
        assert set(plan.assignments) == set(np.unique(default_ds.patient_ids).tolist())
        assert set(plan.assignments.values()) == set(range(5))

    def test_deterministic(self, default_ds):
        assert make_folds(default_ds, 5, 4) == make_folds(default_ds, 5, 4)

    def test_stratified_within_two_points(self, default_ds):
        plan = make_folds(default_ds, 5, 0)
        dev = np.abs(fold_rank_proportions(default_ds, plan) - class_proportions(default_ds))
        assert dev.max() <= 0.02

    def test_too_few_patients(self):
        ds = _dataset(np.array([0, 0, 1, 1]), np.array([1, 2, 3, 4]))
        with pytest.raises(FoldError):
            make_folds(ds, 3)

    def test_k_below_two(self, default_ds):
        with pytest.raises(FoldError):
            make_folds(default_ds, 1)

    def test_csv_export(self):
        ds = _dataset(np.array([5, 5, 2, 9]), np.array([1, 2, 3, 4]))
        text = make_folds(ds, 2, 0).to_csv().splitlines()
        assert text[0] == "patient_id,fold"
        assert [line.split(",")[0] for line in text[1:]] == ["2", "5", "9"]


class TestSplit:
    def test_partition_and_disjoint_patients(self, default_ds):
        plan = make_folds(default_ds, 5, 2)
        seen = []
        for f in range(5):
            tr, val = split(default_ds, plan, f)
            assert len(tr) + len(val) == len(default_ds)
            assert not set(tr.patient_ids.tolist()) & set(val.patient_ids.tolist())
            assert 0.15 <= len(val) / len(default_ds) <= 0.25
            assert np.all(np.diff(tr.sample_ids) > 0) and np.all(np.diff(val.sample_ids) > 0)
            seen.extend(val.sample_ids.tolist())
        assert sorted(seen) == default_ds.sample_ids.tolist()

    def test_index_out_of_range(self, default_ds):
        plan = make_folds(default_ds, 5, 0)
        with pytest.raises(FoldError):
            split(default_ds, plan, 5)


def test_no_empty_fold_when_patients_scarce():
    ds = generate(GeneratorConfig(n_samples=40, images_per_patient=(4, 4), seed=3))
    for k in (5, 10):
        plan = make_folds(ds, k, 0)
        assert set(plan.assignments.values()) == set(range(k))
