import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings, strategies as st

from ordmtl.labels import OrdinalScale, ThresholdSet, decompose_many
from ordmtl.synthgen import (
    DEFAULT_RANK_COUNTS,
    ConfigError,
    Dataset,
    DatasetFormatError,
    GeneratorConfig,
    apply_adjacent_noise,
    class_proportions,
    dumps_dataset,
    generate,
    largest_remainder_counts,
    load_dataset,
    loads_dataset,
    save_dataset,
    signal_direction,
)


@pytest.fixture(scope="module")
def default_ds():
    return generate(GeneratorConfig(seed=7))


def _tiny(ranks, k=4):
    n = len(ranks)
    return Dataset(OrdinalScale(k), np.arange(n), np.arange(n), ranks, ranks, np.zeros((n, 2)))


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"proportions": (0.5, 0.6)},
            {"n_samples": 39},
            {"feature_noise_sd": 0.0},
            {"adjacent_noise_prob": 1.0},
            {"feature_mode": "audio"},
            {"images_per_patient": (3, 2)},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            GeneratorConfig(**kwargs)

    def test_empty_class_is_config_error(self):
        with pytest.raises(ConfigError):
            generate(GeneratorConfig(n_samples=40, proportions=(0.99, 0.005, 0.005)))


class TestGenerate:
    def test_default_counts(self, default_ds):
        counts = np.bincount(default_ds.clean_ranks, minlength=5)[1:]
        assert tuple(counts) == DEFAULT_RANK_COUNTS

    def test_noiseless_identity(self):
        ds = generate(GeneratorConfig(n_samples=500, adjacent_noise_prob=0.0, seed=3))
        assert np.array_equal(ds.ranks, ds.clean_ranks)

    def test_deterministic(self, default_ds):
        again = generate(GeneratorConfig(seed=7))
        assert dumps_dataset(again) == dumps_dataset(default_ds)

    def test_seed_changes_features(self, default_ds):
        other = generate(GeneratorConfig(seed=8))
        assert not np.array_equal(other.features, default_ds.features)

    def test_patients_contiguous(self, default_ds):
        pids = default_ds.patient_ids
        assert np.all(np.diff(pids) >= 0)
        sizes = np.bincount(pids)
        assert sizes.min() >= 1 and sizes.max() <= 4

    def test_labels_move_at_most_one(self, default_ds):
        assert np.abs(default_ds.ranks - default_ds.clean_ranks).max() <= 1

    def test_noised_target_differs_in_at_most_one_bit(self, default_ds):
        full = ThresholdSet.full()
        diff = (decompose_many(default_ds.ranks, full) != decompose_many(default_ds.clean_ranks, full)).sum(axis=1)
        assert diff.max() <= 1
        assert (diff == 1).sum() == (default_ds.ranks != default_ds.clean_ranks).sum()

    def test_signal_increases_with_rank(self, default_ds):
        u = signal_direction(32)
        proj = default_ds.features.astype(np.float64) @ u
        means = [proj[default_ds.clean_ranks == r].mean() for r in range(1, 5)]
        assert all(b > a for a, b in zip(means, means[1:]))

    def test_signal_direction(self):
        u = signal_direction(32)
        assert np.isclose(np.linalg.norm(u), 1.0)
        assert np.count_nonzero(u) == 8
        assert np.count_nonzero(signal_direction(5)) == 2

    def test_image_mode(self):
        ds = generate(GeneratorConfig(n_samples=200, feature_mode="image", image_side=8, seed=1))
        assert ds.features.shape == (200, 8, 8, 1)
        # centre pixel tracks the latent: mean centre value grows with rank
        centre = ds.features[:, 3:5, 3:5, 0].mean(axis=(1, 2))
        means = [centre[ds.clean_ranks == r].mean() for r in range(1, 5)]
        assert means[-1] > means[0]

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(40, 600),
        weights=st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6),
    )
    def test_exact_counts_property(self, n, weights):
        props = np.array(weights) / sum(weights)
        props[-1] = 1.0 - props[:-1].sum()
        if n < 10 * len(props):
            n = 10 * len(props)
        expected = largest_remainder_counts(n, props)
        if (expected == 0).any():
            return
        ds = generate(GeneratorConfig(n_samples=n, proportions=tuple(props), adjacent_noise_prob=0.0, seed=n))
        assert np.array_equal(np.bincount(ds.clean_ranks, minlength=len(props) + 1)[1:], expected)


class TestLargestRemainder:
    def test_default_counts_exact(self):
        assert tuple(largest_remainder_counts(4904, np.array(DEFAULT_RANK_COUNTS) / 4904)) == DEFAULT_RANK_COUNTS

    def test_by_hand(self):
        # quotas 3.33.., 3.33.., 3.33.. -> one extra to the first
        assert largest_remainder_counts(10, [1 / 3, 1 / 3, 1 / 3]).tolist() == [4, 3, 3]
        # quotas 1.5, 2.7, 5.8 -> floors 1, 2, 5, remainders .5, .7, .8 -> +1 to last two
        assert largest_remainder_counts(10, [0.15, 0.27, 0.58]).tolist() == [1, 3, 6]


class TestNoise:
    def test_zero_probability(self, default_ds):
        out = apply_adjacent_noise(default_ds, 0.0, 1)
        assert np.array_equal(out.ranks, default_ds.ranks)

    def test_boundary_rank_has_one_neighbour(self):
        ds = _tiny(np.ones(100, dtype=int))
        out = apply_adjacent_noise(ds, 0.999999, 0)
        assert set(out.ranks.tolist()) == {2}
        top = apply_adjacent_noise(_tiny(np.full(50, 4)), 0.999999, 0)
        assert set(top.ranks.tolist()) == {3}

    def test_changed_fraction(self):
        ds = generate(GeneratorConfig(adjacent_noise_prob=0.0, seed=2))
        out = apply_adjacent_noise(ds, 0.15, 11)
        frac = np.mean(out.ranks != ds.ranks)
        assert 0.13 <= frac <= 0.17
        assert np.array_equal(out.clean_ranks, ds.clean_ranks)

    def test_interior_moves_both_ways(self):
        out = apply_adjacent_noise(_tiny(np.full(2000, 2)), 0.5, 4)
        assert {1, 2, 3} == set(out.ranks.tolist())

    def test_invalid_probability(self, default_ds):
        with pytest.raises(ValueError):
            apply_adjacent_noise(default_ds, 1.0, 0)


class TestProportions:
    def test_default_counts_exact(self, default_ds):
        p = class_proportions(default_ds, use_clean=True)
        np.testing.assert_allclose(p, [0.5506, 0.2270, 0.0732, 0.1493], atol=1e-4)
        assert np.isclose(p.sum(), 1.0)

    def test_task_positive_fractions(self, default_ds):
        p = class_proportions(default_ds, use_clean=True)
        positive = [p[t:].sum() for t in (1, 2, 3)]
        np.testing.assert_allclose(positive, [0.45, 0.22, 0.15], atol=0.005)

    def test_single_sample(self):
        assert class_proportions(_tiny(np.array([2]))).tolist() == [0, 1, 0, 0]


class TestFileFormat:
    def test_round_trip(self, tmp_path, default_ds):
        path = tmp_path / "d.ds"
        save_dataset(default_ds, path)
        assert load_dataset(path).equals(default_ds)

    def test_round_trip_image(self, tmp_path):
        ds = generate(GeneratorConfig(n_samples=60, feature_mode="image", image_side=4, seed=5))
        path = tmp_path / "img.ds"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back.equals(ds) and back.features.shape == (60, 4, 4, 1)

    def test_header_line(self, default_ds):
        first = dumps_dataset(default_ds).split(b"\n", 1)[0]
        assert first == b"ORDMTL-DS v1 n=4904 k=4 mode=vector dim=32"

    def test_empty_file(self):
        with pytest.raises(DatasetFormatError, match="missing header"):
            loads_dataset(b"")

    def test_truncated_names_offset(self, default_ds):
        data = dumps_dataset(default_ds.subset(np.arange(20)))
        cut = data[: len(data) // 2]
        with pytest.raises(DatasetFormatError, match="byte offset") as info:
            loads_dataset(cut)
        assert 0 < info.value.offset <= len(cut)

    def test_checksum_mismatch(self):
        data = bytearray(dumps_dataset(_tiny(np.array([1, 2, 3, 4]))))
        i = data.index(b"\n") + 1
        data[i] = ord("9")  # change first sample id
        with pytest.raises(DatasetFormatError, match="checksum"):
            loads_dataset(bytes(data))

    def test_bad_header(self):
        with pytest.raises(DatasetFormatError):
            loads_dataset(b"NOT-A-DATASET\n")
