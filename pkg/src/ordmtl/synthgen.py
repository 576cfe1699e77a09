"""Synthetic ordinal datasets shaped like a graded medical imaging cohort.

Each patient gets a latent severity; each image of the patient perturbs it.
Clean ranks come from cutting the image latents at empirical quantiles so the
class counts are exact, then adjacent-label annotator noise is applied.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .labels import OrdinalScale

DEFAULT_RANK_COUNTS = (2700, 1113, 359, 732)
DEFAULT_TOTAL = sum(DEFAULT_RANK_COUNTS)

FORMAT_MAGIC = "ORDMTL-DS v1"


class ConfigError(ValueError):
    pass


class DatasetFormatError(ValueError):
    """Malformed dataset file; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class GeneratorConfig:
    n_samples: int = DEFAULT_TOTAL
    proportions: tuple[float, ...] = tuple(c / DEFAULT_TOTAL for c in DEFAULT_RANK_COUNTS)
    images_per_patient: tuple[int, int] = (1, 4)
    feature_mode: str = "vector"
    feature_dim: int = 32
    image_side: int = 16
    patient_latent_sd: float = 1.0
    image_latent_sd: float = 0.25
    feature_noise_sd: float = 1.0
    adjacent_noise_prob: float = 0.15
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "proportions", tuple(float(p) for p in self.proportions))
        object.__setattr__(
            self, "images_per_patient", tuple(int(v) for v in self.images_per_patient)
        )
        k = len(self.proportions)
        if k < 2:
            raise ConfigError("need proportions for at least 2 ranks")
        if any(p < 0 for p in self.proportions):
            raise ConfigError("proportions must be non-negative")
        if abs(sum(self.proportions) - 1.0) > 1e-9:
            raise ConfigError(f"proportions sum to {sum(self.proportions)!r}, not 1")
        if self.n_samples < 10 * k:
            raise ConfigError(f"n_samples must be at least {10 * k}")
        lo, hi = self.images_per_patient
        if not 1 <= lo <= hi:
            raise ConfigError(f"bad images_per_patient range {self.images_per_patient}")
        if self.feature_mode not in ("vector", "image"):
            raise ConfigError(f"feature_mode must be 'vector' or 'image', not {self.feature_mode!r}")
        if self.feature_dim < 1 or self.image_side < 1:
            raise ConfigError("feature_dim and image_side must be positive")
        for name in ("patient_latent_sd", "image_latent_sd", "feature_noise_sd"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if not 0.0 <= self.adjacent_noise_prob < 1.0:
            raise ConfigError("adjacent_noise_prob must lie in [0, 1)")

    @property
    def num_ranks(self) -> int:
        return len(self.proportions)

    @property
    def feature_shape(self) -> tuple[int, ...]:
        if self.feature_mode == "vector":
            return (self.feature_dim,)
        return (self.image_side, self.image_side, 1)


@dataclass(frozen=True)
class Sample:
    sample_id: int
    patient_id: int
    features: np.ndarray
    rank: int
    clean_rank: int


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented, read-only sample table.

    ``features`` is float32 so that the 9-significant-digit text format
    round-trips exactly.
    """

    scale: OrdinalScale
    sample_ids: np.ndarray
    patient_ids: np.ndarray
    ranks: np.ndarray
    clean_ranks: np.ndarray
    features: np.ndarray
    feature_mode: str = "vector"

    def __post_init__(self):
        n = len(self.sample_ids)
        if n == 0:
            raise ValueError("dataset is empty")
        for name in ("patient_ids", "ranks", "clean_ranks", "features"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has length {len(getattr(self, name))}, expected {n}")
        object.__setattr__(self, "sample_ids", _frozen(np.asarray(self.sample_ids, dtype=np.int64)))
        object.__setattr__(self, "patient_ids", _frozen(np.asarray(self.patient_ids, dtype=np.int64)))
        object.__setattr__(self, "ranks", _frozen(np.asarray(self.ranks, dtype=np.int64)))
        object.__setattr__(self, "clean_ranks", _frozen(np.asarray(self.clean_ranks, dtype=np.int64)))
        object.__setattr__(self, "features", _frozen(np.asarray(self.features, dtype=np.float32)))
        if len(np.unique(self.sample_ids)) != n:
            raise ValueError("sample ids are not unique")
        k = self.scale.num_ranks
        for col in (self.ranks, self.clean_ranks):
            if col.min() < 1 or col.max() > k:
                raise ValueError(f"ranks outside 1..{k}")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")

    def __len__(self):
        return len(self.sample_ids)

    def __getitem__(self, i: int) -> Sample:
        return Sample(
            int(self.sample_ids[i]),
            int(self.patient_ids[i]),
            self.features[i],
            int(self.ranks[i]),
            int(self.clean_ranks[i]),
        )

    def __iter__(self) -> Iterator[Sample]:
        return (self[i] for i in range(len(self)))

    @property
    def samples(self) -> list[Sample]:
        return list(self)

    @property
    def feature_shape(self) -> tuple[int, ...]:
        return self.features.shape[1:]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(
            self.scale,
            self.sample_ids[index],
            self.patient_ids[index],
            self.ranks[index],
            self.clean_ranks[index],
            self.features[index],
            self.feature_mode,
        )

    def with_ranks(self, ranks: np.ndarray) -> "Dataset":
        return replace(self, ranks=np.asarray(ranks))

    def equals(self, other: "Dataset") -> bool:
        return (
            self.scale == other.scale
            and self.feature_mode == other.feature_mode
            and all(
                np.array_equal(getattr(self, c), getattr(other, c))
                for c in ("sample_ids", "patient_ids", "ranks", "clean_ranks", "features")
            )
        )


def largest_remainder_counts(n: int, proportions) -> np.ndarray:
    """Integer counts summing to ``n`` that round ``n * proportions`` by largest remainder."""
    quotas = n * np.asarray(proportions, dtype=np.float64)
    counts = np.floor(quotas).astype(np.int64)
    short = n - int(counts.sum())
    # stable sort keeps lower ranks first among equal remainders
    order = np.argsort(-(quotas - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def _patient_sizes(n: int, lo: int, hi: int, rng: np.random.Generator) -> list[int]:
    sizes = []
    remaining = n
    while remaining > 0:
        s = min(int(rng.integers(lo, hi + 1)), remaining)
        sizes.append(s)
        remaining -= s
    return sizes


def _image_features(z: np.ndarray, side: int, noise_sd: float, rng: np.random.Generator) -> np.ndarray:
    c = (side - 1) / 2.0
    yy, xx = np.mgrid[0:side, 0:side]
    blob = np.exp(-((yy - c) ** 2 + (xx - c) ** 2) / (2.0 * (side / 6.0) ** 2))
    amplitude = 1.0 + z
    noise = rng.normal(0.0, noise_sd, size=(len(z), side, side))
    return (amplitude[:, None, None] * blob[None] + noise)[..., None]


def signal_direction(dim: int) -> np.ndarray:
    """Unit vector spread evenly over the first ceil(dim/4) coordinates."""
    m = math.ceil(dim / 4)
    u = np.zeros(dim)
    u[:m] = 1.0 / math.sqrt(m)
    return u


def generate(config: GeneratorConfig) -> Dataset:
    counts = largest_remainder_counts(config.n_samples, config.proportions)
    if (counts == 0).any():
        raise ConfigError(f"rank counts {counts.tolist()} leave a class empty")
    streams = np.random.SeedSequence(config.seed).spawn(4)
    rng_groups, rng_latent, rng_feat, rng_noise = (np.random.default_rng(s) for s in streams)

    sizes = _patient_sizes(config.n_samples, *config.images_per_patient, rng_groups)
    patient_ids = np.repeat(np.arange(len(sizes)), sizes)
    z_patient = rng_latent.normal(0.0, config.patient_latent_sd, size=len(sizes))
    z = z_patient[patient_ids] + rng_latent.normal(0.0, config.image_latent_sd, size=config.n_samples)

    clean = np.empty(config.n_samples, dtype=np.int64)
    clean[np.argsort(z, kind="stable")] = np.repeat(np.arange(1, len(counts) + 1), counts)

    if config.feature_mode == "vector":
        u = signal_direction(config.feature_dim)
        eps = rng_feat.normal(0.0, config.feature_noise_sd, size=(config.n_samples, config.feature_dim))
        features = z[:, None] * u[None, :] + eps
    else:
        features = _image_features(z, config.image_side, config.feature_noise_sd, rng_feat)

    ds = Dataset(
        OrdinalScale(len(counts)),
        np.arange(config.n_samples),
        patient_ids,
        clean,
        clean,
        features,
        config.feature_mode,
    )
    return apply_adjacent_noise(ds, config.adjacent_noise_prob, rng_noise)


def apply_adjacent_noise(dataset: Dataset, p: float, seed) -> Dataset:
    """Move each rank to a random neighbour with probability ``p``.

    Rank 1 can only move up and rank K only down. ``clean_rank`` is untouched.
    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"noise probability must lie in [0, 1), got {p}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = len(dataset)
    k = dataset.scale.num_ranks
    flip = rng.random(n) < p
    step = np.where(rng.random(n) < 0.5, -1, 1)
    r = dataset.ranks
    step = np.where(r == 1, 1, np.where(r == k, -1, step))
    return dataset.with_ranks(np.where(flip, r + step, r))


def class_proportions(dataset: Dataset, use_clean: bool = False) -> np.ndarray:
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    ranks = dataset.clean_ranks if use_clean else dataset.ranks
    counts = np.bincount(ranks, minlength=dataset.scale.num_ranks + 1)[1:]
    return counts / len(dataset)


# --- text file format -----------------------------------------------------


def _format_record(ds: Dataset, i: int) -> str:
    vals = ",".join(f"{v:.9g}" for v in ds.features[i].ravel().tolist())
    return f"{ds.sample_ids[i]},{ds.patient_ids[i]},{ds.ranks[i]},{ds.clean_ranks[i]},{vals}\n"


def dumps_dataset(ds: Dataset) -> bytes:
    # image mode: dim is the image side, records carry side*side values
    dim = ds.feature_shape[0]
    header = f"{FORMAT_MAGIC} n={len(ds)} k={ds.scale.num_ranks} mode={ds.feature_mode} dim={dim}\n"
    body = "".join(_format_record(ds, i) for i in range(len(ds))).encode("ascii")
    return header.encode("ascii") + body + f"CRC32={zlib.crc32(body):08x}\n".encode("ascii")


def save_dataset(ds: Dataset, path) -> None:
    Path(path).write_bytes(dumps_dataset(ds))


def _parse_header(line: bytes) -> dict:
    parts = line.decode("ascii", errors="replace").split()
    if " ".join(parts[:2]) != FORMAT_MAGIC or len(parts) != 6:
        raise DatasetFormatError(f"malformed header {line[:80]!r}", 0)
    fields = {}
    for part in parts[2:]:
        key, _, value = part.partition("=")
        fields[key] = value
    try:
        out = {
            "n": int(fields["n"]),
            "k": int(fields["k"]),
            "mode": fields["mode"],
            "dim": int(fields["dim"]),
        }
    except (KeyError, ValueError):
        raise DatasetFormatError(f"malformed header {line[:80]!r}", 0) from None
    if out["mode"] not in ("vector", "image") or out["n"] < 1 or out["k"] < 2 or out["dim"] < 1:
        raise DatasetFormatError(f"malformed header {line[:80]!r}", 0)
    return out


def loads_dataset(data: bytes) -> Dataset:
    if not data.strip():
        raise DatasetFormatError("missing header", 0)
    nl = data.find(b"\n")
    if nl < 0:
        raise DatasetFormatError("missing header terminator", len(data))
    head = _parse_header(data[:nl])
    n, dim = head["n"], head["dim"]
    width = dim if head["mode"] == "vector" else dim * dim

    pos = nl + 1
    body_start = pos
    ids = np.empty(n, dtype=np.int64)
    pids = np.empty(n, dtype=np.int64)
    ranks = np.empty(n, dtype=np.int64)
    clean = np.empty(n, dtype=np.int64)
    feats = np.empty((n, width), dtype=np.float32)
    for i in range(n):
        end = data.find(b"\n", pos)
        if end < 0 or data.startswith(b"CRC32=", pos):
            raise DatasetFormatError(f"truncated file: expected {n} records, found {i}", pos)
        fields = data[pos:end].split(b",")
        if len(fields) != 4 + width:
            raise DatasetFormatError(
                f"record {i} has {len(fields)} fields, expected {4 + width}", pos
            )
        try:
            ids[i], pids[i], ranks[i], clean[i] = (int(f) for f in fields[:4])
            feats[i] = np.array([float(f) for f in fields[4:]], dtype=np.float64)
        except ValueError:
            raise DatasetFormatError(f"unparseable value in record {i}", pos) from None
        pos = end + 1
    body_end = pos

    trailer_end = data.find(b"\n", pos)
    trailer = data[pos:] if trailer_end < 0 else data[pos:trailer_end]
    if not trailer.startswith(b"CRC32="):
        raise DatasetFormatError("missing CRC32 trailer", pos)
    try:
        expected = int(trailer[6:], 16)
    except ValueError:
        raise DatasetFormatError("malformed CRC32 trailer", pos) from None
    if trailer_end >= 0 and data[trailer_end + 1:].strip():
        raise DatasetFormatError("unexpected data after trailer", trailer_end + 1)
    actual = zlib.crc32(data[body_start:body_end])
    if actual != expected:
        raise DatasetFormatError(
            f"checksum mismatch: file says {expected:08x}, records hash to {actual:08x}", pos
        )

    shape = (n, dim) if head["mode"] == "vector" else (n, dim, dim, 1)
    try:
        return Dataset(OrdinalScale(head["k"]), ids, pids, ranks, clean, feats.reshape(shape), head["mode"])
    except ValueError as exc:
        raise DatasetFormatError(f"invalid dataset contents: {exc}", body_start) from None


def load_dataset(path) -> Dataset:
    return loads_dataset(Path(path).read_bytes())
