"""Ordinal label algebra.

A rank on a K-level ordinal scale is turned into binary tasks by cutting the
scale at integer thresholds: task ``t`` is positive iff ``rank > t``. With the
full threshold set ``{1..K-1}`` this gives the cumulative ("multi-hot") target
used by the multi-task head; ``one_hot`` gives the direct-label target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_RANK_NAMES = ("1", "2", "3", "4-5")


class LabelError(ValueError):
    """Invalid rank, threshold or score vector."""


@dataclass(frozen=True)
class OrdinalScale:
    num_ranks: int = 4
    rank_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.num_ranks < 2:
            raise LabelError(f"an ordinal scale needs at least 2 ranks, got {self.num_ranks}")
        names = tuple(self.rank_names)
        if not names:
            if self.num_ranks == len(DEFAULT_RANK_NAMES):
                names = DEFAULT_RANK_NAMES
            else:
                names = tuple(str(r) for r in range(1, self.num_ranks + 1))
        if len(names) != self.num_ranks:
            raise LabelError(
                f"expected {self.num_ranks} rank names, got {len(names)}"
            )
        object.__setattr__(self, "rank_names", names)

    @property
    def ranks(self) -> range:
        return range(1, self.num_ranks + 1)

    def check_rank(self, rank: int) -> int:
        if isinstance(rank, (bool, np.bool_)) or int(rank) != rank:
            raise LabelError(f"rank must be an integer, got {rank!r}")
        rank = int(rank)
        if not 1 <= rank <= self.num_ranks:
            raise LabelError(f"rank {rank} outside 1..{self.num_ranks}")
        return rank


@dataclass(frozen=True)
class ThresholdSet:
    thresholds: tuple[int, ...]
    scale: OrdinalScale = field(default_factory=OrdinalScale)

    def __post_init__(self):
        ts = tuple(int(t) for t in self.thresholds)
        if not ts:
            raise LabelError("threshold set is empty")
        for t in ts:
            if not 1 <= t <= self.scale.num_ranks - 1:
                raise LabelError(
                    f"threshold {t} outside 1..{self.scale.num_ranks - 1}"
                )
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise LabelError(f"thresholds must be strictly increasing: {ts}")
        object.__setattr__(self, "thresholds", ts)

    @classmethod
    def full(cls, scale: OrdinalScale | None = None) -> "ThresholdSet":
        scale = scale or OrdinalScale()
        return cls(tuple(range(1, scale.num_ranks)), scale)

    def __len__(self):
        return len(self.thresholds)

    def __iter__(self):
        return iter(self.thresholds)


def decompose(rank: int, tasks: ThresholdSet) -> np.ndarray:
    """Multi-hot target of ``rank``: bit i is 1 iff rank > thresholds[i]."""
    rank = tasks.scale.check_rank(rank)
    return np.array([1 if rank > t else 0 for t in tasks.thresholds], dtype=np.int8)


def decompose_many(ranks: Sequence[int] | np.ndarray, tasks: ThresholdSet) -> np.ndarray:
    """Vectorised :func:`decompose`; returns an ``(n, len(tasks))`` int8 array."""
    ranks = np.asarray(ranks)
    bad = (ranks < 1) | (ranks > tasks.scale.num_ranks)
    if bad.any():
        raise LabelError(f"rank {ranks[bad][0]} outside 1..{tasks.scale.num_ranks}")
    return (ranks[:, None] > np.asarray(tasks.thresholds)[None, :]).astype(np.int8)


def binarize_for_task(rank: int, t: int, scale: OrdinalScale | None = None) -> int:
    scale = scale or OrdinalScale()
    return int(decompose(rank, ThresholdSet((t,), scale))[0])


def one_hot(rank: int, scale: OrdinalScale | None = None) -> np.ndarray:
    scale = scale or OrdinalScale()
    rank = scale.check_rank(rank)
    bits = np.zeros(scale.num_ranks, dtype=np.int8)
    bits[rank - 1] = 1
    return bits


def one_hot_many(ranks: Sequence[int] | np.ndarray, scale: OrdinalScale) -> np.ndarray:
    ranks = np.asarray(ranks)
    if ((ranks < 1) | (ranks > scale.num_ranks)).any():
        raise LabelError(f"ranks outside 1..{scale.num_ranks}")
    return np.eye(scale.num_ranks, dtype=np.int8)[ranks - 1]


def _as_scores(scores) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise LabelError("scores must be a non-empty vector")
    if not np.all(np.isfinite(s)):
        raise LabelError("scores must be finite")
    return s


def rank_from_onehot_scores(scores) -> int:
    """Argmax rank; ``np.argmax`` returns the first maximum, i.e. the lower rank on ties."""
    s = _as_scores(scores)
    return int(np.argmax(s)) + 1


def task_score_from_onehot(scores, t: int) -> float:
    """Share of the score mass lying on ranks above threshold ``t``."""
    s = _as_scores(scores)
    if (s < 0).any() or not (s > 0).any():
        raise LabelError("one-hot scores must be non-negative with positive total")
    if not 1 <= t <= s.size - 1:
        raise LabelError(f"threshold {t} outside 1..{s.size - 1}")
    return float(s[t:].sum() / s.sum())


def task_scores_from_onehot_matrix(scores: np.ndarray, t: int) -> np.ndarray:
    """Row-wise :func:`task_score_from_onehot` for an ``(n, K)`` score matrix."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or not 1 <= t <= s.shape[1] - 1:
        raise LabelError(f"bad score matrix {s.shape} for threshold {t}")
    total = s.sum(axis=1)
    if (s < 0).any() or (total <= 0).any() or not np.all(np.isfinite(s)):
        raise LabelError("one-hot scores must be finite, non-negative with positive total")
    return s[:, t:].sum(axis=1) / total


def rank_from_multihot_scores(scores, decision: float = 0.5) -> int:
    """Rank = 1 + number of task scores at or above ``decision``."""
    s = _as_scores(scores)
    if not 0.0 < decision < 1.0 or math.isnan(decision):
        raise LabelError(f"decision cutoff must lie in (0, 1), got {decision}")
    return 1 + int(np.count_nonzero(s >= decision))
