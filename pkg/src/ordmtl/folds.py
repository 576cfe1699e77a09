"""Patient-grouped, rank-balanced k-fold planning."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .synthgen import Dataset


class FoldError(ValueError):
    pass


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: dict[int, int]

    def fold_of_samples(self, dataset: Dataset) -> np.ndarray:
        try:
            return np.array([self.assignments[int(p)] for p in dataset.patient_ids], dtype=np.int64)
        except KeyError as exc:
            raise FoldError(f"patient {exc.args[0]} has no fold assignment") from None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["patient_id", "fold"])
        for pid in sorted(self.assignments):
            w.writerow([pid, self.assignments[pid]])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def make_folds(dataset: Dataset, k: int = 5, seed: int = 0) -> FoldPlan:
    """Greedy balanced assignment of whole patients to ``k`` folds.

    Patients are visited largest first (ties by id). Each goes to the fold
    whose per-rank counts end up closest, in squared error, to the global
    per-rank counts divided by ``k``. Equal costs resolve to the earliest fold
    in a seed-rotated fold order. Once the patients left to place are only
    just enough to give every empty fold one, they go to empty folds only.
    """
    if k < 2:
        raise FoldError(f"need at least 2 folds, got {k}")
    num_ranks = dataset.scale.num_ranks
    patients, inverse = np.unique(dataset.patient_ids, return_inverse=True)
    if len(patients) < k:
        raise FoldError(f"{len(patients)} patients cannot fill {k} folds")

    per_patient = np.zeros((len(patients), num_ranks), dtype=np.int64)
    np.add.at(per_patient, (inverse, dataset.ranks - 1), 1)
    target = per_patient.sum(axis=0) / k

    sizes = per_patient.sum(axis=1)
    visit = sorted(range(len(patients)), key=lambda j: (-sizes[j], patients[j]))

    offset = int(np.random.default_rng(seed).integers(k))
    order = [(offset + j) % k for j in range(k)]

    counts = np.zeros((k, num_ranks), dtype=np.float64)
    assignments = {}
    for i, j in enumerate(visit):
        add = per_patient[j]
        # change in the fold's squared deviation if this patient joins it
        delta = ((counts + add - target) ** 2 - (counts - target) ** 2).sum(axis=1)
        empty = [f for f in order if not counts[f].any()]
        candidates = empty if len(empty) >= len(visit) - i else order
        best = min(candidates, key=lambda f: delta[f])
        counts[best] += add
        assignments[int(patients[j])] = best
    return FoldPlan(k, assignments)


def split(dataset: Dataset, plan: FoldPlan, fold_index: int) -> tuple[Dataset, Dataset]:
    """(train, validation) subsets for one fold, each in dataset order."""
    if not 0 <= fold_index < plan.k:
        raise FoldError(f"fold index {fold_index} outside 0..{plan.k - 1}")
    folds = plan.fold_of_samples(dataset)
    val = folds == fold_index
    return dataset.subset(np.flatnonzero(~val)), dataset.subset(np.flatnonzero(val))


def fold_rank_proportions(dataset: Dataset, plan: FoldPlan) -> np.ndarray:
    """``(k, K)`` array of per-fold rank proportions."""
    folds = plan.fold_of_samples(dataset)
    out = np.zeros((plan.k, dataset.scale.num_ranks))
    for f in range(plan.k):
        r = dataset.ranks[folds == f]
        if len(r):
            out[f] = np.bincount(r, minlength=dataset.scale.num_ranks + 1)[1:] / len(r)
    return out
