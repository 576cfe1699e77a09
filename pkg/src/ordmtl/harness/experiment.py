"""Cross-validated comparison of single-task, multi-task and direct-label classifiers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import labels as lab
from ..folds import make_folds, split
from ..metrics import MetricError, auc, roc_curve, tnr_at_tpr
from ..nn.network import init_network
from ..nn.training import train
from ..synthgen import Dataset, generate, load_dataset
from .config import ExperimentConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassifierType:
    """A classifier variant: which head it has and which targets it learns."""

    name: str
    family: str  # "single", "multitask" or "onehot"
    thresholds: tuple[int, ...] = ()

    def head_width(self, num_ranks: int) -> int:
        return num_ranks if self.family == "onehot" else len(self.thresholds)

    def evaluated_tasks(self, tasks: tuple[int, ...]) -> tuple[int, ...]:
        return self.thresholds if self.family == "single" else tasks

    def targets(self, ranks: np.ndarray, scale: lab.OrdinalScale) -> np.ndarray:
        if self.family == "onehot":
            return lab.one_hot_many(ranks, scale)
        return lab.decompose_many(ranks, lab.ThresholdSet(self.thresholds, scale))

    def task_scores(self, outputs: np.ndarray, t: int) -> np.ndarray:
        if self.family == "onehot":
            return lab.task_scores_from_onehot_matrix(outputs, t)
        return outputs[:, self.thresholds.index(t)]


def classifier_types(tasks: tuple[int, ...], num_ranks: int) -> list[ClassifierType]:
    """Canonical variant order: one single-output net per task, the multi-task net, the direct-label net."""
    out = [ClassifierType(f"SingleT{t}", "single", (t,)) for t in tasks]
    out.append(ClassifierType(f"MultiTask{len(tasks)}", "multitask", tuple(tasks)))
    out.append(ClassifierType(f"OneHot{num_ranks}", "onehot"))
    return out


@dataclass(frozen=True)
class ReportRow:
    seed: int
    classifier_type: str
    task_threshold: int
    fold_index: int
    tnr_at_tpr: float | None
    auc: float | None
    operating_cutoff: float | None
    n_val_pos: int
    n_val_neg: int

    @property
    def defined(self) -> bool:
        return self.tnr_at_tpr is not None


@dataclass
class ExperimentReport:
    rows: list[ReportRow]
    type_order: list[str] = field(default_factory=list)
    summary: dict[tuple[str, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.type_order:
            self.type_order = sorted({r.classifier_type for r in self.rows})
        rank = {name: i for i, name in enumerate(self.type_order)}
        self.rows.sort(key=lambda r: (r.seed, rank[r.classifier_type], r.task_threshold, r.fold_index))
        if not self.summary:
            self.summary = summarize(self.rows, self.type_order)

    def mean_tnr(self, classifier_type: str, task: int, seed: int | None = None) -> float:
        vals = [
            r.tnr_at_tpr
            for r in self.rows
            if r.classifier_type == classifier_type
            and r.task_threshold == task
            and r.defined
            and (seed is None or r.seed == seed)
        ]
        return float(np.mean(vals)) if vals else math.nan

    @property
    def seeds(self) -> list[int]:
        return sorted({r.seed for r in self.rows})

    @property
    def tasks(self) -> list[int]:
        return sorted({r.task_threshold for r in self.rows})

    def _named(self, prefix: str) -> str | None:
        return next((n for n in self.type_order if n.startswith(prefix)), None)

    @property
    def multitask_name(self) -> str | None:
        return self._named("MultiTask")

    @property
    def onehot_name(self) -> str | None:
        return self._named("OneHot")

    def multitask_ratios(self) -> dict[int, float]:
        """Mean TNR of the multi-task net divided by that of the matching single-task net."""
        out = {}
        mt = self.multitask_name
        for t in self.tasks:
            a = self.summary.get((mt, t))
            b = self.summary.get((f"SingleT{t}", t))
            if a is not None and b is not None:
                out[t] = a / b if b > 0 else math.inf
        return out


def summarize(rows: list[ReportRow], type_order: list[str]) -> dict[tuple[str, int], float]:
    groups: dict[tuple[str, int], list[float]] = {}
    for r in rows:
        if r.defined:
            groups.setdefault((r.classifier_type, r.task_threshold), []).append(r.tnr_at_tpr)
    rank = {name: i for i, name in enumerate(type_order)}
    keys = sorted(groups, key=lambda k: (rank.get(k[0], len(rank)), k[1]))
    return {k: float(np.mean(groups[k])) for k in keys}


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts]).generate_state(1, np.uint64)[0])


def evaluate_fold(
    kind: ClassifierType,
    outputs: np.ndarray,
    val: Dataset,
    tasks: tuple[int, ...],
    min_tpr: float,
    seed: int,
    fold: int,
) -> list[ReportRow]:
    rows = []
    for t in kind.evaluated_tasks(tasks):
        truth = (val.ranks > t).astype(np.int8)
        n_pos = int(truth.sum())
        n_neg = len(truth) - n_pos
        try:
            curve = roc_curve(kind.task_scores(outputs, t), truth)
        except MetricError:
            rows.append(ReportRow(seed, kind.name, t, fold, None, None, None, n_pos, n_neg))
            continue
        op = tnr_at_tpr(curve, min_tpr)
        rows.append(ReportRow(seed, kind.name, t, fold, op.tnr, auc(curve), op.cutoff, n_pos, n_neg))
    return rows


def dataset_for_seed(config: ExperimentConfig, seed: int) -> Dataset:
    if config.dataset_path:
        return load_dataset(config.dataset_path)
    return generate(replace(config.generator, seed=seed))


def run_experiment(config: ExperimentConfig, progress=None) -> ExperimentReport:
    """Train and score every classifier variant on every fold of every seed."""
    rows: list[ReportRow] = []
    kinds = None
    for seed in config.seeds:
        data = dataset_for_seed(config, seed)
        scale = data.scale
        tasks = config.threshold_set(scale).thresholds
        kinds = classifier_types(tasks, scale.num_ranks)
        plan = make_folds(data, config.k_folds, seed)
        for fold in range(config.k_folds):
            tr, val = split(data, plan, fold)
            # every variant starts from the same backbone initialisation and batch order
            job_seed = _derived_seed(seed, fold, config.training.seed)
            tcfg = replace(config.training, seed=job_seed)
            x_tr = tr.features.astype(np.float64)
            x_val = val.features.astype(np.float64)
            for kind in kinds:
                net_cfg = config.network.build(data.feature_shape, kind.head_width(scale.num_ranks))
                net = init_network(net_cfg, job_seed)
                train(net, x_tr, kind.targets(tr.ranks, scale), tcfg)
                outputs = net.predict(x_val)
                rows += evaluate_fold(kind, outputs, val, tasks, config.min_tpr, seed, fold)
                if progress:
                    progress(seed, fold, kind.name)
                log.info("seed %d fold %d %s done", seed, fold, kind.name)
    return ExperimentReport(rows, [k.name for k in kinds])
