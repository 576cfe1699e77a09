"""Experiment configuration and its JSON form.

The config file is one JSON object whose keys are the ``ExperimentConfig``
field names. ``generator``, ``network`` and ``training`` are nested objects
keyed by the fields of their own types. Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..labels import OrdinalScale, ThresholdSet
from ..nn.network import LayerSpec, NetworkConfig, HeadSpec, default_config
from ..nn.training import TrainConfig
from ..synthgen import GeneratorConfig


class ConfigFileError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkTemplate:
    """Backbone shared by every classifier variant; input shape and head come from the data and variant."""

    layers: tuple[str, ...] | None = None
    width_scale: float = 0.1

    def build(self, input_shape: tuple[int, ...], num_outputs: int) -> NetworkConfig:
        if self.layers is None:
            return default_config(input_shape, num_outputs, self.width_scale)
        return NetworkConfig(
            input_shape, tuple(LayerSpec.parse(t) for t in self.layers), HeadSpec(num_outputs), self.width_scale
        )


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    network: NetworkTemplate = field(default_factory=NetworkTemplate)
    training: TrainConfig = field(default_factory=TrainConfig)
    k_folds: int = 5
    seeds: tuple[int, ...] = (0,)
    tasks: tuple[int, ...] = (1, 2, 3)
    min_tpr: float = 0.95
    output_dir: str = "results"
    # optional pre-generated dataset file; when set it replaces the generator
    dataset_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "tasks", tuple(int(t) for t in self.tasks))
        if not self.seeds:
            raise ConfigFileError("seeds must be non-empty")
        if self.k_folds < 2:
            raise ConfigFileError("k_folds must be at least 2")
        if not 0.0 < self.min_tpr <= 1.0:
            raise ConfigFileError("min_tpr must lie in (0, 1]")
        try:
            self.threshold_set(OrdinalScale(self.generator.num_ranks))
        except ValueError as exc:
            raise ConfigFileError(str(exc)) from None

    def threshold_set(self, scale: OrdinalScale) -> ThresholdSet:
        return ThresholdSet(self.tasks, scale)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("generator", "network", "training"):
            out[key] = {k: list(v) if isinstance(v, tuple) else v for k, v in out[key].items()}
        out["seeds"] = list(self.seeds)
        out["tasks"] = list(self.tasks)
        return out


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigFileError(f"{where}: expected a JSON object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigFileError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigFileError(f"{where}: {exc}") from None


def generator_from_dict(data: dict) -> GeneratorConfig:
    return _build(GeneratorConfig, data, "generator")


def experiment_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigFileError("config must be a JSON object")
    data = dict(data)
    nested = {
        "generator": (GeneratorConfig, "generator"),
        "network": (NetworkTemplate, "network"),
        "training": (TrainConfig, "training"),
    }
    for key, (cls, where) in nested.items():
        if key in data:
            data[key] = _build(cls, data[key], where)
    return _build(ExperimentConfig, data, "config")


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigFileError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigFileError(f"cannot read config file {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"{path}: invalid JSON: {exc}") from None


def load_experiment_config(path) -> ExperimentConfig:
    return experiment_from_dict(load_json(path))
