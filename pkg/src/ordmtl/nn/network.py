from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from . import layers as L

_SIZED = {"dense", "conv2d", "dropout"}
_KINDS = {"dense", "conv2d", "maxpool", "dropout", "batchnorm", "relu", "flatten"}


class NetworkConfigError(ValueError):
    def __init__(self, message: str, layer_index: int | None = None):
        if layer_index is not None:
            message = f"layer {layer_index}: {message}"
        super().__init__(message)
        self.layer_index = layer_index


class NumericError(ArithmeticError):
    def __init__(self, message: str, layer_index: int | None = None):
        if layer_index is not None:
            message = f"layer {layer_index}: {message}"
        super().__init__(message)
        self.layer_index = layer_index


@dataclass(frozen=True)
class LayerSpec:
    """One layer. ``size`` is units/filters for dense/conv2d, the rate for dropout."""

    kind: str
    size: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise NetworkConfigError(f"unknown layer kind {self.kind!r}")
        if self.kind in _SIZED and self.size is None:
            raise NetworkConfigError(f"{self.kind} needs a size")
        if self.kind in ("dense", "conv2d") and not self.size >= 1:
            raise NetworkConfigError(f"{self.kind} needs at least one unit/filter")
        if self.kind == "dropout" and not 0.0 <= self.size < 1.0:
            raise NetworkConfigError(f"dropout rate {self.size} outside [0, 1)")

    @classmethod
    def parse(cls, text: str) -> "LayerSpec":
        kind, _, size = text.strip().partition(":")
        if not size:
            return cls(kind)
        value = float(size)
        return cls(kind, int(value) if kind in ("dense", "conv2d") else value)

    def __str__(self):
        return self.kind if self.size is None else f"{self.kind}:{self.size:g}"


@dataclass(frozen=True)
class HeadSpec:
    num_outputs: int
    activation: str = "sigmoid"

    def __post_init__(self):
        if self.num_outputs < 1:
            raise NetworkConfigError("head needs at least one output")
        if self.activation != "sigmoid":
            raise NetworkConfigError(f"unsupported head activation {self.activation!r}")


def _specs(*texts: str) -> tuple[LayerSpec, ...]:
    return tuple(LayerSpec.parse(t) for t in texts)


# Full-width layer stack; ReLU follows every conv/dense.
CONV_LAYERS = _specs(
    "conv2d:80", "relu",
    "dropout:0.5",
    "conv2d:80", "relu",
    "conv2d:80", "relu",
    "batchnorm", "maxpool", "dropout:0.5",
    "conv2d:160", "relu",
    "conv2d:160", "relu",
    "batchnorm", "maxpool", "dropout:0.5",
    "conv2d:320", "relu",
    "batchnorm", "maxpool", "dropout:0.5",
    "flatten",
    "dense:320", "relu",
)

# Dense-only variant for vector features: the tail of the conv stack after flattening.
VECTOR_LAYERS = _specs(
    "flatten",
    "dense:320", "relu",
    "batchnorm",
    "dropout:0.5",
)


@dataclass(frozen=True)
class NetworkConfig:
    input_shape: tuple[int, ...]
    layers: tuple[LayerSpec, ...]
    head: HeadSpec
    width_scale: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(s) for s in self.input_shape))
        object.__setattr__(
            self,
            "layers",
            tuple(s if isinstance(s, LayerSpec) else LayerSpec.parse(s) for s in self.layers),
        )
        if not self.width_scale > 0:
            raise NetworkConfigError("width_scale must be positive")

    def effective_size(self, spec: LayerSpec) -> float | int | None:
        if spec.kind in ("dense", "conv2d"):
            return max(1, int(round(spec.size * self.width_scale)))
        return spec.size

    def with_head(self, num_outputs: int) -> "NetworkConfig":
        return NetworkConfig(self.input_shape, self.layers, HeadSpec(num_outputs), self.width_scale)

    def to_flat(self) -> dict[str, str]:
        out = {
            "input_shape": ",".join(str(s) for s in self.input_shape),
            "width_scale": repr(float(self.width_scale)),
            "head.num_outputs": str(self.head.num_outputs),
            "head.activation": self.head.activation,
            "layers.count": str(len(self.layers)),
        }
        for i, spec in enumerate(self.layers):
            out[f"layers.{i}"] = str(spec)
        return out

    @classmethod
    def from_flat(cls, flat: dict[str, str]) -> "NetworkConfig":
        n = int(flat["layers.count"])
        return cls(
            tuple(int(s) for s in flat["input_shape"].split(",")),
            tuple(LayerSpec.parse(flat[f"layers.{i}"]) for i in range(n)),
            HeadSpec(int(flat["head.num_outputs"]), flat["head.activation"]),
            float(flat["width_scale"]),
        )


def conv_config(num_outputs: int, image_side: int = 16, width_scale: float = 0.1) -> NetworkConfig:
    return NetworkConfig((image_side, image_side, 1), CONV_LAYERS, HeadSpec(num_outputs), width_scale)


def vector_config(num_outputs: int, dim: int = 32, width_scale: float = 0.1) -> NetworkConfig:
    return NetworkConfig((dim,), VECTOR_LAYERS, HeadSpec(num_outputs), width_scale)


def default_config(input_shape: tuple[int, ...], num_outputs: int, width_scale: float = 0.1) -> NetworkConfig:
    layers = VECTOR_LAYERS if len(input_shape) == 1 else CONV_LAYERS
    return NetworkConfig(tuple(input_shape), layers, HeadSpec(num_outputs), width_scale)


def _make_layer(kind: str, size) -> L.Layer:
    if kind == "dense":
        return L.Dense(size)
    if kind == "conv2d":
        return L.Conv2D(size)
    if kind == "dropout":
        return L.Dropout(size)
    return {
        "maxpool": L.MaxPool2x2,
        "batchnorm": L.BatchNorm,
        "relu": L.ReLU,
        "flatten": L.Flatten,
    }[kind]()


class Network:
    """Layer stack plus a dense sigmoid head.

    ``layers`` holds the built body layers followed by the head's dense and
    sigmoid layers, so index ``len(config.layers)`` is the head.
    """

    def __init__(self, config: NetworkConfig, layers: list[L.Layer]):
        self.config = config
        self.layers = layers
        self.mode = "eval"

    @property
    def num_outputs(self) -> int:
        return self.config.head.num_outputs

    def tensors(self):
        """(layer_index, name, array) for every parameter and state tensor in declaration order."""
        for i, layer in enumerate(self.layers):
            for name, arr in layer.tensors():
                yield i, name, arr

    def trainable(self):
        for i, layer in enumerate(self.layers):
            for name in layer.param_names:
                yield i, name, layer

    @property
    def num_parameters(self) -> int:
        return sum(layer.params[name].size for _, name, layer in self.trainable())

    def copy(self) -> "Network":
        return copy.deepcopy(self)

    def forward(self, x: np.ndarray, mode: str | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
        mode = mode or self.mode
        if mode not in ("train", "eval"):
            raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.config.input_shape:
            raise ValueError(f"batch shape {x.shape[1:]} does not match input shape {self.config.input_shape}")
        train = mode == "train"
        outputs = []
        for layer in self.layers:
            x = layer.forward(x, train, rng)
            outputs.append(x)
        # the sigmoid squashes infinities, so test the logits
        if not (np.isfinite(outputs[-2]).all() and np.isfinite(x).all()):
            first = next(i for i, out in enumerate(outputs) if not np.isfinite(out).all())
            raise NumericError("non-finite activations", first)
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def predict(self, x: np.ndarray, batch_size: int = 1024) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[1:] != self.config.input_shape:
            raise ValueError(f"batch shape {x.shape[1:]} does not match input shape {self.config.input_shape}")
        out = [self.forward(x[i:i + batch_size], "eval") for i in range(0, len(x), batch_size)]
        return np.concatenate(out) if out else np.empty((0, self.num_outputs))


_FOLLOWED_BY_RELU_GAIN = 2.0


def init_network(config: NetworkConfig, seed: int) -> Network:
    """Build and initialise a network; per-layer random streams keep the backbone
    initialisation identical across head widths."""
    specs = list(config.layers)
    streams = np.random.SeedSequence(seed).spawn(len(specs) + 1)
    shape = config.input_shape
    built: list[L.Layer] = []
    for i, spec in enumerate(specs):
        if spec.kind == "dense" and len(shape) != 1:
            raise NetworkConfigError(f"dense layer on unflattened input of shape {shape}", i)
        nxt = specs[i + 1].kind if i + 1 < len(specs) else None
        gain = _FOLLOWED_BY_RELU_GAIN if nxt == "relu" else 1.0
        layer = _make_layer(spec.kind, config.effective_size(spec))
        try:
            shape = layer.build(shape, np.random.default_rng(streams[i]), gain)
        except ValueError as exc:
            raise NetworkConfigError(str(exc), i) from None
        built.append(layer)
    if len(shape) != 1:
        raise NetworkConfigError(f"head needs a flat input, got shape {shape}", len(specs))
    head = L.Dense(config.head.num_outputs)
    head.build(shape, np.random.default_rng(streams[-1]), 1.0)
    built += [head, L.Sigmoid()]
    return Network(config, built)
