"""Layer implementations with explicit forward/backward passes.

Image tensors are NHWC. Every layer caches what its backward pass needs during
the most recent forward call, so backward must follow the matching forward.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BN_MOMENTUM = 0.9
BN_EPS = 1e-6


class Layer:
    kind = "layer"
    # names of trainable tensors, in checkpoint order
    param_names: tuple[str, ...] = ()
    # non-trainable state saved with the parameters
    state_names: tuple[str, ...] = ()

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.state: dict[str, np.ndarray] = {}

    def build(self, input_shape: tuple[int, ...], rng: np.random.Generator, gain: float) -> tuple[int, ...]:
        return input_shape

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tensors(self):
        for name in self.param_names:
            yield name, self.params[name]
        for name in self.state_names:
            yield name, self.state[name]


class Dense(Layer):
    kind = "dense"
    param_names = ("W", "b")

    def __init__(self, units: int):
        super().__init__()
        self.units = units

    def build(self, input_shape, rng, gain):
        if len(input_shape) != 1:
            raise ValueError(f"dense layer needs a flat input, got shape {input_shape}")
        fan_in = input_shape[0]
        self.params["W"] = rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_in, self.units))
        self.params["b"] = np.zeros(self.units)
        return (self.units,)

    def forward(self, x, train, rng):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        self.grads["W"] = self._x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        return dy @ self.params["W"].T


class Conv2D(Layer):
    """3x3 convolution, stride 1, zero 'same' padding."""

    kind = "conv2d"
    param_names = ("W", "b")
    ksize = 3

    def __init__(self, filters: int):
        super().__init__()
        self.filters = filters

    def build(self, input_shape, rng, gain):
        if len(input_shape) != 3:
            raise ValueError(f"conv2d needs an HxWxC input, got shape {input_shape}")
        h, w, c = input_shape
        fan_in = self.ksize * self.ksize * c
        self.params["W"] = rng.normal(
            0.0, np.sqrt(gain / fan_in), size=(self.ksize, self.ksize, c, self.filters)
        )
        self.params["b"] = np.zeros(self.filters)
        return (h, w, self.filters)

    def forward(self, x, train, rng):
        n, h, w, c = x.shape
        xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
        # (n, h, w, c, 3, 3) -> (n, h, w, 3, 3, c)
        win = sliding_window_view(xp, (3, 3), axis=(1, 2)).transpose(0, 1, 2, 4, 5, 3)
        cols = win.reshape(n * h * w, 9 * c)
        self._cols = cols
        self._xshape = x.shape
        y = cols @ self.params["W"].reshape(9 * c, self.filters) + self.params["b"]
        return y.reshape(n, h, w, self.filters)

    def backward(self, dy):
        n, h, w, c = self._xshape
        dy2 = dy.reshape(n * h * w, self.filters)
        W = self.params["W"]
        self.grads["W"] = (self._cols.T @ dy2).reshape(W.shape)
        self.grads["b"] = dy2.sum(axis=0)
        dcols = (dy2 @ W.reshape(9 * c, self.filters).T).reshape(n, h, w, 3, 3, c)
        dxp = np.zeros((n, h + 2, w + 2, c))
        for i in range(3):
            for j in range(3):
                dxp[:, i:i + h, j:j + w, :] += dcols[:, :, :, i, j, :]
        return dxp[:, 1:-1, 1:-1, :]


class MaxPool2x2(Layer):
    """Non-overlapping 2x2 max pooling; an odd trailing row/column is dropped."""

    kind = "maxpool"

    def build(self, input_shape, rng, gain):
        if len(input_shape) != 3 or input_shape[0] < 2 or input_shape[1] < 2:
            raise ValueError(f"maxpool needs an HxWxC input with H, W >= 2, got {input_shape}")
        h, w, c = input_shape
        return (h // 2, w // 2, c)

    def forward(self, x, train, rng):
        n, h, w, c = x.shape
        h2, w2 = h // 2, w // 2
        blocks = (
            x[:, : 2 * h2, : 2 * w2, :]
            .reshape(n, h2, 2, w2, 2, c)
            .transpose(0, 1, 3, 5, 2, 4)
            .reshape(n, h2, w2, c, 4)
        )
        arg = blocks.argmax(axis=-1)
        self._arg = arg
        self._xshape = x.shape
        return np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]

    def backward(self, dy):
        n, h, w, c = self._xshape
        h2, w2 = h // 2, w // 2
        dblocks = np.zeros((n, h2, w2, c, 4))
        np.put_along_axis(dblocks, self._arg[..., None], dy[..., None], axis=-1)
        dx = np.zeros(self._xshape)
        dx[:, : 2 * h2, : 2 * w2, :] = (
            dblocks.reshape(n, h2, w2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(n, 2 * h2, 2 * w2, c)
        )
        return dx


class Dropout(Layer):
    """Inverted dropout: survivors are scaled by 1/(1-rate) during training."""

    kind = "dropout"

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, train, rng):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("train-mode dropout needs a random generator")
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dy):
        return dy if self._mask is None else dy * self._mask


class BatchNorm(Layer):
    """Per-channel normalisation over every axis but the last."""

    kind = "batchnorm"
    param_names = ("gamma", "beta")
    state_names = ("running_mean", "running_var")

    def build(self, input_shape, rng, gain):
        c = input_shape[-1]
        self.params["gamma"] = np.ones(c)
        self.params["beta"] = np.zeros(c)
        self.state["running_mean"] = np.zeros(c)
        self.state["running_var"] = np.ones(c)
        return input_shape

    def forward(self, x, train, rng):
        axes = tuple(range(x.ndim - 1))
        if train:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            self.state["running_mean"] = BN_MOMENTUM * self.state["running_mean"] + (1 - BN_MOMENTUM) * mean
            self.state["running_var"] = BN_MOMENTUM * self.state["running_var"] + (1 - BN_MOMENTUM) * var
        else:
            mean = self.state["running_mean"]
            var = self.state["running_var"]
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std, train)
        return self.params["gamma"] * xhat + self.params["beta"]

    def backward(self, dy):
        xhat, inv_std, train = self._cache
        axes = tuple(range(dy.ndim - 1))
        gamma = self.params["gamma"]
        self.grads["gamma"] = (dy * xhat).sum(axis=axes)
        self.grads["beta"] = dy.sum(axis=axes)
        dxhat = dy * gamma
        if not train:
            return dxhat * inv_std
        m = dy.size // dy.shape[-1]
        return inv_std / m * (
            m * dxhat - dxhat.sum(axis=axes) - xhat * (dxhat * xhat).sum(axis=axes)
        )


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, train, rng):
        self._pos = x > 0
        return x * self._pos

    def backward(self, dy):
        return dy * self._pos


class Flatten(Layer):
    kind = "flatten"

    def build(self, input_shape, rng, gain):
        return (int(np.prod(input_shape)),)

    def forward(self, x, train, rng):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)


# keeps p and 1-p strictly inside (0, 1) in float64
_P_MIN = 2.0 ** -60
_P_MAX = 1.0 - 2.0 ** -53


class Sigmoid(Layer):
    kind = "sigmoid"

    def forward(self, x, train, rng):
        p = 0.5 * (1.0 + np.tanh(0.5 * x))
        p = np.clip(p, _P_MIN, _P_MAX)
        self._p = p
        return p

    def backward(self, dy):
        return dy * self._p * (1.0 - self._p)
