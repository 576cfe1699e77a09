from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .network import Network, NumericError

log = logging.getLogger(__name__)

BCE_EPS = 1e-7


class TrainingError(RuntimeError):
    def __init__(self, message: str, epoch: int, batch: int):
        super().__init__(f"epoch {epoch}, batch {batch}: {message}")
        self.epoch = epoch
        self.batch = batch


def bce_multi_loss(predictions: np.ndarray, targets: np.ndarray, eps: float = BCE_EPS):
    """Binary cross-entropy averaged over outputs, then over the batch.

    Returns ``(loss, dloss/dpredictions)``; the gradient is evaluated at the
    clipped predictions.
    """
    p = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if p.shape != y.shape:
        raise ValueError(f"prediction shape {p.shape} != target shape {y.shape}")
    if p.ndim == 1:
        p, y = p[:, None], y[:, None]
    pc = np.clip(p, eps, 1.0 - eps)
    loss = -(y * np.log(pc) + (1.0 - y) * np.log1p(-pc)).mean()
    grad = (pc - y) / (pc * (1.0 - pc)) / y.size
    return float(loss), grad.reshape(np.shape(predictions))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    optimizer: str = "adam"
    lr: float = 1e-3
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', not {self.optimizer!r}")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)


class SGD:
    def __init__(self, lr: float, momentum: float = 0.0):
        self.lr = lr
        self.momentum = momentum
        self.velocity: dict = {}

    def step(self, network: Network):
        for i, name, layer in network.trainable():
            g = layer.grads[name]
            v = self.velocity.get((i, name))
            v = -self.lr * g if v is None else self.momentum * v - self.lr * g
            self.velocity[(i, name)] = v
            layer.params[name] += v


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict = {}
        self.v: dict = {}

    def step(self, network: Network):
        self.t += 1
        step = self.lr / (1.0 - self.beta1 ** self.t)
        c2 = 1.0 - self.beta2 ** self.t
        for i, name, layer in network.trainable():
            g = layer.grads[name]
            key = (i, name)
            if key not in self.m:
                self.m[key] = np.zeros_like(g)
                self.v[key] = np.zeros_like(g)
            m, v = self.m[key], self.v[key]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * (g * g)
            layer.params[name] -= step * m / (np.sqrt(v / c2) + self.eps)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "sgd":
        return SGD(config.lr, config.momentum)
    return Adam(config.lr, config.beta1, config.beta2, config.eps)


def evaluate_loss(network: Network, x: np.ndarray, y: np.ndarray) -> float:
    return bce_multi_loss(network.predict(x), y)[0]


def train(
    network: Network,
    x: np.ndarray,
    y: np.ndarray,
    config: TrainConfig,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
) -> TrainHistory:
    """Minibatch training; shuffle order and dropout masks come from ``config.seed``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if len(x) != len(y):
        raise ValueError(f"{len(x)} samples but {len(y)} targets")
    if y.shape[1] != network.num_outputs:
        raise ValueError(f"targets have {y.shape[1]} columns, head has {network.num_outputs} outputs")

    if validation is not None:
        vx, vy = (np.asarray(a, dtype=np.float64) for a in validation)
        validation = (vx, vy.reshape(len(vy), -1))

    rng = np.random.default_rng(config.seed)
    opt = make_optimizer(config)
    history = TrainHistory()
    n = len(x)
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        total = 0.0
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            try:
                p = network.forward(x[idx], "train", rng)
            except NumericError as exc:
                raise TrainingError(str(exc), epoch, b) from None
            loss, grad = bce_multi_loss(p, y[idx])
            if not np.isfinite(loss):
                raise TrainingError("loss is not finite", epoch, b)
            network.backward(grad)
            opt.step(network)
            total += loss * len(idx)
        history.train_loss.append(total / n)
        if validation is not None:
            history.val_loss.append(evaluate_loss(network, *validation))
        log.debug("epoch %d loss %.5f", epoch, history.train_loss[-1])
    network.mode = "eval"
    return history


def predict(network: Network, x: np.ndarray) -> np.ndarray:
    return network.predict(x)
