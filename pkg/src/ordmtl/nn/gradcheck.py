"""Finite-difference verification of backpropagated gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import Network, NetworkConfig, init_network
from .training import bce_multi_loss

MAX_CHECK_PARAMS = 5000


@dataclass
class GradCheckReport:
    tolerance: float
    per_layer: dict[str, float] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.per_layer.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def lines(self) -> list[str]:
        out = [f"{name:<24} {err:.3e}" for name, err in self.per_layer.items()]
        out.append(f"max relative error {self.max_error:.3e} (tolerance {self.tolerance:g}): "
                   + ("PASS" if self.passed else "FAIL"))
        return out


def relative_error(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)


def check_network(
    net: Network,
    x: np.ndarray,
    y: np.ndarray,
    tolerance: float = 1e-4,
    step: float = 1e-5,
    mask_seed: int = 0,
) -> GradCheckReport:
    """Compare backprop against central differences for every trainable tensor.

    Dropout masks are frozen by re-seeding the generator on each evaluation;
    batch normalisation runs in train mode on the fixed batch.
    """

    def loss_and_grad():
        p = net.forward(x, "train", np.random.default_rng(mask_seed))
        return bce_multi_loss(p, y)

    _, dp = loss_and_grad()
    net.backward(dp)
    analytic = {(i, name): layer.grads[name].copy() for i, name, layer in net.trainable()}

    report = GradCheckReport(tolerance)
    for i, name, layer in net.trainable():
        theta = layer.params[name]
        flat = theta.reshape(-1)
        numeric = np.empty_like(flat)
        for j in range(flat.size):
            orig = flat[j]
            h = step * max(1.0, abs(orig))
            flat[j] = orig + h
            up = loss_and_grad()[0]
            flat[j] = orig - h
            down = loss_and_grad()[0]
            flat[j] = orig
            numeric[j] = (up - down) / (2.0 * h)
        err = relative_error(analytic[(i, name)].reshape(-1), numeric)
        key = f"{i}:{type(layer).__name__.lower()}"
        report.per_layer[key] = max(report.per_layer.get(key, 0.0), float(err.max(initial=0.0)))
    return report


def grad_check(config: NetworkConfig, seed: int = 0, tolerance: float = 1e-4, batch_size: int = 6) -> GradCheckReport:
    net = init_network(config, seed)
    if net.num_parameters > MAX_CHECK_PARAMS:
        raise ValueError(f"network has {net.num_parameters} parameters; grad_check is limited to {MAX_CHECK_PARAMS}")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(batch_size, *config.input_shape))
    y = (rng.random((batch_size, config.head.num_outputs)) < 0.5).astype(np.float64)
    return check_network(net, x, y, tolerance, mask_seed=seed + 1)


def default_suite() -> dict[str, NetworkConfig]:
    """Tiny networks that together exercise every layer kind."""
    from .network import HeadSpec, LayerSpec as S

    return {
        "dense": NetworkConfig((5,), (S("dense", 6), S("relu"), S("dense", 4), S("relu")), HeadSpec(3), 1.0),
        "dense_bn_dropout": NetworkConfig(
            (5,), (S("dense", 6), S("relu"), S("batchnorm"), S("dropout", 0.5)), HeadSpec(3), 1.0
        ),
        "conv": NetworkConfig(
            (6, 6, 2),
            (
                S("conv2d", 3), S("relu"), S("dropout", 0.5),
                S("conv2d", 3), S("relu"), S("batchnorm"), S("maxpool"), S("dropout", 0.5),
                S("flatten"), S("dense", 4), S("relu"),
            ),
            HeadSpec(3),
            1.0,
        ),
        "conv_single_output": NetworkConfig(
            (4, 4, 1), (S("conv2d", 2), S("batchnorm"), S("maxpool"), S("flatten")), HeadSpec(1), 1.0
        ),
    }


def run_suite(seed: int = 0, tolerance: float = 1e-4) -> dict[str, GradCheckReport]:
    return {name: grad_check(cfg, seed, tolerance) for name, cfg in default_suite().items()}
