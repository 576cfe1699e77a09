"""Small numpy neural-network engine: layers, BCE training, checkpoints, gradient checks."""

from .checkpoint import CheckpointError, load_network, loads_network, dumps_network, save_network
from .gradcheck import GradCheckReport, grad_check, run_suite
from .network import (
    HeadSpec,
    LayerSpec,
    Network,
    NetworkConfig,
    NetworkConfigError,
    NumericError,
    default_config,
    init_network,
    conv_config,
    vector_config,
)
from .training import TrainConfig, TrainHistory, TrainingError, bce_multi_loss, predict, train

__all__ = [
    "CheckpointError", "GradCheckReport", "HeadSpec", "LayerSpec", "Network", "NetworkConfig",
    "NetworkConfigError", "NumericError", "TrainConfig", "TrainHistory", "TrainingError",
    "bce_multi_loss", "default_config", "dumps_network", "grad_check", "init_network",
    "load_network", "loads_network", "predict", "run_suite", "save_network", "conv_config",
    "train", "vector_config",
]
