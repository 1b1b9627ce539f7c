"""From-scratch numpy networks: layers, recurrent cells, losses, optimizers, training."""

from .gradcheck import check_architecture, check_point, grad_check, tiny_config
from .layers import conv1d_forward, dropout
from .losses import softmax, softmax_ce
from .model import ARCHITECTURES, LayerSpec, Model, ModelConfig, architecture_config, canonical_kind
from .optim import adam_step, rmsprop_step
from .recurrent import gru_cell, lstm_cell
from .train import EpochLog, TrainedModel, train

__all__ = [
    "ARCHITECTURES", "EpochLog", "LayerSpec", "Model", "ModelConfig", "TrainedModel", "adam_step",
    "architecture_config", "canonical_kind", "check_architecture", "check_point", "conv1d_forward", "dropout",
    "grad_check", "gru_cell", "lstm_cell", "rmsprop_step", "softmax", "softmax_ce", "tiny_config", "train",
]
