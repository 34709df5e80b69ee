"""1D convolutional autoencoder for denoising OOK pulse records."""
from .layers import (
    bce_loss,
    conv1d_backward,
    conv1d_forward,
    conv1d_transpose_backward,
    conv1d_transpose_forward,
    relu,
    sigmoid,
)
from .model import CaeArchitecture, CaeModel, ConvSpec, backward
from .optim import AdamConfig, AdamState, adam_step, apply_max_norm
from .serialize import load_model, save_model
from .training import TrainConfig, TrainHistory, rmse, split_indices, train
