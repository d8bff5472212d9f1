from .adam import AdamState, adam_step, init_adam
from .gradcheck import GradCheckResult, gradcheck_layer, run_gradchecks
from .layers import BN_EPS, BN_MOMENTUM, KINDS, LayerSpec, Tensor
from .network import (
    NN_MAGIC,
    Network,
    init_network,
    load_network,
    save_network,
)

__all__ = [
    "AdamState",
    "adam_step",
    "init_adam",
    "GradCheckResult",
    "gradcheck_layer",
    "run_gradchecks",
    "BN_EPS",
    "BN_MOMENTUM",
    "KINDS",
    "LayerSpec",
    "Tensor",
    "NN_MAGIC",
    "Network",
    "init_network",
    "load_network",
    "save_network",
]
