"""Actor-critic network, flat parameters, and sampling ops."""
from .errors import NetError
from .ops import (
    HEAD_NAMES,
    N_HEADS,
    head_masks,
    masked_softmax,
    rng_uniforms,
    sample_action,
    sample_categorical,
    sample_categorical_bulk,
    target_attention,
)
from .params import LayoutEntry, Params, build_layout, layout_digest, layout_size
from .model import (
    HiddenState,
    LOGIT_MASK_VALUE,
    MobaNet,
    NetConfig,
    PolicyOutput,
    StepOutput,
    build_net,
    forward_observation,
    init_params,
    param_layout,
)

__all__ = [
    "HEAD_NAMES",
    "HiddenState",
    "LOGIT_MASK_VALUE",
    "LayoutEntry",
    "MobaNet",
    "N_HEADS",
    "NetConfig",
    "NetError",
    "Params",
    "PolicyOutput",
    "StepOutput",
    "build_layout",
    "build_net",
    "forward_observation",
    "head_masks",
    "init_params",
    "layout_digest",
    "layout_size",
    "masked_softmax",
    "param_layout",
    "rng_uniforms",
    "sample_action",
    "sample_categorical",
    "sample_categorical_bulk",
    "target_attention",
]
