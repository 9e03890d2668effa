"""
Differentiable primitives, recording tape and gradient checking
"""

from .tape import Tape, TapeRecord, Gradients, active_tape, backward
from .ops import (
    elementwise_unary,
    linear,
    concat,
    slice_prefix,
    softmax_masked,
    log_softmax,
    layer_norm,
    dropout,
    gumbel_noise,
)
from .gradcheck import finite_diff_check

__all__ = [
    "Tape",
    "TapeRecord",
    "Gradients",
    "active_tape",
    "backward",
    "elementwise_unary",
    "linear",
    "concat",
    "slice_prefix",
    "softmax_masked",
    "log_softmax",
    "layer_norm",
    "dropout",
    "gumbel_noise",
    "finite_diff_check",
]
