"""
Differentiable primitives used by the recursive cell, the scorers and the
attention blocks. Each primitive checks its shape contract, computes with
torch and logs itself on the active tape.
"""

import math
from typing import Optional

import torch
import torch.nn.functional as F

from .tape import active_tape
from ..errors import ContractError, DimensionError

LAYER_NORM_EPS = 1e-5

_UNARY = {
    "sigmoid": torch.sigmoid,
    # exact erf form, no tanh approximation
    "gelu": lambda x: F.gelu(x, approximate="none"),
    "silu": F.silu,
}


def _record(kind: str, inputs, output: torch.Tensor) -> torch.Tensor:
    tape = active_tape()
    if tape is not None:
        tape.record(kind, inputs, output)
    return output


def elementwise_unary(kind: str, x: torch.Tensor) -> torch.Tensor:
    """sigmoid | gelu | silu, same shape as the input"""
    try:
        fn = _UNARY[kind]
    except KeyError:
        raise ContractError(f"Unknown elementwise op {kind!r}; expected one of {', '.join(_UNARY)}")
    return _record(kind, (x,), fn(x))


def linear(x: torch.Tensor, W: torch.Tensor, b: Optional[torch.Tensor] = None) -> torch.Tensor:
    """x W + b with the bias broadcast over rows; W is stored (in, out)"""
    if W.dim() != 2 or x.shape[-1] != W.shape[0]:
        raise DimensionError(f"linear: input {tuple(x.shape)} does not match weight {tuple(W.shape)}")
    if b is not None and tuple(b.shape) != (W.shape[1],):
        raise DimensionError(f"linear: bias {tuple(b.shape)} does not match weight {tuple(W.shape)}")

    out = torch.matmul(x, W)
    if b is not None:
        out = out + b
    return _record("linear", (x, W, b), out)


def concat(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Last-axis concatenation"""
    if a.shape[:-1] != b.shape[:-1]:
        raise DimensionError(f"concat: leading dims of {tuple(a.shape)} and {tuple(b.shape)} differ")
    return _record("concat", (a, b), torch.cat((a, b), dim=-1))


def slice_prefix(x: torch.Tensor, k: int) -> torch.Tensor:
    """First min(k, d) entries of the last axis"""
    if k < 1:
        raise ContractError(f"slice_prefix needs k >= 1, got {k}")
    width = min(k, x.shape[-1])
    return _record("slice_prefix", (x,), x[..., :width])


def softmax_masked(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Row softmax over allowed entries. Masked entries get exactly 0 and
    rows with nothing allowed come back as all zeros."""
    if logits.shape != mask.shape:
        raise DimensionError(f"softmax_masked: logits {tuple(logits.shape)} vs mask {tuple(mask.shape)}")

    allowed = mask.to(torch.bool)
    if logits.shape[-1] == 0:
        return _record("softmax_masked", (logits,), logits * 0)

    floor = torch.finfo(logits.dtype).min
    shifted = logits.masked_fill(~allowed, floor)
    shifted = shifted - shifted.amax(dim=-1, keepdim=True).detach()
    weights = torch.exp(shifted) * allowed.to(logits.dtype)
    total = weights.sum(dim=-1, keepdim=True)
    total = torch.where(total > 0, total, torch.ones_like(total))
    return _record("softmax_masked", (logits,), weights / total)


def log_softmax(logits: torch.Tensor) -> torch.Tensor:
    """Max-shifted log-softmax over the last axis"""
    return _record("log_softmax", (logits,), torch.log_softmax(logits, dim=-1))


def layer_norm(
    x: torch.Tensor,
    gain: torch.Tensor,
    bias: torch.Tensor,
    eps: float = LAYER_NORM_EPS,
) -> torch.Tensor:
    """Standardize the last axis (biased variance) then scale and shift"""
    d = x.shape[-1]
    if tuple(gain.shape) != (d,) or tuple(bias.shape) != (d,):
        raise DimensionError(f"layer_norm: input {tuple(x.shape)} vs gain {tuple(gain.shape)}, bias {tuple(bias.shape)}")
    return _record("layer_norm", (x, gain, bias), F.layer_norm(x, (d,), gain, bias, eps))


def dropout(
    x: torch.Tensor,
    rate: float,
    training: bool,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """Inverted dropout drawing its mask from an explicit generator; identity when not training"""
    if not training or rate == 0.0:
        return x
    keep = 1.0 - rate
    mask = torch.empty_like(x).bernoulli_(keep, generator=generator)
    return _record("dropout", (x,), x * mask / keep)


def gumbel_noise(shape, generator: Optional[torch.Generator] = None,
                 dtype: torch.dtype = torch.float64) -> torch.Tensor:
    """Standard Gumbel(0, 1) samples"""
    uniform = torch.rand(shape, generator=generator, dtype=dtype)
    tiny = torch.finfo(dtype).tiny
    uniform = uniform.clamp(min=tiny, max=1.0 - torch.finfo(dtype).eps)
    return -torch.log(-torch.log(uniform))


def inverse_sqrt(width: int) -> float:
    return 1.0 / math.sqrt(width)
