"""
Finite-difference gradient oracle
"""

from typing import Callable, List, Sequence, Tuple

import torch

DEFAULT_STEP = 1e-5
# only guards 0/0; exact zeros on both sides (masked or sliced entries) give 0
ERROR_FLOOR = 1e-8


def finite_diff_check(
    f: Callable[[], torch.Tensor],
    params: Sequence[torch.Tensor],
    h: float = DEFAULT_STEP,
    scale_floor: float = 0.0,
) -> float:
    """Max relative error between autograd and central differences.

    ``f`` takes no arguments and reads ``params`` by closure; it must be
    deterministic and return a scalar. Each entry of each parameter is nudged
    by +-h in place. The error of one entry is
    |a - n| / max(|a|, |n|, ERROR_FLOOR, scale_floor * g) where g is the
    largest |a| or |n| over all entries checked. Run it in float64.
    """
    params = list(params)
    loss = f()
    analytic = torch.autograd.grad(loss.reshape(()), params, allow_unused=True)

    pairs: List[Tuple[float, float]] = []
    with torch.no_grad():
        for param, grad in zip(params, analytic):
            if grad is None:
                grad = torch.zeros_like(param)
            flat = param.view(-1)
            flat_grad = grad.reshape(-1)
            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + h
                upper = f().item()
                flat[i] = original - h
                lower = f().item()
                flat[i] = original
                pairs.append((flat_grad[i].item(), (upper - lower) / (2.0 * h)))

    if not pairs:
        return 0.0
    scale = max(max(abs(a), abs(n)) for a, n in pairs)
    floor = max(ERROR_FLOOR, scale_floor * scale)
    return max(abs(a - n) / max(abs(a), abs(n), floor) for a, n in pairs)
