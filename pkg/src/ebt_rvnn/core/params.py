"""
Parameter construction helpers shared by every module

Weights are drawn uniform in +-1/sqrt(fan_in) from an explicit generator,
biases start at zero, layer-norm gains at one.
"""

import math
from typing import Optional, Tuple

import torch
import torch.nn as nn


def weight(shape: Tuple[int, ...], fan_in: int, generator: Optional[torch.Generator] = None) -> nn.Parameter:
    bound = 1.0 / math.sqrt(fan_in)
    tensor = torch.empty(shape).uniform_(-bound, bound, generator=generator)
    return nn.Parameter(tensor)


def zeros(*shape: int) -> nn.Parameter:
    return nn.Parameter(torch.zeros(shape))


def ones(*shape: int) -> nn.Parameter:
    return nn.Parameter(torch.ones(shape))
