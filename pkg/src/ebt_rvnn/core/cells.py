"""
Gated recursive cell, initial transformation and the two pair scorers

The legacy scorer needs a full cell composition for every candidate pair
(``entangled_candidate_scores``); the disentangled scorer reads the first
min(d_s, d) coordinates of the two children directly and never calls the cell.
"""

from typing import Optional, Tuple

import torch
import torch.nn as nn

from . import params
from ..autodiff import ops
from ..autodiff.tape import active_tape
from ..errors import ContractError, DimensionError
from ..utils.logging import get_logger

logger = get_logger(__name__)


class InitialTransform(nn.Module):
    """Linear map to the cell width followed by layer normalization"""

    def __init__(self, d_emb: int, d: int, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.W = params.weight((d_emb, d), d_emb, generator)
        self.b = params.zeros(d)
        self.ln_gain = params.ones(d)
        self.ln_bias = params.zeros(d)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        return init_transform(tokens, self)


def init_transform(tokens: torch.Tensor, p: InitialTransform) -> torch.Tensor:
    """Height-0 terminal nodes from token vectors [n x d_emb] -> [n x d]"""
    if tokens.dim() < 2 or tokens.shape[0] < 1:
        raise ContractError(f"init_transform needs at least one token row, got shape {tuple(tokens.shape)}")
    return ops.layer_norm(ops.linear(tokens, p.W, p.b), p.ln_gain, p.ln_bias)


class GatedRecursiveCell(nn.Module):
    """p = LN(sig(l)*child_l + sig(r)*child_r + sig(g)*h) with [l; r; g; h] from a GeLU MLP"""

    def __init__(self, d: int, d_cell: Optional[int] = None, generator: Optional[torch.Generator] = None):
        super().__init__()
        d_cell = d_cell or 4 * d
        self.d = d
        self.d_cell = d_cell
        self.W1 = params.weight((2 * d, d_cell), 2 * d, generator)
        self.b1 = params.zeros(d_cell)
        self.W2 = params.weight((d_cell, 4 * d), d_cell, generator)
        self.b2 = params.zeros(4 * d)
        self.ln_gain = params.ones(d)
        self.ln_bias = params.zeros(d)

    @property
    def parameter_count(self) -> int:
        d, c = self.d, self.d_cell
        return 2 * d * c + c + c * 4 * d + 4 * d + 2 * d

    def forward(self, child_l: torch.Tensor, child_r: torch.Tensor) -> torch.Tensor:
        return grc_compose(child_l, child_r, self)


def grc_compose(child_l: torch.Tensor, child_r: torch.Tensor, cell: GatedRecursiveCell) -> torch.Tensor:
    """Compose children of shape [..., d] into parents of shape [..., d]"""
    if child_l.shape != child_r.shape or child_l.shape[-1] != cell.d:
        raise DimensionError(
            f"grc_compose: children {tuple(child_l.shape)} and {tuple(child_r.shape)} for cell width {cell.d}"
        )

    tape = active_tape()
    if tape is not None:
        tape.count("grc_compose", child_l[..., 0].numel())

    hidden = ops.elementwise_unary("gelu", ops.linear(ops.concat(child_l, child_r), cell.W1, cell.b1))
    gates = ops.linear(hidden, cell.W2, cell.b2)
    # fixed split order [l; r; g; h]
    l, r, g, h = torch.split(gates, cell.d, dim=-1)
    mixed = (ops.elementwise_unary("sigmoid", l) * child_l
             + ops.elementwise_unary("sigmoid", r) * child_r
             + ops.elementwise_unary("sigmoid", g) * h)
    return ops.layer_norm(mixed, cell.ln_gain, cell.ln_bias)


class PairScorer(nn.Module):
    """Holds both scorers: the legacy linear W_v and the sliced two-layer MLP"""

    def __init__(self, d: int, d_s: int = 64, slice_inputs: bool = True,
                 generator: Optional[torch.Generator] = None):
        super().__init__()
        self.d = d
        self.d_s = d_s
        self.slice_inputs = slice_inputs
        self.width = min(d_s, d) if slice_inputs else d
        self.legacy_Wv = params.weight((1, d), d, generator)
        self.Ws1 = params.weight((2 * self.width, d_s), 2 * self.width, generator)
        self.bs1 = params.zeros(d_s)
        self.Ws2 = params.weight((d_s, 1), d_s, generator)
        self.bs2 = params.zeros(1)

    @property
    def parameter_count(self) -> int:
        """Parameters of the disentangled scorer only"""
        return 2 * self.width * self.d_s + self.d_s + self.d_s + 1


def legacy_score(p_vec: torch.Tensor, s: PairScorer) -> torch.Tensor:
    """W_v p for parents of shape [..., d]; returns [...]"""
    tape = active_tape()
    if tape is not None:
        tape.count("scorer", p_vec[..., 0].numel())
    return ops.linear(p_vec, s.legacy_Wv.t()).squeeze(-1)


def disentangled_score(h_i: torch.Tensor, h_j: torch.Tensor, s: PairScorer) -> torch.Tensor:
    """GeLU([h_i; h_j] Ws1 + bs1) Ws2 + bs2 on the sliced prefixes; no cell call"""
    if h_i.shape != h_j.shape or h_i.shape[-1] != s.d:
        raise DimensionError(f"disentangled_score: inputs {tuple(h_i.shape)} and {tuple(h_j.shape)} for width {s.d}")

    tape = active_tape()
    if tape is not None:
        tape.count("scorer", h_i[..., 0].numel())

    pair = ops.concat(ops.slice_prefix(h_i, s.width), ops.slice_prefix(h_j, s.width))
    hidden = ops.elementwise_unary("gelu", ops.linear(pair, s.Ws1, s.bs1))
    return ops.linear(hidden, s.Ws2, s.bs2).squeeze(-1)


def entangled_candidate_scores(
    h: torch.Tensor,
    cell: GatedRecursiveCell,
    s: PairScorer,
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Compose every adjacent pair of h [..., n, d] and score each parent.

    Returns parents [..., n-1, d] and scores [..., n-1].
    """
    n = h.shape[-2]
    if n < 2:
        raise ContractError(f"entangled_candidate_scores needs n >= 2, got {n}")
    parents = grc_compose(h[..., :-1, :], h[..., 1:, :], cell)
    return parents, legacy_score(parents, s)


def pair_scores(h: torch.Tensor, s: PairScorer) -> torch.Tensor:
    """Disentangled scores of every adjacent pair of h [..., n, d] -> [..., n-1]"""
    if h.shape[-2] < 2:
        raise ContractError(f"pair_scores needs n >= 2, got {h.shape[-2]}")
    return disentangled_score(h[..., :-1, :], h[..., 1:, :], s)
