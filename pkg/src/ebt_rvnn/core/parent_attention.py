"""
Top-down token contextualization over induced trees

Terminals are queries, the non-terminals of one beam's tree are keys and
values, and a terminal may only attend to its own ancestors. Attention logits
carry a learned bias indexed by the height difference between key and query.
Each beam is contextualized separately and the results are averaged with the
softmax of the beam scores.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import torch
import torch.nn as nn

from . import params
from .cells import GatedRecursiveCell
from .search import BeamResult, replay_trace, validate_trace
from ..autodiff import ops
from ..errors import ContractError, DimensionError

DEFAULT_HEAD_SIZE = 128
DEFAULT_MAX_DISTANCE = 10


@dataclass
class TreeRecord:
    """Non-terminals of one tree with their ancestry mask and heights"""
    nonterminals: torch.Tensor   # [l, d], creation order, root last
    adjacency: torch.Tensor      # bool [n, l]: terminal i lies under non-terminal j
    heights: torch.Tensor        # long [l]

    @property
    def n_terminals(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_nonterminals(self) -> int:
        return self.adjacency.shape[1]


def tree_structure(trace: List[int], n: int):
    """Adjacency [n, n-1] and heights [n-1] of the binary tree a trace builds"""
    validate_trace(trace, n)

    # (first leaf, last leaf, height) of every node in the current sequence
    sequence = [(i, i, 0) for i in range(n)]
    adjacency = torch.zeros((n, len(trace)), dtype=torch.bool)
    heights = torch.zeros(len(trace), dtype=torch.long)

    for k, j in enumerate(trace):
        (first, _, left_height), (_, last, right_height) = sequence[j], sequence[j + 1]
        height = 1 + max(left_height, right_height)
        adjacency[first:last + 1, k] = True
        heights[k] = height
        sequence[j:j + 2] = [(first, last, height)]

    return adjacency, heights


def record_tree(trace: List[int], terminals: torch.Tensor, cell: GatedRecursiveCell) -> TreeRecord:
    """Replay a trace over terminals [n, d], keeping every composed node"""
    encoded = replay_trace(terminals, trace, cell)
    adjacency, heights = tree_structure(trace, terminals.shape[0])
    return TreeRecord(encoded.nonterminals[0], adjacency, heights)


def records_from_beams(result: BeamResult, n: int) -> List[TreeRecord]:
    """Tree records of every surviving beam, reusing the nodes built during search"""
    records = []
    for trace, nodes in zip(result.traces, result.nonterminals):
        adjacency, heights = tree_structure(trace, n)
        records.append(TreeRecord(nodes, adjacency, heights))
    return records


def relative_height_bias(
    q_heights: torch.Tensor,
    k_heights: torch.Tensor,
    table: torch.Tensor,
    max_dist: int = DEFAULT_MAX_DISTANCE,
    mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """bias[i, j] = table[min(k_heights[j] - q_heights[i], max_dist)].

    Only non-negative distances have table entries; a negative distance at an
    unmasked position is an error. Masked positions read table[0].
    """
    distance = k_heights.unsqueeze(0) - q_heights.unsqueeze(1)
    allowed = torch.ones_like(distance, dtype=torch.bool) if mask is None else mask.to(torch.bool)
    if bool(((distance < 0) & allowed).any()):
        raise ContractError("relative_height_bias: key below its query at an unmasked position")
    return table[distance.clamp(0, max_dist)]


class GAUBlock(nn.Module):
    """Gated attention unit with a shared input projection and a gated residual"""

    def __init__(self, d: int, head_size: int = DEFAULT_HEAD_SIZE, max_dist: int = DEFAULT_MAX_DISTANCE,
                 dropout: float = 0.1, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.d = d
        self.head_size = head_size
        self.max_dist = max_dist
        self.dropout = dropout

        self.W_init = params.weight((d, d), d, generator)
        self.b_init = params.zeros(d)
        self.ln_gain = params.ones(d)
        self.ln_bias = params.zeros(d)
        self.W_u = params.weight((d, 2 * d), d, generator)
        self.b_u = params.zeros(2 * d)
        self.W_v = params.weight((d, 2 * d), d, generator)
        self.b_v = params.zeros(2 * d)
        self.W_z = params.weight((d, head_size), d, generator)
        self.b_z = params.zeros(head_size)
        self.z_q = params.ones(head_size)
        self.zb_q = params.zeros(head_size)
        self.z_k = params.ones(head_size)
        self.zb_k = params.zeros(head_size)
        self.W_o = params.weight((2 * d, d), 2 * d, generator)
        self.b_o = params.zeros(d)
        self.W_gate = params.weight((2 * d, d), 2 * d, generator)
        self.b_gate = params.zeros(d)
        # one shared scalar per clipped height distance 0..max_dist
        self.rel_table = params.zeros(max_dist + 1)


def gau_block(
    x: torch.Tensor,
    p: torch.Tensor,
    G: torch.Tensor,
    block: GAUBlock,
    pos: torch.Tensor,
    training: bool = False,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """x [n, d] attends over p [l, d] under mask G [n, l] with additive bias pos [n, l]"""
    n, l = x.shape[0], p.shape[0]
    if x.shape[-1] != block.d or p.shape[-1] != block.d:
        raise DimensionError(f"gau_block: x {tuple(x.shape)}, p {tuple(p.shape)} for width {block.d}")
    if tuple(G.shape) != (n, l) or tuple(pos.shape) != (n, l):
        raise DimensionError(f"gau_block: mask {tuple(G.shape)} and pos {tuple(pos.shape)} must be {(n, l)}")

    x_n, p_n = normalize_inputs(x, block), normalize_inputs(p, block)

    u = ops.elementwise_unary("silu", ops.linear(x_n, block.W_u, block.b_u))
    v = ops.elementwise_unary("silu", ops.linear(p_n, block.W_v, block.b_v))
    attention = attention_weights(x_n, p_n, G, block, pos)
    context = torch.matmul(attention, v)

    o = ops.dropout(ops.linear(u * context, block.W_o, block.b_o), block.dropout, training, generator)
    g = ops.elementwise_unary("sigmoid", ops.linear(ops.concat(o, x), block.W_gate, block.b_gate))
    return g * o + (1.0 - g) * x


def normalize_inputs(v: torch.Tensor, block: GAUBlock) -> torch.Tensor:
    """Shared input projection and layer norm applied to queries and keys alike"""
    return ops.layer_norm(ops.linear(v, block.W_init, block.b_init), block.ln_gain, block.ln_bias)


def attention_weights(
    x_n: torch.Tensor,
    p_n: torch.Tensor,
    G: torch.Tensor,
    block: GAUBlock,
    pos: torch.Tensor,
) -> torch.Tensor:
    """Masked attention [n, l] of normalized terminals x_n over normalized non-terminals p_n"""
    q = block.z_q * ops.elementwise_unary("silu", ops.linear(x_n, block.W_z, block.b_z)) + block.zb_q
    k = block.z_k * ops.elementwise_unary("silu", ops.linear(p_n, block.W_z, block.b_z)) + block.zb_k
    logits = (torch.matmul(q, k.t()) + pos) * ops.inverse_sqrt(2 * block.d)
    return ops.softmax_masked(logits, G)


def terminal_height_bias(record: TreeRecord, block: GAUBlock) -> torch.Tensor:
    """Height bias of terminal queries (height 0) against every non-terminal of a tree"""
    q_heights = torch.zeros(record.n_terminals, dtype=torch.long)
    return relative_height_bias(q_heights, record.heights, block.rel_table, block.max_dist, record.adjacency)


def contextualize_tokens(
    terminals: torch.Tensor,
    beam_records: Sequence[TreeRecord],
    beam_scores: torch.Tensor,
    block: GAUBlock,
    iterations: int = 2,
    training: bool = False,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """Refine terminals [n, d] against each beam's tree, then marginalize over beams"""
    if not beam_records or beam_scores.shape != (len(beam_records),):
        raise ContractError(f"contextualize_tokens: {len(beam_records)} records vs scores {tuple(beam_scores.shape)}")
    if iterations < 1:
        raise ContractError(f"contextualize_tokens needs iterations >= 1, got {iterations}")

    per_beam = []
    for record in beam_records:
        pos = terminal_height_bias(record, block)
        h = terminals
        # the same block is reused every iteration
        for _ in range(iterations):
            h = gau_block(h, record.nonterminals, record.adjacency, block, pos, training, generator)
        per_beam.append(h)

    weights = torch.softmax(beam_scores, dim=0)
    return (weights.view(-1, 1, 1) * torch.stack(per_beam)).sum(dim=0)


class AttentionPool(nn.Module):
    """alpha = softmax(GeLU(r W_1 + b_1) W_2 + b_2) over positions"""

    def __init__(self, d: int, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.W_1 = params.weight((d, d), d, generator)
        self.b_1 = params.zeros(d)
        self.W_2 = params.weight((d, 1), d, generator)
        self.b_2 = params.zeros(1)


def attention_pool(r: torch.Tensor, head: AttentionPool) -> torch.Tensor:
    """Pool r [n, d] into one vector [d]"""
    if r.dim() != 2 or r.shape[0] < 1:
        raise ContractError(f"attention_pool needs a non-empty [n, d] input, got {tuple(r.shape)}")
    logits = ops.linear(ops.elementwise_unary("gelu", ops.linear(r, head.W_1, head.b_1)), head.W_2, head.b_2)
    alpha = torch.softmax(logits.squeeze(-1), dim=0)
    return (alpha.unsqueeze(-1) * r).sum(dim=0)
