"""
Merge-order search over adjacent pairs

- ``greedy_reduce_step`` / ``greedy_encode``: easy-first reduction (GT, EGT)
- ``gumbel_ste_select``: hard forward, soft backward selection for greedy training
- ``stochastic_topk`` / ``beam_encode``: beam tree search (BT, EBT)
- ``marginalize_roots``: softmax over accumulated scores, weighted sum of roots
- ``exhaustive_merge_oracle``: every merge order for tiny inputs

``mode`` picks the scorer: "entangled" composes every candidate pair and scores
the parents, "disentangled" scores pairs directly and composes only what is
selected. Ties always go to the lowest index.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterator, List, NamedTuple, Optional, Tuple

import torch

from .cells import (
    GatedRecursiveCell,
    PairScorer,
    entangled_candidate_scores,
    grc_compose,
    pair_scores,
)
from ..autodiff import ops
from ..errors import ContractError, GuardError, TraceError
from ..utils.logging import get_logger

logger = get_logger(__name__)

MODES = ("entangled", "disentangled")
ORACLE_MAX_LENGTH = 6


class ReductionStep(NamedTuple):
    sequence: torch.Tensor   # [n-1, d]
    index: int
    parent: torch.Tensor     # [d]
    log_prob: torch.Tensor   # scalar, 0 when nothing had to be chosen


class STESelection(NamedTuple):
    weights: torch.Tensor    # one-hot in the forward pass, softmax gradient in the backward pass
    index: int


class TopK(NamedTuple):
    indices: torch.Tensor
    log_probs: torch.Tensor


@dataclass
class MergeChoice:
    """One candidate in the beam pool: merge pair ``index`` of beam ``beam``"""
    beam: int
    index: int
    log_prob: torch.Tensor


@dataclass
class BeamState:
    """K hypotheses of equal length with their accumulated log-softmax scores"""
    beams: torch.Tensor                  # [B, L, d]
    scores: torch.Tensor                 # [B]
    traces: List[List[int]]
    nonterminals: List[List[torch.Tensor]] = field(default_factory=list)

    @classmethod
    def start(cls, x: torch.Tensor) -> "BeamState":
        return cls(
            beams=x.unsqueeze(0),
            scores=x.new_zeros(1),
            traces=[[]],
            nonterminals=[[]],
        )

    @property
    def size(self) -> int:
        return self.beams.shape[0]

    @property
    def length(self) -> int:
        return self.beams.shape[1]

    def validate(self, initial_length: int):
        """Check the structural invariants; raises ContractError"""
        if any(len(t) != initial_length - self.length for t in self.traces):
            raise ContractError("trace length does not match the number of reductions")
        if len(self.traces) != self.size or self.scores.shape != (self.size,):
            raise ContractError("beam, score and trace counts differ")
        if bool((self.scores > 1e-12).any()):
            raise ContractError("accumulated log-softmax score above zero")


@dataclass
class BeamResult:
    """Final roots of every surviving beam plus what is needed to rebuild its tree"""
    roots: torch.Tensor                  # [K, d]
    scores: torch.Tensor                 # [K]
    traces: List[List[int]]
    nonterminals: List[torch.Tensor]     # per beam [n-1, d] in creation order

    @property
    def size(self) -> int:
        return self.roots.shape[0]

    def marginal(self) -> torch.Tensor:
        return marginalize_roots(self.roots, self.scores)


def _check_mode(mode: str):
    if mode not in MODES:
        raise ContractError(f"Unknown search mode {mode!r}; expected one of {', '.join(MODES)}")


def _candidates(
    beams: torch.Tensor,
    cell: GatedRecursiveCell,
    scorer: PairScorer,
    mode: str,
) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
    """Log-softmaxed pair scores [B, L-1], plus candidate parents [B, L-1, d] in entangled mode"""
    if mode == "entangled":
        parents, scores = entangled_candidate_scores(beams, cell, scorer)
    else:
        parents, scores = None, pair_scores(beams, scorer)
    return ops.log_softmax(scores), parents


def _splice(row: torch.Tensor, j: int, node: torch.Tensor) -> torch.Tensor:
    """Replace positions j, j+1 of row [L, d] with node [d]"""
    return torch.cat((row[:j], node.unsqueeze(0), row[j + 2:]))


def gumbel_ste_select(
    scores: torch.Tensor,
    temperature: float = 1.0,
    generator: Optional[torch.Generator] = None,
    noise: bool = True,
) -> STESelection:
    """Straight-through Gumbel selection over a 1-D score vector"""
    if scores.dim() != 1 or scores.numel() < 1:
        raise ContractError(f"gumbel_ste_select needs a non-empty 1-D score vector, got {tuple(scores.shape)}")
    if temperature <= 0:
        raise ContractError(f"temperature must be positive, got {temperature}")

    perturbed = scores
    if noise:
        perturbed = scores + ops.gumbel_noise(scores.shape, generator, scores.dtype)
    soft = torch.softmax(perturbed / temperature, dim=-1)
    index = int(torch.argmax(perturbed.detach()))
    hard = torch.zeros_like(soft)
    hard[index] = 1.0
    # soft - soft.detach() is exactly zero forward, so the forward value is the one-hot itself
    return STESelection(hard + (soft - soft.detach()), index)


def stochastic_topk(
    log_probs: torch.Tensor,
    k: int,
    noise: bool = False,
    generator: Optional[torch.Generator] = None,
) -> TopK:
    """Top-k of (optionally Gumbel-perturbed) log-probabilities.

    With noise this samples k items without replacement from the
    Plackett-Luce distribution given by ``exp(log_probs)``.
    """
    if k < 1:
        raise ContractError(f"stochastic_topk needs k >= 1, got {k}")

    keys = log_probs.detach()
    if noise:
        keys = keys + ops.gumbel_noise(keys.shape, generator, keys.dtype)
    order = torch.sort(keys, descending=True, stable=True).indices[:min(k, keys.numel())]
    return TopK(order, log_probs[order])


def greedy_reduce_step(
    h: torch.Tensor,
    cell: GatedRecursiveCell,
    scorer: PairScorer,
    mode: str = "disentangled",
    selector: Optional[Callable[[torch.Tensor], STESelection]] = None,
) -> ReductionStep:
    """Merge the best adjacent pair of h [n, d].

    Without a selector the argmax pair is merged and every other position is
    copied as is. With a selector (straight-through Gumbel) the chosen parent
    is scaled by the selection weight so the scorer receives gradient.
    """
    _check_mode(mode)
    n = h.shape[0]
    if n < 2:
        raise ContractError(f"greedy_reduce_step needs n >= 2, got {n}")

    if n == 2:
        parent = grc_compose(h[0:1], h[1:2], cell)[0]
        return ReductionStep(parent.unsqueeze(0), 0, parent, h.new_zeros(()))

    log_probs, parents = _candidates(h.unsqueeze(0), cell, scorer, mode)
    log_probs = log_probs[0]

    if selector is None:
        j = int(torch.argmax(log_probs.detach()))
        if parents is not None:
            parent = parents[0, j]
        else:
            parent = grc_compose(h[j:j + 1], h[j + 1:j + 2], cell)[0]
        return ReductionStep(_splice(h, j, parent), j, parent, log_probs[j])

    selection = selector(log_probs)
    j, w = selection.index, selection.weights
    if parents is not None:
        # every candidate parent is weighted so gradient reaches all of them
        taken = torch.cumsum(w, dim=0)
        left = (1.0 - taken).unsqueeze(-1)
        right = (taken - w).unsqueeze(-1)
        sequence = left * h[:-1] + w.unsqueeze(-1) * parents[0] + right * h[1:]
        return ReductionStep(sequence, j, sequence[j], log_probs[j])

    parent = grc_compose(h[j:j + 1], h[j + 1:j + 2], cell)[0] * w[j]
    return ReductionStep(_splice(h, j, parent), j, parent, log_probs[j])


def greedy_encode(
    x: torch.Tensor,
    cell: GatedRecursiveCell,
    scorer: PairScorer,
    mode: str = "disentangled",
    selector: Optional[Callable[[torch.Tensor], STESelection]] = None,
) -> BeamResult:
    """Reduce x [n, d] to one root with greedy steps; returned as a single beam"""
    if x.shape[0] < 1:
        raise ContractError("greedy_encode needs at least one terminal")

    h, score = x, x.new_zeros(())
    trace: List[int] = []
    nodes: List[torch.Tensor] = []
    while h.shape[0] > 1:
        step = greedy_reduce_step(h, cell, scorer, mode, selector)
        h, score = step.sequence, score + step.log_prob
        trace.append(step.index)
        nodes.append(step.parent)

    return BeamResult(
        roots=h,
        scores=score.reshape(1),
        traces=[trace],
        nonterminals=[_stack_nodes(nodes, x)],
    )


def replay_trace(
    x: torch.Tensor,
    trace: List[int],
    cell: GatedRecursiveCell,
) -> BeamResult:
    """Compose x [n, d] along a fixed merge trace (gold trees); no scorer involved"""
    validate_trace(trace, x.shape[0])
    h = x
    nodes: List[torch.Tensor] = []
    for j in trace:
        parent = grc_compose(h[j:j + 1], h[j + 1:j + 2], cell)[0]
        h = _splice(h, j, parent)
        nodes.append(parent)

    return BeamResult(
        roots=h,
        scores=x.new_zeros(1),
        traces=[list(trace)],
        nonterminals=[_stack_nodes(nodes, x)],
    )


def validate_trace(trace: List[int], n: int):
    """A full trace has n-1 merges and merge t indexes a pair of a length n-t sequence"""
    if len(trace) != max(n - 1, 0):
        raise TraceError(f"trace has {len(trace)} merges, a sequence of {n} needs {max(n - 1, 0)}")
    for step, j in enumerate(trace):
        length = n - step
        if not 0 <= j <= length - 2:
            raise TraceError(f"merge {step} picks pair {j} of a length-{length} sequence")


def _stack_nodes(nodes: List[torch.Tensor], like: torch.Tensor) -> torch.Tensor:
    if not nodes:
        return like.new_zeros((0, like.shape[-1]))
    return torch.stack(nodes)


def beam_encode(
    x: torch.Tensor,
    K: int,
    cell: GatedRecursiveCell,
    scorer: PairScorer,
    mode: str = "disentangled",
    noise: bool = False,
    generator: Optional[torch.Generator] = None,
) -> BeamResult:
    """Beam tree search over merge orders of x [n, d].

    Every beam proposes up to K merges with ``stochastic_topk`` over its
    log-softmaxed pair scores; the K*K pool is then pruned to the K best
    accumulated scores without noise. In disentangled mode the cell runs only
    for the surviving merges.
    """
    _check_mode(mode)
    if x.dim() != 2 or x.shape[0] < 1:
        raise ContractError(f"beam_encode needs a non-empty [n, d] input, got shape {tuple(x.shape)}")
    if K < 1:
        raise ContractError(f"beam size must be >= 1, got {K}")

    state = BeamState.start(x)

    while state.length > 2:
        log_probs, parents = _candidates(state.beams, cell, scorer, mode)

        pool: List[MergeChoice] = []
        for b in range(state.size):
            top = stochastic_topk(log_probs[b], K, noise, generator)
            for j, lp in zip(top.indices.tolist(), top.log_probs):
                pool.append(MergeChoice(b, j, lp))

        pool_beam = torch.tensor([c.beam for c in pool])
        pool_index = torch.tensor([c.index for c in pool])
        pool_scores = state.scores[pool_beam] + torch.stack([c.log_prob for c in pool])

        keep = torch.sort(pool_scores.detach(), descending=True, stable=True).indices[:K]
        b_sel, j_sel = pool_beam[keep], pool_index[keep]
        if parents is not None:
            new_nodes = parents[b_sel, j_sel]
        else:
            new_nodes = grc_compose(state.beams[b_sel, j_sel], state.beams[b_sel, j_sel + 1], cell)

        survivors = list(zip(b_sel.tolist(), j_sel.tolist()))
        state = BeamState(
            beams=torch.stack([_splice(state.beams[b], j, new_nodes[r]) for r, (b, j) in enumerate(survivors)]),
            scores=pool_scores[keep],
            traces=[state.traces[b] + [j] for b, j in survivors],
            nonterminals=[state.nonterminals[b] + [new_nodes[r]] for r, (b, j) in enumerate(survivors)],
        )

    if state.length == 2:
        roots = grc_compose(state.beams[:, 0], state.beams[:, 1], cell)
        traces = [t + [0] for t in state.traces]
        nonterminals = [nodes + [roots[r]] for r, nodes in enumerate(state.nonterminals)]
    else:
        roots = state.beams[:, 0]
        traces, nonterminals = state.traces, state.nonterminals

    logger.debug(f"beam_encode n={x.shape[0]} K={K} mode={mode} -> {roots.shape[0]} beams")
    return BeamResult(
        roots=roots,
        scores=state.scores,
        traces=traces,
        nonterminals=[_stack_nodes(nodes, x) for nodes in nonterminals],
    )


def marginalize_roots(roots: torch.Tensor, scores: torch.Tensor) -> torch.Tensor:
    """sum_i softmax(scores)_i * roots_i"""
    if roots.shape[0] < 1 or scores.shape != (roots.shape[0],):
        raise ContractError(f"marginalize_roots: roots {tuple(roots.shape)} vs scores {tuple(scores.shape)}")
    weights = torch.softmax(scores, dim=0)
    return (weights.unsqueeze(-1) * roots).sum(dim=0)


class OracleSequence(NamedTuple):
    score: torch.Tensor
    root: torch.Tensor
    trace: List[int]


def exhaustive_merge_oracle(
    x: torch.Tensor,
    cell: GatedRecursiveCell,
    scorer: PairScorer,
    mode: str = "disentangled",
) -> List[OracleSequence]:
    """Every one of the (n-1)! merge orders, in lexicographic trace order"""
    _check_mode(mode)
    n = x.shape[0]
    if n < 1:
        raise ContractError("exhaustive_merge_oracle needs at least one terminal")
    if n > ORACLE_MAX_LENGTH:
        raise GuardError(f"exhaustive_merge_oracle refuses n={n} (limit {ORACLE_MAX_LENGTH})")

    def expand(h: torch.Tensor, score: torch.Tensor, trace: List[int]) -> Iterator[OracleSequence]:
        length = h.shape[0]
        if length == 1:
            yield OracleSequence(score, h[0], trace)
            return
        if length == 2:
            yield OracleSequence(score, grc_compose(h[0:1], h[1:2], cell)[0], trace + [0])
            return

        log_probs, parents = _candidates(h.unsqueeze(0), cell, scorer, mode)
        for j in range(length - 1):
            if parents is not None:
                node = parents[0, j]
            else:
                node = grc_compose(h[j:j + 1], h[j + 1:j + 2], cell)[0]
            yield from expand(_splice(h, j, node), score + log_probs[0, j], trace + [j])

    return list(expand(x, x.new_zeros(()), []))
