"""
Self-checks run by the ``gradcheck`` and ``oracle`` commands
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import torch

from . import cells, parent_attention, search
from .models import ClassifierHead, classify, cross_entropy
from ..autodiff import ops
from ..autodiff.gradcheck import finite_diff_check
from ..utils.logging import get_logger

logger = get_logger(__name__)

GRADCHECK_TOLERANCE = 1e-4
ORACLE_TOLERANCE = 1e-9
# gradient entries this far below the largest of a check are central-difference roundoff
SUITE_SCALE_FLOOR = 1e-5


@dataclass
class GradCheckResult:
    name: str
    max_error: float
    shapes: int = 1

    @property
    def passed(self) -> bool:
        return self.max_error < GRADCHECK_TOLERANCE


def _projected(out: torch.Tensor, generator: torch.Generator) -> Callable[[torch.Tensor], torch.Tensor]:
    """A fixed random linear functional, so no output coordinate has a vanishing gradient"""
    weights = torch.randn(out.shape, generator=generator, dtype=torch.float64)
    return lambda y: (y * weights).sum()


def _check(name: str, fn: Callable[[], torch.Tensor], tensors: Sequence[torch.Tensor],
           generator: torch.Generator) -> GradCheckResult:
    project = _projected(fn(), generator)
    error = finite_diff_check(lambda: project(fn()), tensors, scale_floor=SUITE_SCALE_FLOOR)
    logger.debug(f"gradcheck {name}: {error:.3e}")
    return GradCheckResult(name, error)


SUITE_SHAPES = 10


def _random_trace(n: int, g: torch.Generator) -> List[int]:
    return [int(torch.randint(0, n - t - 1, (1,), generator=g)) for t in range(n - 1)]


def _suite_cases(g: torch.Generator) -> Dict[str, Tuple[Callable[[], torch.Tensor], List[torch.Tensor]]]:
    """Every checked function on freshly drawn small shapes and parameters"""

    def size(low: int, high: int) -> int:
        return int(torch.randint(low, high + 1, (1,), generator=g))

    def rand(*shape):
        return torch.randn(*shape, generator=g, dtype=torch.float64).requires_grad_()

    d, rows, out = size(2, 5), size(1, 4), size(1, 5)
    n = rows + 1
    x, y = rand(rows, d), rand(rows, d)
    W, b = rand(d, out), rand(out)
    gain, bias = rand(d), rand(d)
    mask = torch.arange(rows * d).reshape(rows, d) % 3 != 1
    keep = size(1, d + 1)

    cell = cells.GatedRecursiveCell(d, size(d, 2 * d), g).double()
    scorer = cells.PairScorer(d, d_s=size(1, d), slice_inputs=True, generator=g).double()
    block = parent_attention.GAUBlock(d, head_size=size(1, 3), max_dist=size(1, 4), dropout=0.0, generator=g).double()
    with torch.no_grad():
        block.rel_table.normal_(generator=g)
        block.z_q.normal_(generator=g)
        block.z_k.normal_(generator=g)
    pool = parent_attention.AttentionPool(d, g).double()
    head = ClassifierHead(d, 10, g).double()

    terminals = rand(n, d)
    record = parent_attention.TreeRecord(rand(n - 1, d), *parent_attention.tree_structure(_random_trace(n, g), n))
    vec = rand(d)
    logits = rand(10)
    label = size(0, 9)

    return {
        "sigmoid": (lambda: ops.elementwise_unary("sigmoid", x), [x]),
        "gelu": (lambda: ops.elementwise_unary("gelu", x), [x]),
        "silu": (lambda: ops.elementwise_unary("silu", x), [x]),
        "linear": (lambda: ops.linear(x, W, b), [x, W, b]),
        "concat": (lambda: ops.concat(x, y), [x, y]),
        "slice_prefix": (lambda: ops.slice_prefix(x, keep), [x]),
        "softmax_masked": (lambda: ops.softmax_masked(x, mask), [x]),
        "log_softmax": (lambda: ops.log_softmax(x), [x]),
        "layer_norm": (lambda: ops.layer_norm(x, gain, bias), [x, gain, bias]),
        "grc_compose": (lambda: cells.grc_compose(x, y, cell), [x, y, *cell.parameters()]),
        "disentangled_score": (lambda: cells.disentangled_score(x, y, scorer),
                               [x, y, scorer.Ws1, scorer.bs1, scorer.Ws2, scorer.bs2]),
        "gau_block": (lambda: parent_attention.gau_block(
            terminals, record.nonterminals, record.adjacency, block,
            parent_attention.terminal_height_bias(record, block)),
                      [terminals, record.nonterminals, *block.parameters()]),
        "attention_pool": (lambda: parent_attention.attention_pool(terminals, pool), [terminals, *pool.parameters()]),
        "classify": (lambda: classify(vec, head), [vec, *head.parameters()]),
        "cross_entropy": (lambda: cross_entropy(logits, label), [logits]),
    }


def gradient_suite(seed: int = 0, shapes: int = SUITE_SHAPES) -> List[GradCheckResult]:
    """Finite-difference checks of every differentiable primitive and composite,
    each on ``shapes`` random small shapes in float64; reports the worst error per function"""
    g = torch.Generator().manual_seed(seed)
    worst: Dict[str, float] = {}
    for _ in range(shapes):
        for name, (fn, tensors) in _suite_cases(g).items():
            tensors = [t for t in tensors if t.requires_grad]
            result = _check(name, fn, tensors, g)
            worst[name] = max(worst.get(name, 0.0), result.max_error)
    return [GradCheckResult(name, error, shapes) for name, error in worst.items()]


@dataclass
class OracleReport:
    n: int
    k: int
    mode: str
    beams: int
    sequences: int
    max_root_deviation: float
    max_score_deviation: float
    probability_mass: float

    @property
    def exhaustive(self) -> bool:
        return self.k >= math.factorial(max(self.n - 1, 0))

    @property
    def passed(self) -> bool:
        return (self.max_root_deviation < ORACLE_TOLERANCE
                and self.max_score_deviation < ORACLE_TOLERANCE
                and abs(self.probability_mass - 1.0) < ORACLE_TOLERANCE
                and (not self.exhaustive or self.beams == self.sequences))


def oracle_check(n: int, k: int, seed: int = 0, mode: str = "disentangled", d: int = 6) -> OracleReport:
    """Beam search without noise against every merge order, matched by trace"""
    g = torch.Generator().manual_seed(seed)
    cell = cells.GatedRecursiveCell(d, 2 * d, g).double()
    scorer = cells.PairScorer(d, d_s=3, generator=g).double()
    x = torch.randn(n, d, generator=g, dtype=torch.float64)

    with torch.no_grad():
        result = search.beam_encode(x, k, cell, scorer, mode)
        sequences = search.exhaustive_merge_oracle(x, cell, scorer, mode)

    by_trace = {tuple(s.trace): s for s in sequences}
    root_dev, score_dev = 0.0, 0.0
    for root, score, trace in zip(result.roots, result.scores, result.traces):
        match = by_trace[tuple(trace)]
        root_dev = max(root_dev, float((root - match.root).abs().max()))
        score_dev = max(score_dev, float((score - match.score).abs()))

    mass = float(torch.logsumexp(torch.stack([s.score for s in sequences]), dim=0).exp())
    report = OracleReport(n, k, mode, result.size, len(sequences), root_dev, score_dev, mass)
    logger.info(f"oracle n={n} k={k} mode={mode}: root dev {root_dev:.3e}, score dev {score_dev:.3e}, mass {mass:.12f}")
    return report
