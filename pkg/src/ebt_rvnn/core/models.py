"""
Sentence classifiers built from the recursive cell and one of the search variants
"""

from dataclasses import dataclass
from functools import partial
from typing import Dict, List, NamedTuple, Optional

import torch
import torch.nn as nn

from . import params
from .cells import GatedRecursiveCell, InitialTransform, PairScorer, init_transform
from .parent_attention import AttentionPool, GAUBlock, attention_pool, contextualize_tokens, records_from_beams
from .search import BeamResult, beam_encode, greedy_encode, gumbel_ste_select, replay_trace
from ..autodiff import ops
from ..config.settings import ModelConfig
from ..data.listops import NUM_CLASSES, VOCAB_SIZE
from ..errors import ConfigError, ContractError, DimensionError


@dataclass(frozen=True)
class VariantSpec:
    """How one model variant encodes a sentence"""
    search: str                  # "gold" | "greedy" | "beam"
    mode: Optional[str] = None   # scorer mode for greedy/beam
    contextualize: bool = False


VARIANTS: Dict[str, VariantSpec] = {
    "gold-grc": VariantSpec("gold"),
    "gt-grc": VariantSpec("greedy", "entangled"),
    "egt-grc": VariantSpec("greedy", "disentangled"),
    "bt-grc": VariantSpec("beam", "entangled"),
    "ebt-grc": VariantSpec("beam", "disentangled"),
    "ebt-gau": VariantSpec("beam", "disentangled", contextualize=True),
}


class ClassifierHead(nn.Module):
    def __init__(self, d: int, num_classes: int = NUM_CLASSES, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.num_classes = num_classes
        self.W1 = params.weight((d, d), d, generator)
        self.b1 = params.zeros(d)
        self.W2 = params.weight((d, num_classes), d, generator)
        self.b2 = params.zeros(num_classes)


def classify(pooled: torch.Tensor, head: ClassifierHead) -> torch.Tensor:
    """Two-layer GeLU MLP to unnormalized class logits"""
    return ops.linear(ops.elementwise_unary("gelu", ops.linear(pooled, head.W1, head.b1)), head.W2, head.b2)


def cross_entropy(logits: torch.Tensor, label: int) -> torch.Tensor:
    """-log_softmax(logits)[label]"""
    if logits.dim() != 1:
        raise DimensionError(f"cross_entropy expects a logit vector, got {tuple(logits.shape)}")
    if not 0 <= label < logits.shape[0]:
        raise ContractError(f"label {label} outside 0..{logits.shape[0] - 1}")
    return -ops.log_softmax(logits)[label]


class Encoded(NamedTuple):
    pooled: torch.Tensor         # [d]
    result: BeamResult
    terminals: torch.Tensor      # [n, d]


class TreeClassifier(nn.Module):
    """Embedding, terminal transform, tree encoder and classification head"""

    def __init__(self, config: ModelConfig, generator: Optional[torch.Generator] = None,
                 vocab_size: int = VOCAB_SIZE, num_classes: int = NUM_CLASSES):
        super().__init__()
        config.validate()
        if config.variant not in VARIANTS:
            raise ConfigError(f"Unknown model variant {config.variant!r}")

        self.config = config
        self.variant = config.variant
        self.spec = VARIANTS[config.variant]
        d = config.d

        self.embedding = params.weight((vocab_size, d), d, generator)
        self.initial = InitialTransform(d, d, generator)
        self.cell = GatedRecursiveCell(d, config.d_cell, generator)
        self.scorer = None
        if self.spec.search != "gold":
            self.scorer = PairScorer(d, config.d_s, config.slice_scorer, generator)
        self.gau = None
        self.pool = None
        if self.spec.contextualize:
            self.gau = GAUBlock(d, config.head_size, config.rel_max_dist, config.dropout, generator)
            self.pool = AttentionPool(d, generator)
        self.head = ClassifierHead(d, num_classes, generator)

    @property
    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def terminals(self, token_ids: torch.Tensor) -> torch.Tensor:
        if token_ids.dim() != 1 or token_ids.numel() < 1:
            raise ContractError(f"expected a non-empty id sequence, got shape {tuple(token_ids.shape)}")
        return init_transform(self.embedding[token_ids], self.initial)

    def encode(self, token_ids: torch.Tensor, gold_trace: Optional[List[int]] = None,
               generator: Optional[torch.Generator] = None) -> Encoded:
        """One sentence to a pooled vector; ``self.training`` switches on noise and dropout"""
        x = self.terminals(token_ids)
        spec, cfg = self.spec, self.config

        if spec.search == "gold":
            if gold_trace is None:
                raise ContractError("gold-grc needs a gold merge trace for every sample")
            result = replay_trace(x, gold_trace, self.cell)
        elif spec.search == "greedy":
            selector = None
            if self.training:
                selector = partial(gumbel_ste_select, temperature=cfg.gumbel_temperature, generator=generator)
            result = greedy_encode(x, self.cell, self.scorer, spec.mode, selector)
        else:
            noise = self.training and cfg.beam_noise
            result = beam_encode(x, cfg.beam_size, self.cell, self.scorer, spec.mode, noise, generator)

        if spec.contextualize:
            records = records_from_beams(result, x.shape[0])
            tokens = contextualize_tokens(x, records, result.scores, self.gau,
                                          cfg.attention_iterations, self.training, generator)
            pooled = attention_pool(tokens, self.pool)
        else:
            pooled = result.marginal()
        return Encoded(pooled, result, x)

    def forward(self, token_ids: torch.Tensor, gold_trace: Optional[List[int]] = None,
                generator: Optional[torch.Generator] = None) -> torch.Tensor:
        return classify(self.encode(token_ids, gold_trace, generator).pooled, self.head)


def build_model(config: ModelConfig, seed: int = 0) -> TreeClassifier:
    """Seeded construction in the configured dtype"""
    generator = torch.Generator().manual_seed(seed)
    model = TreeClassifier(config, generator)
    return model.to(torch.float64 if config.dtype == "float64" else torch.float32)
