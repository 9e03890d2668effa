"""
Recursive cell, tree search, parent attention, models and training
"""

from .cells import GatedRecursiveCell, PairScorer, InitialTransform, grc_compose, disentangled_score
from .search import beam_encode, greedy_encode, exhaustive_merge_oracle, marginalize_roots
from .parent_attention import TreeRecord, GAUBlock, record_tree, contextualize_tokens, attention_pool
from .models import TreeClassifier, VARIANTS, build_model, classify, cross_entropy
from .trainer import Trainer, AdamState, adam_step

__all__ = [
    "GatedRecursiveCell",
    "PairScorer",
    "InitialTransform",
    "grc_compose",
    "disentangled_score",
    "beam_encode",
    "greedy_encode",
    "exhaustive_merge_oracle",
    "marginalize_roots",
    "TreeRecord",
    "GAUBlock",
    "record_tree",
    "contextualize_tokens",
    "attention_pool",
    "TreeClassifier",
    "VARIANTS",
    "build_model",
    "classify",
    "cross_entropy",
    "Trainer",
    "AdamState",
    "adam_step",
]
