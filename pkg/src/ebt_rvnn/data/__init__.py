"""
ListOps data, dataset files and model checkpoints
"""

from .listops import (
    VOCAB,
    VOCAB_SIZE,
    NUM_CLASSES,
    GenConfig,
    ListOpsSample,
    Expression,
    tokenize,
    detokenize,
    parse,
    evaluate,
    gold_trace,
    generate_sample,
    generate_dataset,
)
from .dataset_io import FileDatasetStore, read_samples, write_samples
from .checkpoint import save_checkpoint, load_checkpoint, read_checkpoint

__all__ = [
    "VOCAB",
    "VOCAB_SIZE",
    "NUM_CLASSES",
    "GenConfig",
    "ListOpsSample",
    "Expression",
    "tokenize",
    "detokenize",
    "parse",
    "evaluate",
    "gold_trace",
    "generate_sample",
    "generate_dataset",
    "FileDatasetStore",
    "read_samples",
    "write_samples",
    "save_checkpoint",
    "load_checkpoint",
    "read_checkpoint",
]
