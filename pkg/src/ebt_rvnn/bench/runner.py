"""
Activation-memory and wall-time benchmark of the tree encoders

For every (length bucket, variant) cell the encoder runs forward and backward
on random terminals; the reported time and retained-scalar peak are medians
over the repetitions. A cell whose retained scalars would exceed the budget
is reported as over budget instead of stopping the run.
"""

import csv
import gc
import io
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch

from .memory import MemoryTracker, track
from ..config.settings import BenchConfig
from ..core.cells import GatedRecursiveCell, PairScorer
from ..core.search import beam_encode, greedy_encode
from ..errors import BudgetExceededError, ConfigError
from ..ui.report import format_table
from ..utils.helpers import format_scalar_count
from ..utils.logging import get_logger

OVER_BUDGET = "over budget"
COLUMNS = ("variant", "length", "seconds", "peak_scalars")

_DTYPES = {"float32": torch.float32, "float64": torch.float64}


@dataclass(frozen=True)
class BenchVariant:
    search: str             # "greedy" | "beam"
    mode: str
    slice_scorer: bool = True
    width_scale: int = 1    # d (and d_cell) multiplier, the "-512" rows at d=128


BENCH_VARIANTS: Dict[str, BenchVariant] = {
    "gt-grc": BenchVariant("greedy", "entangled"),
    "egt-grc": BenchVariant("greedy", "disentangled"),
    "bt-grc": BenchVariant("beam", "entangled"),
    "ebt-grc": BenchVariant("beam", "disentangled"),
    "ebt-grc-noslice": BenchVariant("beam", "disentangled", slice_scorer=False),
    "ebt-grc-512": BenchVariant("beam", "disentangled", width_scale=4),
    "ebt-grc-512-noslice": BenchVariant("beam", "disentangled", slice_scorer=False, width_scale=4),
}


@dataclass
class BenchRow:
    variant: str
    length: int
    seconds: Optional[float]
    peak_scalars: Optional[int]

    @property
    def over_budget(self) -> bool:
        return self.peak_scalars is None

    def cells(self, human: bool = False) -> List[str]:
        if self.over_budget:
            return [self.variant, str(self.length), OVER_BUDGET, OVER_BUDGET]
        peak = format_scalar_count(self.peak_scalars) if human else str(self.peak_scalars)
        return [self.variant, str(self.length), f"{self.seconds:.4f}", peak]


class BenchRunner:
    """Runs the variant x length grid"""

    def __init__(self, config: BenchConfig, seed: int = 0):
        self.config = config
        self.seed = seed
        self.logger = get_logger(__name__)
        if config.dtype not in _DTYPES:
            raise ConfigError(f"bench.dtype must be one of {', '.join(_DTYPES)}")
        self.dtype = _DTYPES[config.dtype]

    def _modules(self, variant: BenchVariant, generator: torch.Generator):
        cfg = self.config
        d = cfg.d * variant.width_scale
        cell = GatedRecursiveCell(d, cfg.d_cell * variant.width_scale, generator).to(self.dtype)
        scorer = PairScorer(d, cfg.d_s, variant.slice_scorer, generator).to(self.dtype)
        return d, cell, scorer

    def run_cell(self, name: str, length: int) -> BenchRow:
        """Median time and peak over the repetitions of one (variant, length) cell"""
        if name not in BENCH_VARIANTS:
            raise ConfigError(f"Unknown bench variant {name!r}; expected one of {', '.join(BENCH_VARIANTS)}")
        variant = BENCH_VARIANTS[name]
        generator = torch.Generator().manual_seed(self.seed)
        d, cell, scorer = self._modules(variant, generator)
        parameters = list(cell.parameters()) + list(scorer.parameters())
        x = torch.randn(length, d, generator=generator, dtype=self.dtype)
        projection = torch.randn(d, generator=generator, dtype=self.dtype)

        def forward_backward():
            if variant.search == "greedy":
                result = greedy_encode(x, cell, scorer, variant.mode)
            else:
                result = beam_encode(x, self.config.beam_size, cell, scorer, variant.mode)
            loss = (result.marginal() * projection).sum()
            torch.autograd.grad(loss, parameters, allow_unused=True)

        seconds, peaks = [], []
        for _ in range(max(1, self.config.repetitions)):
            gc.collect()
            tracker = MemoryTracker(budget=self.config.scalar_budget, exclude=parameters)
            start = time.perf_counter()
            try:
                _, stats = track(name, forward_backward, tracker)
            except BudgetExceededError as e:
                self.logger.warning(f"{name} at length {length} is over budget: {e}")
                return BenchRow(name, length, None, None)
            seconds.append(time.perf_counter() - start)
            peaks.append(stats.peak_scalars)

        row = BenchRow(name, length, float(np.median(seconds)), int(np.median(peaks)))
        self.logger.info(f"{name} n={length}: {row.seconds:.3f}s, peak {format_scalar_count(row.peak_scalars)} scalars")
        return row

    def run(self, lengths: Optional[Sequence[int]] = None,
            variants: Optional[Sequence[str]] = None) -> List[BenchRow]:
        lengths = list(lengths or self.config.length_list())
        variants = list(variants or self.config.variant_list())
        for name in variants:
            if name not in BENCH_VARIANTS:
                raise ConfigError(f"Unknown bench variant {name!r}; expected one of {', '.join(BENCH_VARIANTS)}")

        # single-threaded so timings stay comparable
        threads = torch.get_num_threads()
        torch.set_num_threads(1)
        try:
            return [self.run_cell(name, length) for length in lengths for name in variants]
        finally:
            torch.set_num_threads(threads)


def bench_run(config: BenchConfig, seed: int = 0) -> List[BenchRow]:
    return BenchRunner(config, seed).run()


def report_text(rows: Sequence[BenchRow]) -> str:
    return format_table(COLUMNS, [row.cells(human=False) for row in rows])


def report_csv(rows: Sequence[BenchRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(row.cells())
    return buffer.getvalue()


def peak_ratio(rows: Sequence[BenchRow], numerator: str, denominator: str, length: int) -> Optional[float]:
    """peak(numerator) / peak(denominator) at one length; None when either is missing or over budget"""
    peaks = {r.variant: r.peak_scalars for r in rows if r.length == length and not r.over_budget}
    if numerator not in peaks or denominator not in peaks or not peaks[denominator]:
        return None
    return peaks[numerator] / peaks[denominator]
