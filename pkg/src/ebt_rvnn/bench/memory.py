"""
Retained-activation accounting

Every tensor autograd saves for the backward pass goes through a pack hook.
A tracker counts the scalars of each distinct storage once while any saved
reference to it is alive; parameter storages are not counted. Counts are
deterministic and independent of the allocator.
"""

import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import torch

from ..errors import BudgetExceededError

_local = threading.local()


@dataclass
class MemStats:
    live_scalars: int = 0
    peak_scalars: int = 0
    breakdown: Dict[str, int] = field(default_factory=dict)

    def reset(self):
        self.live_scalars = 0
        self.peak_scalars = 0
        self.breakdown = {}


class _Region:
    def __init__(self, label: str, baseline: int):
        self.label = label
        self.baseline = baseline
        self.peak = 0
        self.breakdown: Counter = Counter()


class _Saved:
    """Handle autograd keeps instead of the tensor; releasing it releases the count.

    Keeps a detached alias only; the handle must not reference the graph that owns it.
    """

    __slots__ = ("tensor", "key", "tracker")

    def __init__(self, tensor: torch.Tensor, key: Optional[int], tracker: "MemoryTracker"):
        self.tensor = tensor.detach()
        self.key = key
        self.tracker = tracker

    def __del__(self):
        if self.key is not None:
            self.tracker._release(self.key)


class MemoryTracker:
    """Live and peak count of scalars retained for backward"""

    def __init__(self, budget: Optional[int] = None, exclude: Iterable[torch.Tensor] = ()):
        self.budget = budget
        self._excluded = {t.untyped_storage().data_ptr() for t in exclude}
        self._storages: Dict[int, List[int]] = {}
        self._regions: List[_Region] = []
        self.stats = MemStats()

    @property
    def live_scalars(self) -> int:
        return self.stats.live_scalars

    @property
    def peak_scalars(self) -> int:
        return self.stats.peak_scalars

    def exclude(self, tensors: Iterable[torch.Tensor]):
        self._excluded.update(t.untyped_storage().data_ptr() for t in tensors)

    def reset(self):
        self._storages.clear()
        self.stats.reset()

    def _pack(self, tensor: torch.Tensor) -> _Saved:
        storage = tensor.untyped_storage()
        key = storage.data_ptr()
        if key in self._excluded or storage.nbytes() == 0:
            return _Saved(tensor, None, self)

        entry = self._storages.get(key)
        if entry is not None:
            entry[0] += 1
            return _Saved(tensor, key, self)

        scalars = storage.nbytes() // tensor.element_size()
        if self.budget is not None and self.stats.live_scalars + scalars > self.budget:
            raise BudgetExceededError(self.stats.live_scalars + scalars, self.budget)

        self._storages[key] = [1, scalars]
        self.stats.live_scalars += scalars
        self.stats.peak_scalars = max(self.stats.peak_scalars, self.stats.live_scalars)
        label = self._regions[-1].label if self._regions else "untracked"
        self.stats.breakdown[label] = self.stats.breakdown.get(label, 0) + scalars
        for region in self._regions:
            region.peak = max(region.peak, self.stats.live_scalars - region.baseline)
            region.breakdown[label] += scalars
        return _Saved(tensor, key, self)

    @staticmethod
    def _unpack(saved: _Saved) -> torch.Tensor:
        return saved.tensor

    def _release(self, key: int):
        entry = self._storages.get(key)
        if entry is None:
            return
        entry[0] -= 1
        if entry[0] == 0:
            del self._storages[key]
            self.stats.live_scalars -= entry[1]

    def hooks(self):
        return torch.autograd.graph.saved_tensors_hooks(self._pack, self._unpack)


def active_tracker() -> Optional[MemoryTracker]:
    return getattr(_local, "tracker", None)


def track(label: str, closure: Callable[[], Any],
          tracker: Optional[MemoryTracker] = None) -> Tuple[Any, MemStats]:
    """Run ``closure`` inside a named region; returns its result and the region's delta.

    Regions nest: an inner ``track`` reuses the tracker of the enclosing one.
    """
    outer = active_tracker()
    tracker = tracker or outer or MemoryTracker()
    owner = outer is not tracker

    region = _Region(label, tracker.live_scalars)
    tracker._regions.append(region)
    previous = outer
    try:
        if owner:
            _local.tracker = tracker
            with tracker.hooks():
                result = closure()
        else:
            result = closure()
    finally:
        tracker._regions.pop()
        if owner:
            _local.tracker = previous

    delta = MemStats(
        live_scalars=max(tracker.live_scalars - region.baseline, 0),
        peak_scalars=region.peak,
        breakdown=dict(region.breakdown),
    )
    return result, delta
