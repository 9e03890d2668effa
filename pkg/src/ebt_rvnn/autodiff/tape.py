"""
Recording tape over torch autograd.

The tape does not re-implement reverse mode: torch builds the graph. What the
tape adds is an ordered log of the primitives that ran (with stable node ids),
per-kind call counters used to check composition/scoring budgets, and a
``backward`` that returns gradients for every watched leaf, zero-filled when
the leaf does not reach the loss.
"""

import threading
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import torch
from torch.utils.weak import WeakIdKeyDictionary

from ..errors import ContractError

_local = threading.local()


def active_tape() -> Optional["Tape"]:
    """The innermost tape entered on this thread, if any"""
    stack = getattr(_local, "tapes", None)
    return stack[-1] if stack else None


@dataclass(frozen=True)
class TapeRecord:
    """One primitive application"""
    kind: str
    input_ids: Tuple[int, ...]
    output_id: int


class Tape:
    """Ordered record of differentiable primitives run inside ``with tape:``"""

    def __init__(self):
        self.records: List[TapeRecord] = []
        self.counts: Counter = Counter()
        self._ids = WeakIdKeyDictionary()
        self._leaves: List[torch.Tensor] = []
        self._next_id = 0

    def __enter__(self) -> "Tape":
        if not hasattr(_local, "tapes"):
            _local.tapes = []
        _local.tapes.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _local.tapes.pop()
        return False

    def node_id(self, tensor: torch.Tensor) -> int:
        """Stable id of a tensor on this tape, assigned on first sight"""
        node = self._ids.get(tensor)
        if node is None:
            node = self._next_id
            self._next_id += 1
            self._ids[tensor] = node
            if tensor.requires_grad and tensor.is_leaf:
                self._leaves.append(tensor)
        return node

    def record(self, kind: str, inputs: Sequence[Optional[torch.Tensor]], output: torch.Tensor):
        input_ids = tuple(self.node_id(t) for t in inputs if t is not None)
        self.records.append(TapeRecord(kind, input_ids, self.node_id(output)))
        self.counts[kind] += 1

    def count(self, kind: str, n: int = 1):
        """Bump a named counter without recording a node (e.g. compositions per row)"""
        self.counts[kind] += n

    def leaves(self) -> List[torch.Tensor]:
        """Leaf tensors requiring grad that fed any recorded primitive, in first-seen order"""
        return list(self._leaves)


class Gradients:
    """Gradient lookup keyed by tensor identity"""

    def __init__(self, pairs: Iterable[Tuple[torch.Tensor, torch.Tensor]]):
        self._grads: Dict[int, torch.Tensor] = {}
        self._tensors: Dict[int, torch.Tensor] = {}
        for tensor, grad in pairs:
            self._grads[id(tensor)] = grad
            self._tensors[id(tensor)] = tensor

    def __getitem__(self, tensor: torch.Tensor) -> torch.Tensor:
        return self._grads[id(tensor)]

    def __contains__(self, tensor: torch.Tensor) -> bool:
        return id(tensor) in self._grads

    def __len__(self) -> int:
        return len(self._grads)

    def items(self) -> Iterator[Tuple[torch.Tensor, torch.Tensor]]:
        for key, grad in self._grads.items():
            yield self._tensors[key], grad


def backward(
    loss: torch.Tensor,
    tape: Optional[Tape] = None,
    inputs: Optional[Sequence[torch.Tensor]] = None,
    retain_graph: bool = False,
) -> Gradients:
    """Reverse accumulation from a scalar loss.

    Gradients are returned for ``inputs`` when given, otherwise for every
    requires-grad leaf the tape saw. Leaves the loss does not depend on get
    an all-zero gradient; constants never get a slot.
    """
    if loss.numel() != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {tuple(loss.shape)}")

    if inputs is None:
        if tape is None:
            raise ContractError("backward needs either a tape or explicit inputs")
        inputs = tape.leaves()
    leaves = [t for t in inputs if t.requires_grad]
    if not leaves:
        return Gradients([])

    if not loss.requires_grad:
        return Gradients((t, torch.zeros_like(t)) for t in leaves)

    grads = torch.autograd.grad(loss.reshape(()), leaves, allow_unused=True, retain_graph=retain_graph)
    return Gradients(
        (t, torch.zeros_like(t) if g is None else g) for t, g in zip(leaves, grads)
    )
