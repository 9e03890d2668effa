"""
Training and evaluation loops
"""

import random
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import torch

from .models import TreeClassifier, cross_entropy
from ..autodiff import Gradients, backward
from ..config.settings import TrainConfig
from ..data.listops import ListOpsSample, tokenize
from ..errors import ContractError, DimensionError
from ..utils.helpers import ProgressBar
from ..utils.logging import get_logger


class AdamState:
    """Bias-corrected Adam over a fixed parameter list.

    The moment arithmetic is ``torch.optim.Adam`` (single-tensor path, so the
    result does not depend on how parameters are grouped); this object owns
    the step counter and the gradient hand-off.
    """

    def __init__(self, parameters: Sequence[torch.nn.Parameter], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.parameters = list(parameters)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.optimizer = torch.optim.Adam(self.parameters, lr=lr, betas=(beta1, beta2), eps=eps, foreach=False)

    @classmethod
    def from_config(cls, parameters, config: TrainConfig) -> "AdamState":
        return cls(parameters, config.lr, config.beta1, config.beta2, config.eps)

    def moments(self, param: torch.nn.Parameter):
        """(first, second) moment of one parameter; zeros before the first step"""
        state = self.optimizer.state.get(param, {})
        if "exp_avg" not in state:
            return torch.zeros_like(param), torch.zeros_like(param)
        return state["exp_avg"], state["exp_avg_sq"]


def adam_step(parameters: Sequence[torch.nn.Parameter], grads: Gradients, state: AdamState):
    """One update of every parameter from its gradient (missing gradients count as zero)"""
    if [id(p) for p in parameters] != [id(p) for p in state.parameters]:
        raise ContractError("adam_step: parameter list differs from the one the state was built for")

    for param in parameters:
        grad = grads[param] if param in grads else torch.zeros_like(param)
        if grad.shape != param.shape:
            raise DimensionError(f"adam_step: gradient {tuple(grad.shape)} for parameter {tuple(param.shape)}")
        param.grad = grad.detach().clone()

    state.optimizer.step()
    state.optimizer.zero_grad(set_to_none=True)
    state.t += 1


@dataclass
class EpochMetrics:
    epoch: int
    loss: float
    accuracy: float
    seconds: float
    val_accuracy: Optional[float] = None


class Trainer:
    """Runs minibatch training of one TreeClassifier"""

    def __init__(self, model: TreeClassifier, config: TrainConfig, seed: int = 0, show_progress: bool = False):
        config.validate()
        self.model = model
        self.config = config
        self.logger = get_logger(__name__)
        self.show_progress = show_progress

        # batch order and search/dropout noise have separate seeded streams
        self.rng = random.Random(seed)
        self.generator = torch.Generator().manual_seed(seed + 1)

        self.parameters = [p for p in model.parameters() if p.requires_grad]
        self.state = AdamState.from_config(self.parameters, config)
        self.history: List[EpochMetrics] = []

    def _ids(self, sample: ListOpsSample) -> torch.Tensor:
        return torch.tensor(tokenize(sample.tokens), dtype=torch.long)

    def sample_loss(self, sample: ListOpsSample):
        logits = self.model(self._ids(sample), sample.gold_trace, self.generator)
        return cross_entropy(logits, sample.label), int(torch.argmax(logits.detach()))

    def train_epoch(self, dataset: Sequence[ListOpsSample], epoch: int = 0) -> EpochMetrics:
        if not dataset:
            raise ContractError("train_epoch needs a non-empty dataset")

        start = time.perf_counter()
        self.model.train()
        order = list(range(len(dataset)))
        self.rng.shuffle(order)

        batch_size = max(1, self.config.batch_size)
        batches = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]
        progress = ProgressBar(len(batches), label=f"epoch {epoch} ") if self.show_progress else None

        total_loss, correct = 0.0, 0
        for b, batch in enumerate(batches, start=1):
            losses = []
            for index in batch:
                loss, prediction = self.sample_loss(dataset[index])
                losses.append(loss)
                correct += int(prediction == dataset[index].label)

            batch_loss = torch.stack(losses).mean()
            grads = backward(batch_loss, inputs=self.parameters)
            adam_step(self.parameters, grads, self.state)
            total_loss += float(batch_loss.detach()) * len(batch)

            if progress:
                progress.update(b, f"loss={float(batch_loss.detach()):.4f}")

        metrics = EpochMetrics(
            epoch=epoch,
            loss=total_loss / len(dataset),
            accuracy=correct / len(dataset),
            seconds=time.perf_counter() - start,
        )
        self.logger.debug(f"Epoch {epoch}: loss={metrics.loss:.4f} acc={metrics.accuracy:.4f}")
        return metrics

    def predict(self, sample: ListOpsSample) -> int:
        with torch.no_grad():
            logits = self.model(self._ids(sample), sample.gold_trace)
        return int(torch.argmax(logits))

    def evaluate(self, dataset: Sequence[ListOpsSample]) -> float:
        """Accuracy with noise and dropout off"""
        if not dataset:
            return 0.0
        was_training = self.model.training
        self.model.eval()
        try:
            correct = sum(self.predict(s) == s.label for s in dataset)
        finally:
            self.model.train(was_training)
        return correct / len(dataset)

    def _snapshot(self) -> Dict[str, torch.Tensor]:
        return {k: v.detach().clone() for k, v in self.model.state_dict().items()}

    def fit(self, train: Sequence[ListOpsSample], val: Optional[Sequence[ListOpsSample]] = None,
            epochs: Optional[int] = None) -> List[EpochMetrics]:
        """Train for ``epochs``; with a validation set, stop after ``patience`` epochs
        without improvement and restore the best parameters"""
        epochs = self.config.epochs if epochs is None else epochs
        patience = self.config.patience
        best_accuracy, best_state, stale = -1.0, None, 0

        for epoch in range(1, epochs + 1):
            metrics = self.train_epoch(train, epoch)
            if val:
                metrics.val_accuracy = self.evaluate(val)
            self.history.append(metrics)

            val_text = f" val_acc={metrics.val_accuracy:.4f}" if metrics.val_accuracy is not None else ""
            self.logger.info(f"Epoch {epoch}/{epochs} loss={metrics.loss:.4f} "
                             f"acc={metrics.accuracy:.4f}{val_text} ({metrics.seconds:.1f}s)")

            if metrics.val_accuracy is None:
                continue
            if metrics.val_accuracy > best_accuracy:
                best_accuracy, best_state, stale = metrics.val_accuracy, self._snapshot(), 0
            else:
                stale += 1
                if patience and stale >= patience:
                    self.logger.warning(f"Early stop after epoch {epoch}: no val improvement in {patience} epochs")
                    break

        if best_state is not None:
            self.model.load_state_dict(best_state)
            self.logger.info(f"Restored parameters with best val accuracy {best_accuracy:.4f}")
        return self.history
