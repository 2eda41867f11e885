"""Mini-batch training loop.

Batches are disjoint unions: features and labels concatenate, the normalized
adjacency becomes block-diagonal (no cross-graph edges), so one forward pass
covers the whole batch.  Normalizing per graph and stacking equals
normalizing the stacked graph because degrees never mix across blocks.

Everything is deterministic given (seed, dataset, hyperparameters): epoch
shuffles derive from (seed, epoch), parameter init from the seed, and the
optimizer is plain sequential Adam.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DivergedLoss, EmptyDataset, ShapeMismatch
from .evaluator import Confusion, confusion, metrics
from .gcn_core import (
    Architecture,
    DEFAULT_ARCHITECTURE,
    ModelParams,
    compute_gradients,
    cross_entropy_loss,
    model_forward,
    normalize_adjacency,
)


@dataclass(frozen=True)
class Hyperparameters:
    epochs: int = 1600
    batch_size: int = 100  # graphs per batch
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    class_weights: tuple[float, float] | None = None

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size and learning_rate must be positive")


@dataclass(frozen=True)
class TrainExample:
    """One graph ready for the model: prenormalized operator + features + labels."""

    example_id: str
    features: np.ndarray
    labels: np.ndarray
    adjacency: sp.csr_matrix
    subtype: str = ""

    @staticmethod
    def from_graph(example_id, graph, features, labels, subtype="", dtype=np.float32):
        return TrainExample(
            example_id=example_id,
            features=np.asarray(features, dtype=dtype),
            labels=np.asarray(labels, dtype=np.int8),
            adjacency=normalize_adjacency(graph, dtype=dtype),
            subtype=subtype,
        )

    @property
    def node_count(self) -> int:
        return int(self.features.shape[0])


@dataclass(frozen=True)
class BatchGraph:
    """Disjoint union of member graphs."""

    features: np.ndarray
    adjacency: sp.csr_matrix
    labels: np.ndarray
    offsets: tuple[int, ...]  # node offset of each member graph
    example_ids: tuple[str, ...]

    @staticmethod
    def build(examples: list[TrainExample]) -> "BatchGraph":
        if not examples:
            raise EmptyDataset("cannot batch zero graphs")
        offsets, total = [], 0
        for ex in examples:
            offsets.append(total)
            total += ex.node_count
        return BatchGraph(
            features=np.concatenate([ex.features for ex in examples], axis=0),
            adjacency=sp.block_diag(
                [ex.adjacency for ex in examples], format="csr"
            ).astype(examples[0].features.dtype),
            labels=np.concatenate([ex.labels for ex in examples]),
            offsets=tuple(offsets),
            example_ids=tuple(ex.example_id for ex in examples),
        )

    def per_graph_slices(self):
        bounds = list(self.offsets) + [len(self.labels)]
        for i, ex_id in enumerate(self.example_ids):
            yield ex_id, slice(bounds[i], bounds[i + 1])


def make_batches(
    examples: list[TrainExample], batch_size: int, seed: int | list[int]
) -> list[BatchGraph]:
    """Seeded shuffle, then groups of at most batch_size graphs."""
    if not examples:
        raise EmptyDataset("no graphs to batch")
    order = np.random.default_rng(seed).permutation(len(examples))
    shuffled = [examples[i] for i in order]
    return [
        BatchGraph.build(shuffled[i:i + batch_size])
        for i in range(0, len(shuffled), batch_size)
    ]


class AdamState:
    """First/second moment accumulators keyed like ModelParams.tensors()."""

    def __init__(self, params: ModelParams):
        self.m = {name: np.zeros_like(arr) for name, arr in params.tensors()}
        self.v = {name: np.zeros_like(arr) for name, arr in params.tensors()}
        self.t = 0


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected adaptive-moment update (arrays updated in place)."""
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for name, arr in params.tensors():
        g = grads[name]
        if g.shape != arr.shape:
            raise ShapeMismatch(f"gradient {name} has shape {g.shape}, "
                                f"parameter has {arr.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        arr -= lr * (m / bc1) / (np.sqrt(v / bc2) + epsilon)
    return params, state


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    split: str
    loss: float
    accuracy: float
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict:
        return {
            "epoch": self.epoch, "split": self.split, "loss": self.loss,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
        }


@dataclass
class TrainResult:
    final_params: ModelParams
    best_params: ModelParams
    best_epoch: int
    best_val_f1: float
    history: list[EpochRecord] = field(default_factory=list)


def _snapshot(params: ModelParams) -> ModelParams:
    return ModelParams(
        conv_weights=[w.copy() for w in params.conv_weights],
        conv_biases=[b.copy() for b in params.conv_biases],
        dense_weights=[w.copy() for w in params.dense_weights],
        dense_biases=[b.copy() for b in params.dense_biases],
    )


def train(
    train_examples: list[TrainExample],
    hyper: Hyperparameters,
    initial_params: ModelParams | None = None,
    val_examples: list[TrainExample] | None = None,
    arch: Architecture = DEFAULT_ARCHITECTURE,
    log_path: str | Path | None = None,
) -> TrainResult:
    """Run epochs x batches of forward/backward/step.

    Training metrics accumulate from each batch's pre-update forward pass;
    validation runs a full forward per epoch.  The best checkpoint is the
    epoch with the highest validation node-level F1 (final params if no
    validation split is given).  Raises :class:`DivergedLoss` if the loss
    stops being finite.
    """
    if not train_examples:
        raise EmptyDataset("training needs at least one graph")
    params = initial_params if initial_params is not None else ModelParams.initialize(
        arch, seed=hyper.seed
    )
    state = AdamState(params)
    val_batch = BatchGraph.build(list(val_examples)) if val_examples else None

    history: list[EpochRecord] = []
    best_params = _snapshot(params)
    best_epoch = 0
    best_val_f1 = -1.0
    log_handle = open(log_path, "a", encoding="utf-8") if log_path else None
    try:
        for epoch in range(1, hyper.epochs + 1):
            batches = make_batches(
                train_examples, hyper.batch_size, seed=[hyper.seed, epoch]
            )
            loss_sum = 0.0
            node_total = 0
            conf = Confusion()
            for batch in batches:
                loss, grads, probs = compute_gradients(
                    params, batch.features, batch.adjacency, batch.labels,
                    class_weights=hyper.class_weights,
                    return_probabilities=True,
                )
                if not np.isfinite(loss):
                    raise DivergedLoss(f"loss became non-finite at epoch {epoch}")
                adam_step(
                    params, grads, state, hyper.learning_rate,
                    hyper.beta1, hyper.beta2, hyper.epsilon,
                )
                n = len(batch.labels)
                loss_sum += loss * n
                node_total += n
                conf = conf + confusion(probs.argmax(axis=1), batch.labels)
            train_m = metrics(conf)
            history.append(EpochRecord(
                epoch, "train", loss_sum / node_total,
                train_m.accuracy, train_m.precision, train_m.recall, train_m.f1,
            ))

            if val_batch is not None:
                pred = model_forward(val_batch.features, val_batch.adjacency, params)
                val_loss = cross_entropy_loss(
                    pred, val_batch.labels, hyper.class_weights
                )
                val_m = metrics(confusion(pred.labels, val_batch.labels))
                history.append(EpochRecord(
                    epoch, "validation", val_loss,
                    val_m.accuracy, val_m.precision, val_m.recall, val_m.f1,
                ))
                if val_m.f1 > best_val_f1:
                    best_val_f1 = val_m.f1
                    best_epoch = epoch
                    best_params = _snapshot(params)

            if log_handle is not None:
                for record in history[-2 if val_batch is not None else -1:]:
                    log_handle.write(json.dumps(record.as_dict()) + "\n")
                log_handle.flush()
    finally:
        if log_handle is not None:
            log_handle.close()

    if val_batch is None:
        best_params = _snapshot(params)
        best_epoch = hyper.epochs
    return TrainResult(params, best_params, best_epoch, best_val_f1, history)


def quick_profile(seed: int = 0) -> Hyperparameters:
    """Desk-scale profile: identical to the full profile except 200 epochs."""
    return Hyperparameters(epochs=200, seed=seed)


def paper_profile(seed: int = 0) -> Hyperparameters:
    """Full-fidelity profile (1600 epochs, batch 100, lr 1e-4)."""
    return Hyperparameters(epochs=1600, seed=seed)


__all__ = [
    "AdamState", "BatchGraph", "EpochRecord", "Hyperparameters", "TrainExample",
    "TrainResult", "adam_step", "make_batches", "paper_profile", "quick_profile",
    "train",
]
