"""Graph-convolution forward pass, cross-entropy loss, and exact gradients.

One convolution layer computes ``relu(A_hat @ H @ W + b)`` where ``A_hat``
is the symmetric-normalized adjacency with self-loops,
``D^(-1/2) (A_sym + I) D^(-1/2)``.  The full model stacks seven such layers
(29 -> 500 -> ... -> 500), then three per-node dense layers
(500 -> 300 -> 100 -> 2) with ReLU between and a row Softmax at the end.

The backward pass is written out by hand (no autograd dependency); its
correctness is pinned by central finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import LengthMismatch, NonFiniteValue, ShapeMismatch
from .graph_builder import CodeGraph

PROB_EPS = 1e-12  # clamp before log; far below metric resolution


@dataclass(frozen=True)
class Architecture:
    """Layer widths: conv_dims[i] -> conv_dims[i+1] per graph-conv layer,
    then dense_dims[j] -> dense_dims[j+1] per dense layer."""

    conv_dims: tuple[int, ...]
    dense_dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.conv_dims) < 2 or len(self.dense_dims) < 2:
            raise ShapeMismatch("need at least one conv and one dense layer")
        if self.conv_dims[-1] != self.dense_dims[0]:
            raise ShapeMismatch("conv output width must feed the first dense layer")


DEFAULT_ARCHITECTURE = Architecture(
    conv_dims=(29, 500, 500, 500, 500, 500, 500, 500),
    dense_dims=(500, 300, 100, 2),
)


@dataclass
class ModelParams:
    """Weights and biases of every layer, keyed conv0..convN / dense0..denseM."""

    conv_weights: list[np.ndarray]
    conv_biases: list[np.ndarray]
    dense_weights: list[np.ndarray]
    dense_biases: list[np.ndarray]

    @staticmethod
    def initialize(
        arch: Architecture = DEFAULT_ARCHITECTURE,
        seed: int = 0,
        dtype=np.float32,
    ) -> "ModelParams":
        """Seeded uniform fan-in init: W ~ U(+-1/sqrt(d_in)), b = 0."""
        rng = np.random.default_rng(seed)

        def weight(d_in: int, d_out: int) -> np.ndarray:
            bound = 1.0 / np.sqrt(d_in)
            return rng.uniform(-bound, bound, size=(d_in, d_out)).astype(dtype)

        conv_w, conv_b, dense_w, dense_b = [], [], [], []
        for d_in, d_out in zip(arch.conv_dims, arch.conv_dims[1:]):
            conv_w.append(weight(d_in, d_out))
            conv_b.append(np.zeros(d_out, dtype=dtype))
        for d_in, d_out in zip(arch.dense_dims, arch.dense_dims[1:]):
            dense_w.append(weight(d_in, d_out))
            dense_b.append(np.zeros(d_out, dtype=dtype))
        return ModelParams(conv_w, conv_b, dense_w, dense_b)

    @property
    def architecture(self) -> Architecture:
        conv_dims = tuple(w.shape[0] for w in self.conv_weights)
        conv_dims += (self.conv_weights[-1].shape[1],)
        dense_dims = tuple(w.shape[0] for w in self.dense_weights)
        dense_dims += (self.dense_weights[-1].shape[1],)
        return Architecture(conv_dims, dense_dims)

    def tensors(self):
        """Yield (name, array) in a fixed order shared with gradients."""
        for i, (w, b) in enumerate(zip(self.conv_weights, self.conv_biases)):
            yield f"conv{i}.W", w
            yield f"conv{i}.b", b
        for i, (w, b) in enumerate(zip(self.dense_weights, self.dense_biases)):
            yield f"dense{i}.W", w
            yield f"dense{i}.b", b

    def validate_finite(self) -> None:
        for name, arr in self.tensors():
            if not np.isfinite(arr).all():
                raise NonFiniteValue(f"parameter tensor {name} is not finite")


@dataclass(frozen=True)
class Prediction:
    """Per-node class probabilities (n x 2) and argmax labels."""

    probabilities: np.ndarray
    labels: np.ndarray


def normalize_adjacency(
    graph: CodeGraph | np.ndarray,
    node_count: int | None = None,
    dtype=np.float32,
) -> sp.csr_matrix:
    """Symmetric-normalized propagation operator with self-loops.

    The directed edge list is symmetrized (an edge in either direction
    couples both nodes), self-loops are added everywhere, and entries become
    ``d_u^(-1/2) d_v^(-1/2)``.  An isolated node keeps a unit self-loop.
    """
    if isinstance(graph, CodeGraph):
        edges = graph.edges
        n = graph.node_count
    else:
        edges = np.asarray(graph, dtype=np.int64).reshape(-1, 2)
        if node_count is None:
            raise ShapeMismatch("node_count is required with a raw edge list")
        n = node_count
    if n == 0:
        return sp.csr_matrix((0, 0), dtype=dtype)
    if edges.size:
        if edges.min() < 0 or edges.max() >= n:
            raise ShapeMismatch("edge endpoint outside node range")
        rows = np.concatenate([edges[:, 0], edges[:, 1], np.arange(n)])
        cols = np.concatenate([edges[:, 1], edges[:, 0], np.arange(n)])
    else:
        rows = cols = np.arange(n)
    ones = np.ones(len(rows), dtype=dtype)
    adj = sp.coo_matrix((ones, (rows, cols)), shape=(n, n)).tocsr()
    adj.data[:] = 1.0  # collapse duplicate entries from symmetrization
    inv_sqrt_deg = 1.0 / np.sqrt(adj.sum(axis=1).A.ravel())
    deg = sp.diags(inv_sqrt_deg.astype(dtype))
    return (deg @ adj @ deg).tocsr()


def gcn_layer_forward(
    H: np.ndarray, A_hat: sp.spmatrix, W: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """One graph-convolution layer: ``relu(A_hat @ H @ W + b)``."""
    if H.shape[1] != W.shape[0]:
        raise ShapeMismatch(f"H has width {H.shape[1]}, W expects {W.shape[0]}")
    if A_hat.shape[0] != H.shape[0]:
        raise ShapeMismatch(f"operator is {A_hat.shape}, H has {H.shape[0]} rows")
    Z = (A_hat @ H) @ W + b
    return np.maximum(Z, 0.0)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward_with_cache(features, A_hat, params):
    if features.shape[1] != params.conv_weights[0].shape[0]:
        raise ShapeMismatch(
            f"features have width {features.shape[1]}, "
            f"model expects {params.conv_weights[0].shape[0]}"
        )
    conv_acts = [features]
    H = features
    for W, b in zip(params.conv_weights, params.conv_biases):
        H = gcn_layer_forward(H, A_hat, W, b)
        conv_acts.append(H)
    dense_acts = [H]
    n_dense = len(params.dense_weights)
    for i, (W, b) in enumerate(zip(params.dense_weights, params.dense_biases)):
        Z = dense_acts[-1] @ W + b
        dense_acts.append(Z if i == n_dense - 1 else np.maximum(Z, 0.0))
    probs = _softmax_rows(dense_acts[-1])
    return probs, conv_acts, dense_acts


def model_forward(
    features: np.ndarray, A_hat: sp.spmatrix, params: ModelParams
) -> Prediction:
    """Full forward pass to per-node probabilities and argmax labels."""
    probs, _, _ = _forward_with_cache(features, A_hat, params)
    if not np.isfinite(probs).all():
        raise NonFiniteValue("forward pass produced non-finite probabilities")
    return Prediction(probabilities=probs, labels=probs.argmax(axis=1).astype(np.int8))


def cross_entropy_loss(
    prediction: Prediction | np.ndarray,
    labels: np.ndarray,
    class_weights: tuple[float, float] | None = None,
) -> float:
    """Mean (optionally class-weighted) negative log-likelihood over nodes."""
    probs = (
        prediction.probabilities if isinstance(prediction, Prediction) else prediction
    )
    labels = np.asarray(labels)
    if probs.shape[0] != labels.shape[0]:
        raise LengthMismatch(
            f"{probs.shape[0]} probability rows for {labels.shape[0]} labels"
        )
    p_true = probs[np.arange(len(labels)), labels.astype(np.int64)]
    p_true = np.clip(p_true, PROB_EPS, 1.0)
    nll = -np.log(p_true)
    if class_weights is None:
        return float(nll.mean())
    w = np.asarray(class_weights, dtype=probs.dtype)[labels.astype(np.int64)]
    return float((w * nll).sum() / w.sum())


def compute_gradients(
    params: ModelParams,
    features: np.ndarray,
    A_hat: sp.spmatrix,
    labels: np.ndarray,
    class_weights: tuple[float, float] | None = None,
    return_probabilities: bool = False,
):
    """Loss and exact gradients for every weight and bias.

    Per-layer backward for ``Z = A_hat @ H @ W + b`` reuses the symmetry of
    ``A_hat``: with ``G = A_hat @ dZ`` we get ``dW = H^T G``,
    ``db = sum(dZ)`` and ``dH = G @ W^T``.

    Returns ``(loss, grads)``, or ``(loss, grads, probabilities)`` when the
    caller also wants the forward result (saves a second pass in training).
    """
    labels = np.asarray(labels, dtype=np.int64)
    probs, conv_acts, dense_acts = _forward_with_cache(features, A_hat, params)
    if not np.isfinite(probs).all():
        raise NonFiniteValue("forward pass produced non-finite probabilities")
    loss = cross_entropy_loss(probs, labels, class_weights)

    n = len(labels)
    dtype = probs.dtype
    if class_weights is None:
        w = np.full(n, 1.0 / n, dtype=dtype)
    else:
        cw = np.asarray(class_weights, dtype=dtype)[labels]
        w = cw / cw.sum()
    # Softmax + clamped NLL: rows with a clamped probability get zero gradient
    # from the clamp, matching the loss actually computed.
    p_true = probs[np.arange(n), labels]
    live = (p_true > PROB_EPS).astype(dtype)
    d_logits = probs.copy()
    d_logits[np.arange(n), labels] -= 1.0
    d_logits *= (w * live)[:, None]

    grads: dict[str, np.ndarray] = {}
    delta = d_logits
    for i in range(len(params.dense_weights) - 1, -1, -1):
        act_in = dense_acts[i]
        grads[f"dense{i}.W"] = act_in.T @ delta
        grads[f"dense{i}.b"] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.dense_weights[i].T) * (dense_acts[i] > 0)
    d_H = delta @ params.dense_weights[0].T
    d_H *= conv_acts[-1] > 0  # relu of the last conv layer
    for i in range(len(params.conv_weights) - 1, -1, -1):
        dZ = d_H
        G = A_hat @ dZ
        grads[f"conv{i}.W"] = conv_acts[i].T @ G
        grads[f"conv{i}.b"] = dZ.sum(axis=0)
        if i > 0:
            d_H = (G @ params.conv_weights[i].T) * (conv_acts[i] > 0)
    if return_probabilities:
        return loss, grads, probs
    return loss, grads
