"""Dual-branch model: shared encoder, classification head, and a learned
per-sample weight branch.

For input features v the model computes

    x  = ReLU(W_e v + b_e)                    embedding
    z  = W_c x + b_c                          logits
    w  = sigmoid(w2 . ReLU(W1 x + b1) + b2)   sample weight in (0, 1)

The training loss is cross-entropy on softmax(w * z); the weight branch is
trained end-to-end through that scaling. `backward` is the hand-derived
analytic gradient of this loss, checked against finite differences in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Sample
from .errors import ConfigurationError, ParseError
from .nn_core import (
    LinearLayer,
    cross_entropy,
    linear_forward,
    relu,
    sigmoid,
    softmax,
)


@dataclass
class SciuModel:
    encoder: LinearLayer
    classifier: LinearLayer
    wb_hidden: LinearLayer
    wb_out: LinearLayer

    def __post_init__(self):
        if self.classifier.in_dim != self.encoder.out_dim:
            raise ConfigurationError("classifier input dim != encoder output dim")
        if self.wb_hidden.in_dim != self.encoder.out_dim:
            raise ConfigurationError("weight branch input dim != encoder output dim")
        if self.wb_out.in_dim != self.wb_hidden.out_dim or self.wb_out.out_dim != 1:
            raise ConfigurationError("weight branch output layer must map hidden -> 1")

    @property
    def n_classes(self) -> int:
        return self.classifier.out_dim

    @property
    def input_dim(self) -> int:
        return self.encoder.in_dim

    def parameters(self) -> list[np.ndarray]:
        """Live parameter arrays in a fixed order (shared with gradients)."""
        return [
            self.encoder.weight, self.encoder.bias,
            self.classifier.weight, self.classifier.bias,
            self.wb_hidden.weight, self.wb_hidden.bias,
            self.wb_out.weight, self.wb_out.bias,
        ]


@dataclass
class ForwardOutput:
    embedding: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    weight: float
    weighted_probs: np.ndarray


def init_model(
    input_dim: int,
    embed_dim: int,
    hidden_dim: int,
    n_classes: int,
    seed: int,
) -> SciuModel:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init; weight-branch output
    bias zeroed so the initial sample weight sits near 0.5."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x30DE1]))

    def layer(out_dim, in_dim, zero_bias=False):
        bound = 1.0 / np.sqrt(in_dim)
        w = rng.uniform(-bound, bound, (out_dim, in_dim))
        b = np.zeros(out_dim) if zero_bias else rng.uniform(-bound, bound, out_dim)
        return LinearLayer(w, b)

    return SciuModel(
        encoder=layer(embed_dim, input_dim),
        classifier=layer(n_classes, embed_dim),
        wb_hidden=layer(hidden_dim, embed_dim),
        wb_out=layer(1, hidden_dim, zero_bias=True),
    )


def forward_batch(model: SciuModel, features: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorized forward over a (n, input_dim) batch.

    Returns embeddings, logits, probs, weights (n,), and weighted_probs.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.input_dim:
        raise ConfigurationError(
            f"batch shape {features.shape} incompatible with input dim {model.input_dim}"
        )
    emb = relu(linear_forward(model.encoder, features))
    logits = linear_forward(model.classifier, emb)
    hidden = relu(linear_forward(model.wb_hidden, emb))
    pre_sig = linear_forward(model.wb_out, hidden)[:, 0]
    weights = sigmoid(pre_sig)
    probs = softmax(logits)
    weighted_probs = softmax(weights[:, None] * logits)
    return {
        "embedding": emb,
        "logits": logits,
        "probs": probs,
        "weight": weights,
        "weighted_probs": weighted_probs,
    }


def forward(model: SciuModel, sample: Sample) -> ForwardOutput:
    out = forward_batch(model, sample.features[None, :])
    return ForwardOutput(
        embedding=out["embedding"][0],
        logits=out["logits"][0],
        probs=out["probs"][0],
        weight=float(out["weight"][0]),
        weighted_probs=out["weighted_probs"][0],
    )


def wce_loss(output: ForwardOutput, label: int) -> float:
    """Cross-entropy on the weight-scaled logits."""
    if not (0 <= label < output.logits.shape[0]):
        raise ConfigurationError(f"label {label} out of range")
    return cross_entropy(output.weighted_probs, label)


def batch_loss(model: SciuModel, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean weighted cross-entropy over a batch."""
    out = forward_batch(model, features)
    wp = out["weighted_probs"][np.arange(len(labels)), labels]
    return float(np.mean(-np.log(np.maximum(wp, 1e-12))))


def backward_batch(
    model: SciuModel, features: np.ndarray, labels: np.ndarray
) -> tuple[list[np.ndarray], float]:
    """Mean-loss gradients for every parameter, order matching parameters().

    Returns (grads, mean loss).
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]

    pre_emb = linear_forward(model.encoder, features)
    emb = relu(pre_emb)
    logits = linear_forward(model.classifier, emb)
    pre_hid = linear_forward(model.wb_hidden, emb)
    hidden = relu(pre_hid)
    pre_sig = linear_forward(model.wb_out, hidden)[:, 0]
    w = sigmoid(pre_sig)
    wp = softmax(w[:, None] * logits)

    idx = np.arange(n)
    loss = float(np.mean(-np.log(np.maximum(wp[idx, labels], 1e-12))))

    # d(mean loss)/d(weighted logits) = (softmax - onehot)/n
    d_m = wp.copy()
    d_m[idx, labels] -= 1.0
    d_m /= n

    d_logits = w[:, None] * d_m
    d_w = np.sum(d_m * logits, axis=1)

    g_cls_w = d_logits.T @ emb
    g_cls_b = d_logits.sum(axis=0)
    d_emb = d_logits @ model.classifier.weight

    d_pre_sig = d_w * w * (1.0 - w)
    g_out_w = (d_pre_sig @ hidden)[None, :]
    g_out_b = np.array([d_pre_sig.sum()])
    d_hidden = d_pre_sig[:, None] * model.wb_out.weight[0][None, :]
    d_pre_hid = d_hidden * (pre_hid > 0)
    g_hid_w = d_pre_hid.T @ emb
    g_hid_b = d_pre_hid.sum(axis=0)
    d_emb += d_pre_hid @ model.wb_hidden.weight

    d_pre_emb = d_emb * (pre_emb > 0)
    g_enc_w = d_pre_emb.T @ features
    g_enc_b = d_pre_emb.sum(axis=0)

    grads = [g_enc_w, g_enc_b, g_cls_w, g_cls_b, g_hid_w, g_hid_b, g_out_w, g_out_b]
    return grads, loss


def backward(model: SciuModel, sample: Sample, label: int) -> list[np.ndarray]:
    grads, _ = backward_batch(model, sample.features[None, :], np.array([label]))
    return grads


def save_model(model: SciuModel, path) -> None:
    """Text checkpoint: one 'name rows cols' header per tensor followed by
    full-precision values, one row per line."""
    names = [
        "encoder.weight", "encoder.bias",
        "classifier.weight", "classifier.bias",
        "wb_hidden.weight", "wb_hidden.bias",
        "wb_out.weight", "wb_out.bias",
    ]
    with open(path, "w") as f:
        for name, arr in zip(names, model.parameters()):
            mat = arr if arr.ndim == 2 else arr[None, :]
            f.write(f"{name} {mat.shape[0]} {mat.shape[1]}\n")
            for row in mat:
                f.write(" ".join(format(v, ".17g") for v in row) + "\n")


def load_model(path) -> SciuModel:
    tensors = {}
    with open(path) as f:
        lines = f.read().splitlines()
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        try:
            name, rows, cols = lines[i].split()
            rows, cols = int(rows), int(cols)
            data = [
                [float(v) for v in lines[i + 1 + r].split()] for r in range(rows)
            ]
        except (ValueError, IndexError) as e:
            raise ParseError(f"{path}: malformed checkpoint near line {i + 1}") from e
        tensors[name] = np.array(data)
        i += 1 + rows
    try:
        return SciuModel(
            encoder=LinearLayer(tensors["encoder.weight"], tensors["encoder.bias"][0]),
            classifier=LinearLayer(
                tensors["classifier.weight"], tensors["classifier.bias"][0]
            ),
            wb_hidden=LinearLayer(
                tensors["wb_hidden.weight"], tensors["wb_hidden.bias"][0]
            ),
            wb_out=LinearLayer(tensors["wb_out.weight"], tensors["wb_out.bias"][0]),
        )
    except KeyError as e:
        raise ParseError(f"{path}: missing tensor {e}") from e
