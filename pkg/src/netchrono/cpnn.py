"""Pairwise edge-order comparator: a 3-layer net over concatenated embeddings.

The input is [h1; h2] (two 12-dim edge embeddings), the hidden layer has
ceil(2/3 * 24) = 16 ReLU units, and a 2-way softmax head emits
Pr(edge 1 before edge 2).  Training minimizes cross-entropy plus L2 on the
weight matrices, with Adam.  Gradients are computed analytically so they can
be checked against finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .netio import TemporalNetwork
from .ordering import PairwiseMatrix

__all__ = [
    "CpnnModel",
    "CpnnConfig",
    "PairDataset",
    "init_model",
    "forward",
    "forward_batch",
    "loss_and_grad",
    "train",
    "pairwise_matrix",
    "build_pair_dataset",
    "save_model",
    "load_model",
]

EMBED_DIM = 12
INPUT_DIM = 2 * EMBED_DIM
HIDDEN_DIM = math.ceil(2 * INPUT_DIM / 3)


@dataclass
class CpnnModel:
    W1: np.ndarray  # (hidden, D)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (2, hidden)
    b2: np.ndarray  # (2,)
    lam: float = 1e-4

    def __post_init__(self):
        h, d = self.W1.shape
        if self.b1.shape != (h,) or self.W2.shape != (2, h) or self.b2.shape != (2,):
            raise ValueError("inconsistent parameter shapes")
        for p in (self.W1, self.b1, self.W2, self.b2):
            if not np.all(np.isfinite(p)):
                raise ValueError("non-finite parameters")

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    def params(self):
        return [self.W1, self.b1, self.W2, self.b2]


@dataclass
class CpnnConfig:
    lr: float = 1e-3
    epochs: int = 100
    batch: int = 256
    lam: float = 1e-4
    seed: int = 0
    pair_cap: int = 100_000
    matrix_cap: int = 20_000

    def validate(self):
        if min(self.lr, self.epochs, self.batch) <= 0 or self.lam < 0:
            raise ValueError("config values must be positive (lambda >= 0)")


@dataclass
class PairDataset:
    """Balanced oriented pairs: X = [h_i; h_j] rows, y = 1 iff i strictly first."""

    X: np.ndarray = field(repr=False)  # (B, 24)
    y: np.ndarray = field(repr=False)  # (B,) in {0, 1}
    network_id: str = ""
    # edge indices behind each row, aligned with X/y (empty when synthetic)
    first: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int), repr=False)
    second: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int), repr=False)

    def __len__(self):
        return self.y.size


def init_model(seed: int = 0, lam: float = 1e-4, input_dim: int = INPUT_DIM) -> CpnnModel:
    """He-uniform initialized comparator."""
    rng = np.random.default_rng(seed)
    hidden = math.ceil(2 * input_dim / 3)

    def he(shape, fan_in):
        limit = math.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=shape)

    return CpnnModel(
        W1=he((hidden, input_dim), input_dim),
        b1=np.zeros(hidden),
        W2=he((2, hidden), hidden),
        b2=np.zeros(2),
        lam=lam,
    )


def forward_batch(model: CpnnModel, X: np.ndarray) -> np.ndarray:
    """Softmax probabilities, shape (B, 2): columns (p_before, p_after)."""
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValueError(f"expected input dim {model.input_dim}, got {X.shape}")
    z = np.maximum(X @ model.W1.T + model.b1, 0.0) @ model.W2.T + model.b2
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: CpnnModel, h1: np.ndarray, h2: np.ndarray) -> tuple[float, float]:
    h1 = np.asarray(h1, float)
    h2 = np.asarray(h2, float)
    if h1.shape != (EMBED_DIM,) or h2.shape != (EMBED_DIM,):
        raise ValueError(f"embeddings must have dimension {EMBED_DIM}")
    p = forward_batch(model, np.concatenate([h1, h2])[None, :])[0]
    return float(p[0]), float(p[1])


_CLIP = 1e-12


def loss_and_grad(model: CpnnModel, X: np.ndarray, y: np.ndarray):
    """Mean cross-entropy + L2 penalty, with analytic gradients.

    Probabilities are clamped to [1e-12, 1 - 1e-12] inside the log; biases
    are not regularized.
    """
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    B = X.shape[0]
    a1 = X @ model.W1.T + model.b1
    h = np.maximum(a1, 0.0)
    z = h @ model.W2.T + model.b2
    zs = z - z.max(axis=1, keepdims=True)
    e = np.exp(zs)
    p = e / e.sum(axis=1, keepdims=True)

    pc = np.clip(p, _CLIP, 1.0 - _CLIP)
    data_loss = -np.mean(y * np.log(pc[:, 0]) + (1 - y) * np.log(pc[:, 1]))
    reg = model.lam * (np.sum(model.W1**2) + np.sum(model.W2**2))
    loss = data_loss + reg

    target = np.column_stack([y, 1 - y]).astype(float)
    dz = (p - target) / B
    dW2 = dz.T @ h + 2 * model.lam * model.W2
    db2 = dz.sum(axis=0)
    dh = dz @ model.W2
    da1 = dh * (a1 > 0)
    dW1 = da1.T @ X + 2 * model.lam * model.W1
    db1 = da1.sum(axis=0)
    return float(loss), [dW1, db1, dW2, db2]


def train(datasets: list[PairDataset], config: CpnnConfig) -> tuple[CpnnModel, list[float]]:
    """Joint training: uniform shuffling over the concatenated datasets.

    Returns the final-epoch model and the per-epoch mean loss trace.
    """
    config.validate()
    if not datasets:
        raise ValueError("need at least one dataset")
    X = np.concatenate([d.X for d in datasets])
    y = np.concatenate([d.y for d in datasets])
    rng = np.random.default_rng(config.seed)
    model = init_model(seed=config.seed, lam=config.lam)

    # Adam state
    m_t = [np.zeros_like(p) for p in model.params()]
    v_t = [np.zeros_like(p) for p in model.params()]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    trace = []
    n = y.size
    for _epoch in range(config.epochs):
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch):
            idx = perm[start : start + config.batch]
            loss, grads = loss_and_grad(model, X[idx], y[idx])
            if not math.isfinite(loss):
                raise ArithmeticError(f"training diverged: loss={loss} at step {step}")
            losses.append(loss)
            step += 1
            params = model.params()
            for k, (p, g) in enumerate(zip(params, grads)):
                m_t[k] = beta1 * m_t[k] + (1 - beta1) * g
                v_t[k] = beta2 * v_t[k] + (1 - beta2) * g**2
                mh = m_t[k] / (1 - beta1**step)
                vh = v_t[k] / (1 - beta2**step)
                p -= config.lr * mh / (np.sqrt(vh) + eps)
        trace.append(float(np.mean(losses)))
    return model, trace


def build_pair_dataset(
    net: TemporalNetwork,
    embeddings: np.ndarray,
    seed: int = 0,
    pair_cap: int = 100_000,
    network_id: str = "",
) -> PairDataset:
    """Sample distinguishable pairs and balance labels by operand swap.

    Exactly half of the sampled pairs (rounding down) are presented in the
    (later, earlier) orientation, keeping the label balance at 50%.
    """
    t = net.timestamps()
    m = net.n_edges
    rng = np.random.default_rng(seed)
    ii, jj = np.triu_indices(m, k=1)
    keep = t[ii] != t[jj]
    ii, jj = ii[keep], jj[keep]
    if ii.size == 0:
        raise ValueError("network has no distinguishable pair")
    if ii.size > pair_cap:
        sel = rng.choice(ii.size, size=pair_cap, replace=False)
        ii, jj = ii[sel], jj[sel]

    # orient as (earlier, later) then swap a random half
    earlier = np.where(t[ii] < t[jj], ii, jj)
    later = np.where(t[ii] < t[jj], jj, ii)
    n = earlier.size
    swap = np.zeros(n, dtype=bool)
    swap[rng.permutation(n)[: n // 2]] = True
    first = np.where(swap, later, earlier)
    second = np.where(swap, earlier, later)
    X = np.hstack([embeddings[first], embeddings[second]])
    y = (~swap).astype(float)
    return PairDataset(X=X, y=y, network_id=network_id, first=first, second=second)


def pairwise_matrix(
    model: CpnnModel, embeddings: np.ndarray, matrix_cap: int = 20_000, chunk: int = 4096
) -> PairwiseMatrix:
    """Full M x M before-probability matrix; diagonal fixed at 0.5.

    Both orientations are evaluated independently (the net is not
    antisymmetric by construction).
    """
    m = embeddings.shape[0]
    if m > matrix_cap:
        raise ValueError(
            f"M={m} exceeds the matrix cap ({matrix_cap}); sample pairs instead "
            "or raise the cap explicitly"
        )
    P = np.empty((m, m))
    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    for start in range(0, ii.size, chunk):
        a = ii[start : start + chunk]
        b = jj[start : start + chunk]
        X = np.hstack([embeddings[a], embeddings[b]])
        P[a, b] = forward_batch(model, X)[:, 0]
    np.fill_diagonal(P, 0.5)
    return PairwiseMatrix(P)


CHECKPOINT_VERSION = 1


def save_model(model: CpnnModel, mean: np.ndarray, std: np.ndarray) -> str:
    """Versioned JSON checkpoint including the feature standardization."""
    doc = {
        "version": CHECKPOINT_VERSION,
        "D": model.input_dim,
        "lambda": model.lam,
        "W1": model.W1.tolist(),
        "b1": model.b1.tolist(),
        "W2": model.W2.tolist(),
        "b2": model.b2.tolist(),
        "feature_mean": np.asarray(mean).tolist(),
        "feature_std": np.asarray(std).tolist(),
    }
    return json.dumps(doc, sort_keys=True)


def load_model(text: str) -> tuple[CpnnModel, np.ndarray, np.ndarray]:
    doc = json.loads(text)
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    model = CpnnModel(
        W1=np.array(doc["W1"]),
        b1=np.array(doc["b1"]),
        W2=np.array(doc["W2"]),
        b2=np.array(doc["b2"]),
        lam=float(doc["lambda"]),
    )
    return model, np.array(doc["feature_mean"]), np.array(doc["feature_std"])
