"""Topology-conditioned diffusion over edge timestamps.

Forward process: Gaussian noising of a per-edge timestamp vector under a
linear beta schedule.  Reverse process: a graph-transformer denoiser predicts
the injected noise, conditioned on fixed node-level structural features;
sampling walks the reverse chain with variance (1 - alpha_bar_t) and converts
the final continuous vector into an edge generation order by ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import torch
import torch.nn as nn

from .features import node_metrics, standardize
from .netio import TemporalNetwork, normalized_positions, sample_subnetwork

__all__ = [
    "NoiseSchedule",
    "DiffusionConfig",
    "DiffusionSample",
    "GraphDenoiser",
    "make_schedule",
    "forward_diffuse",
    "denoiser_forward",
    "train_denoiser",
    "sample_timestamps",
    "generate_augmented",
    "conditioning_features",
    "encode_order",
]


@dataclass(frozen=True)
class NoiseSchedule:
    beta: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    alpha_bar: np.ndarray = field(repr=False)

    @property
    def T(self) -> int:
        return self.beta.size


def make_schedule(T: int, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    """Linear beta schedule with precomputed alpha and cumulative products."""
    if T < 2:
        raise ValueError("need at least 2 diffusion steps")
    if not 0 < beta_start <= beta_end < 1:
        raise ValueError(f"need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})")
    beta = np.linspace(beta_start, beta_end, T)
    alpha = 1.0 - beta
    return NoiseSchedule(beta=beta, alpha=alpha, alpha_bar=np.cumprod(alpha))


# Default T=300 keeps alpha_bar_T below 0.05 (near-pure noise) with the
# standard [1e-4, 0.02] beta range.
DEFAULT_T = 300


def forward_diffuse(F0: np.ndarray, t: int, sched: NoiseSchedule, noise: np.ndarray) -> np.ndarray:
    """Closed-form noising: F^t = sqrt(ab_t) F0 + sqrt(1 - ab_t) noise."""
    F0 = np.asarray(F0, float)
    noise = np.asarray(noise, float)
    if noise.shape != F0.shape:
        raise ValueError("noise and F0 must have the same shape")
    if not 1 <= t <= sched.T:
        raise ValueError(f"step {t} outside 1..{sched.T}")
    ab = sched.alpha_bar[t - 1]
    return np.sqrt(ab) * F0 + np.sqrt(1.0 - ab) * noise


@dataclass
class DiffusionConfig:
    T: int = DEFAULT_T
    beta_start: float = 1e-4
    beta_end: float = 0.02
    layers: int = 3
    hidden: int = 64
    step_dim: int = 32
    cond_dim: int = 5
    epochs: int = 200
    lr: float = 1e-3
    seed: int = 0
    full_attention: bool = False
    n_subsamples: int = 100

    def schedule(self) -> NoiseSchedule:
        return make_schedule(self.T, self.beta_start, self.beta_end)


@dataclass
class DiffusionSample:
    """One conditioning topology with its (normalized) timestamp vector."""

    edge_index: np.ndarray  # (m, 2) dense node indices
    n_nodes: int
    cond: np.ndarray  # (n, cond_dim) node conditioning features
    f0: np.ndarray  # (m,) targets in [-1, 1]


def _sinusoidal(t: int, dim: int, dtype, device) -> torch.Tensor:
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=dtype, device=device) / max(half - 1, 1)
    )
    ang = t * freqs
    return torch.cat([torch.sin(ang), torch.cos(ang)])


class _Layer(nn.Module):
    def __init__(self, hidden: int):
        super().__init__()
        self.q = nn.Linear(hidden, hidden)
        self.k = nn.Linear(hidden, hidden)
        self.v = nn.Linear(hidden, hidden)
        self.edge_bias = nn.Linear(hidden, 1)
        self.edge_value = nn.Linear(hidden, hidden)
        self.out = nn.Linear(hidden, hidden)
        self.norm1 = nn.LayerNorm(hidden)
        self.ffn = nn.Sequential(nn.Linear(hidden, hidden), nn.ReLU(), nn.Linear(hidden, hidden))
        self.norm2 = nn.LayerNorm(hidden)
        self.edge_mix = nn.Sequential(
            nn.Linear(3 * hidden, hidden), nn.ReLU(), nn.Linear(hidden, hidden)
        )
        self.edge_norm = nn.LayerNorm(hidden)

    def forward(self, h, e, src, dst, mask):
        n, hid = h.shape
        scores = (self.q(h) @ self.k(h).T) / math.sqrt(hid)
        bias = torch.zeros((n, n), dtype=h.dtype, device=h.device)
        b = self.edge_bias(e).squeeze(-1)
        bias = bias.index_put((src, dst), b, accumulate=True)
        bias = bias.index_put((dst, src), b, accumulate=True)
        scores = scores + bias
        scores = scores.masked_fill(~mask, float("-inf"))
        attn = torch.softmax(scores, dim=1)

        ev = self.edge_value(e)
        edge_msg = torch.zeros((n, n, hid), dtype=h.dtype, device=h.device)
        edge_msg = edge_msg.index_put((src, dst), ev, accumulate=True)
        edge_msg = edge_msg.index_put((dst, src), ev, accumulate=True)
        agg = attn @ self.v(h) + (attn.unsqueeze(-1) * edge_msg).sum(dim=1)
        h = self.norm1(h + self.out(agg))
        h = self.norm2(h + self.ffn(h))
        e = self.edge_norm(e + self.edge_mix(torch.cat([e, h[src], h[dst]], dim=1)))
        return h, e


class GraphDenoiser(nn.Module):
    """Predicts the per-edge injected noise from the noisy timestamp vector.

    Node inputs are the (fixed) conditioning features; edge inputs mix the
    noisy scalar, a sinusoidal step embedding, and both endpoints' features.
    Attention is restricted to graph neighborhoods unless ``full_attention``.
    """

    def __init__(self, config: DiffusionConfig):
        super().__init__()
        self.config = config
        hid = config.hidden
        self.node_in = nn.Linear(config.cond_dim, hid)
        self.edge_in = nn.Linear(1 + config.step_dim + 2 * config.cond_dim, hid)
        self.layers = nn.ModuleList(_Layer(hid) for _ in range(config.layers))
        self.head = nn.Sequential(nn.Linear(hid, hid), nn.ReLU(), nn.Linear(hid, 1))

    def forward(
        self, f: torch.Tensor, t: int, cond: torch.Tensor, edge_index: torch.Tensor
    ) -> torch.Tensor:
        m = f.shape[0]
        n = cond.shape[0]
        if edge_index.shape != (m, 2):
            raise ValueError("edge_index must be (m, 2) and aligned with f")
        src, dst = edge_index[:, 0], edge_index[:, 1]
        step = _sinusoidal(t, self.config.step_dim, f.dtype, f.device).expand(m, -1)
        e = self.edge_in(torch.cat([f.unsqueeze(1), step, cond[src], cond[dst]], dim=1))
        h = self.node_in(cond)

        mask = torch.eye(n, dtype=torch.bool, device=f.device)
        if self.config.full_attention:
            mask = torch.ones((n, n), dtype=torch.bool, device=f.device)
        else:
            mask = mask.clone()
            mask[src, dst] = True
            mask[dst, src] = True
        for layer in self.layers:
            h, e = layer(h, e, src, dst, mask)
        return self.head(e).squeeze(-1)


def denoiser_forward(
    model: GraphDenoiser, f: np.ndarray, t: int, cond: np.ndarray, edge_index: np.ndarray
) -> np.ndarray:
    """Numpy-in/numpy-out wrapper around the torch module."""
    dtype = next(model.parameters()).dtype
    with torch.no_grad():
        out = model(
            torch.as_tensor(f, dtype=dtype),
            t,
            torch.as_tensor(cond, dtype=dtype),
            torch.as_tensor(np.asarray(edge_index), dtype=torch.long),
        )
    return out.numpy()


def train_denoiser(
    samples: list[DiffusionSample], config: DiffusionConfig
) -> tuple[GraphDenoiser, list[float]]:
    """Minimize the noise-prediction MSE over random steps and noises."""
    if not samples:
        raise ValueError("need at least one training sample")
    for s in samples:
        if not np.all(np.isfinite(s.f0)) or np.max(np.abs(s.f0)) > 1 + 1e-9:
            raise ValueError("f0 vectors must be finite and normalized to [-1, 1]")
    sched = config.schedule()
    torch.manual_seed(config.seed)
    model = GraphDenoiser(config)
    opt = torch.optim.Adam(model.parameters(), lr=config.lr)
    rng = np.random.default_rng(config.seed)

    tensors = [
        (
            torch.as_tensor(s.f0, dtype=torch.float32),
            torch.as_tensor(s.cond, dtype=torch.float32),
            torch.as_tensor(np.asarray(s.edge_index), dtype=torch.long),
        )
        for s in samples
    ]
    trace = []
    for _epoch in range(config.epochs):
        order = rng.permutation(len(tensors))
        losses = []
        for k in order:
            f0, cond, ei = tensors[k]
            t = int(rng.integers(1, sched.T + 1))
            eps = torch.as_tensor(rng.standard_normal(f0.shape[0]), dtype=torch.float32)
            ab = sched.alpha_bar[t - 1]
            ft = math.sqrt(ab) * f0 + math.sqrt(1.0 - ab) * eps
            pred = model(ft, t, cond, ei)
            loss = torch.mean((pred - eps) ** 2)
            if not torch.isfinite(loss):
                raise ArithmeticError(f"denoiser training diverged at epoch {_epoch}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
        trace.append(float(np.mean(losses)))
    return model, trace


def sample_timestamps(
    model: GraphDenoiser,
    edge_index: np.ndarray,
    cond: np.ndarray,
    sched: NoiseSchedule,
    seed: int = 0,
) -> np.ndarray:
    """Reverse chain from pure noise; deterministic given the seed.

    Each step applies the denoised mean with noise std sqrt(1 - alpha_bar_t);
    the final step is deterministic.
    """
    rng = np.random.default_rng(seed)
    m = np.asarray(edge_index).shape[0]
    dtype = next(model.parameters()).dtype
    cond_t = torch.as_tensor(cond, dtype=dtype)
    ei = torch.as_tensor(np.asarray(edge_index), dtype=torch.long)
    f = rng.standard_normal(m)
    with torch.no_grad():
        for t in range(sched.T, 0, -1):
            beta = sched.beta[t - 1]
            alpha = sched.alpha[t - 1]
            ab = sched.alpha_bar[t - 1]
            eps_hat = model(torch.as_tensor(f, dtype=dtype), t, cond_t, ei).numpy()
            mean = (f - beta / math.sqrt(1.0 - ab) * eps_hat) / math.sqrt(alpha)
            z = rng.standard_normal(m) if t > 1 else np.zeros(m)
            f = mean + math.sqrt(1.0 - ab) * z
    return f


def conditioning_features(net: TemporalNetwork) -> np.ndarray:
    """Standardized node metric table used as the denoiser conditioning."""
    cond, _, _ = standardize(node_metrics(net).as_matrix())
    return cond


def encode_order(net: TemporalNetwork) -> np.ndarray:
    """Normalized positions mapped affinely to [-1, 1]."""
    return 2.0 * normalized_positions(net).alpha - 1.0


def _edge_index(net: TemporalNetwork) -> np.ndarray:
    return np.array([(u, v) for u, v, _ in net.edges], dtype=np.int64).reshape(-1, 2)


def network_to_sample(net: TemporalNetwork) -> DiffusionSample:
    return DiffusionSample(
        edge_index=_edge_index(net),
        n_nodes=net.n_nodes,
        cond=conditioning_features(net),
        f0=encode_order(net),
    )


def generate_augmented(
    net: TemporalNetwork, count: int, config: DiffusionConfig | None = None
) -> tuple[list[TemporalNetwork], GraphDenoiser]:
    """Train a denoiser on subnetwork samples, then emit augmented orders.

    Subnetworks are drawn at retention fractions evenly spaced over
    [0.5, 1.0].  Every augmented network keeps the full original topology;
    its timestamps are the normalized ranks of one sampled vector.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    if net.snapshot_count() < 2:
        raise ValueError("need at least 2 distinct timestamps to learn an order")
    config = config or DiffusionConfig()

    fractions = np.linspace(0.5, 1.0, config.n_subsamples)
    subs = [
        sample_subnetwork(net, float(frac), seed=config.seed * 100_003 + k)
        for k, frac in enumerate(fractions)
    ]
    samples = [network_to_sample(s) for s in subs]
    model, _ = train_denoiser(samples, config)

    sched = config.schedule()
    ei = _edge_index(net)
    cond = conditioning_features(net)
    out = []
    for k in range(count):
        values = sample_timestamps(model, ei, cond, sched, seed=config.seed * 7919 + k)
        ranks = np.empty(values.size)
        ranks[np.argsort(values, kind="stable")] = np.arange(1, values.size + 1)
        edges = tuple((u, v, float(r / values.size)) for (u, v, _), r in zip(net.edges, ranks))
        out.append(TemporalNetwork(net.node_ids, edges))
    return out, model
