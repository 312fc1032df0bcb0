"""Experiment protocols: split/joint training matrices, augmentation fusion,
training-ratio sweeps, and the Bernoulli-comparator equivalence simulation.

All runs are deterministic given their seed list; reports carry per-seed raw
numbers plus a hash of the configuration that produced them.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cpnn import CpnnConfig, PairDataset, build_pair_dataset, forward_batch, train
from .features import edge_embeddings
from .netio import TemporalNetwork
from .ordering import PairwiseMatrix, evaluate, meanfield_positions, order_from_scores
from .ordering import borda_scores, theoretical_error
from .netio import NormalizedOrder

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "run_split_matrix",
    "run_joint",
    "run_augmented_joint",
    "run_ratio_sweep",
    "run_equivalence_sim",
    "simulate_comparator",
    "pair_accuracy",
    "config_hash",
]


@dataclass
class ExperimentConfig:
    training_networks: dict[str, TemporalNetwork] = field(default_factory=dict)
    test_networks: dict[str, TemporalNetwork] = field(default_factory=dict)
    augmented: dict[str, list[TemporalNetwork]] = field(default_factory=dict)
    cpnn: CpnnConfig = field(default_factory=CpnnConfig)
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    eval_pair_cap: int = 50_000


def config_hash(doc) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _report_shell(experiment: str, extra: dict) -> dict:
    return {"experiment": experiment, "version": __version__, **extra}


def _prep(net: TemporalNetwork):
    X, mean, std = edge_embeddings(net)
    return X


def pair_accuracy(
    model, net: TemporalNetwork, X: np.ndarray, seed: int, cap: int = 50_000
) -> float:
    """Accuracy over (a sample of) the network's distinguishable pairs."""
    ds = build_pair_dataset(net, X, seed=seed, pair_cap=cap)
    p = forward_batch(model, ds.X)[:, 0]
    return float(((p > 0.5) == (ds.y > 0.5)).mean())


def run_split_matrix(config: ExperimentConfig) -> dict:
    """Train one comparator per training network; evaluate on every network."""
    nets = config.training_networks
    if len(nets) < 1:
        raise ValueError("need at least one training network")
    tests = config.test_networks or nets
    feats = {name: _prep(net) for name, net in {**nets, **tests}.items()}

    cells = []
    for seed in config.seeds:
        for tr_name, tr_net in nets.items():
            cfg = CpnnConfig(**{**config.cpnn.__dict__, "seed": seed})
            ds = build_pair_dataset(
                tr_net, feats[tr_name], seed=seed, pair_cap=cfg.pair_cap, network_id=tr_name
            )
            model, trace = train([ds], cfg)
            for te_name, te_net in tests.items():
                acc = pair_accuracy(
                    model, te_net, feats[te_name], seed=seed, cap=config.eval_pair_cap
                )
                cells.append(
                    {"train": tr_name, "test": te_name, "seed": seed, "accuracy": acc}
                )

    matrix_mean = {}
    for tr_name in nets:
        matrix_mean[tr_name] = {}
        for te_name in tests:
            vals = [c["accuracy"] for c in cells if c["train"] == tr_name and c["test"] == te_name]
            matrix_mean[tr_name][te_name] = float(np.mean(vals))
    average_split = {
        te: float(np.mean([matrix_mean[tr][te] for tr in nets])) for te in tests
    }
    return _report_shell(
        "split",
        {
            "seeds": list(config.seeds),
            "cells": cells,
            "matrix_mean": matrix_mean,
            "average_split": average_split,
        },
    )


def _joint_model(datasets: list[PairDataset], cpnn_cfg: CpnnConfig, seed: int):
    cfg = CpnnConfig(**{**cpnn_cfg.__dict__, "seed": seed})
    return train(datasets, cfg)


def run_joint(config: ExperimentConfig) -> dict:
    """One comparator trained on the pooled pair datasets of all networks."""
    nets = config.training_networks
    if len(nets) < 1:
        raise ValueError("need at least one training network")
    tests = config.test_networks or nets
    feats = {name: _prep(net) for name, net in {**nets, **tests}.items()}

    cells = []
    for seed in config.seeds:
        datasets = [
            build_pair_dataset(
                net, feats[name], seed=seed, pair_cap=config.cpnn.pair_cap, network_id=name
            )
            for name, net in nets.items()
        ]
        model, trace = _joint_model(datasets, config.cpnn, seed)
        for te_name, te_net in tests.items():
            acc = pair_accuracy(model, te_net, feats[te_name], seed=seed, cap=config.eval_pair_cap)
            cells.append(
                {"train": "+".join(nets), "test": te_name, "seed": seed, "accuracy": acc}
            )
    means = {
        te: float(np.mean([c["accuracy"] for c in cells if c["test"] == te])) for te in tests
    }
    return _report_shell(
        "joint", {"seeds": list(config.seeds), "cells": cells, "mean_accuracy": means}
    )


def _oriented_keys(ds: PairDataset) -> set[tuple[int, int]]:
    """(earlier, later) edge-index pairs implied by the dataset labels."""
    earlier = np.where(ds.y > 0.5, ds.first, ds.second)
    later = np.where(ds.y > 0.5, ds.second, ds.first)
    return set(zip(earlier.tolist(), later.tolist()))


def _dedup(aug_ds: PairDataset, real_keys: set[tuple[int, int]]) -> PairDataset:
    """Drop augmented pairs whose edges and order already appear in the real set."""
    earlier = np.where(aug_ds.y > 0.5, aug_ds.first, aug_ds.second)
    later = np.where(aug_ds.y > 0.5, aug_ds.second, aug_ds.first)
    keep = np.array(
        [(a, b) not in real_keys for a, b in zip(earlier.tolist(), later.tolist())], dtype=bool
    )
    return PairDataset(
        X=aug_ds.X[keep],
        y=aug_ds.y[keep],
        network_id=aug_ds.network_id,
        first=aug_ds.first[keep],
        second=aug_ds.second[keep],
    )


def run_augmented_joint(config: ExperimentConfig) -> dict:
    """Joint training over real pair data fused with deduplicated augmented data.

    Augmented networks share their source's topology, so their features are
    the source's feature matrix; pairs duplicating a real (edges, order)
    combination are dropped before fusion.
    """
    nets = config.training_networks
    if len(nets) < 1:
        raise ValueError("need at least one training network")
    tests = config.test_networks or nets
    feats = {name: _prep(net) for name, net in {**nets, **tests}.items()}

    cells = []
    aug_kept_total = 0
    for seed in config.seeds:
        datasets = []
        real_keys: dict[str, set[tuple[int, int]]] = {}
        for name, net in nets.items():
            ds = build_pair_dataset(
                net, feats[name], seed=seed, pair_cap=config.cpnn.pair_cap, network_id=name
            )
            real_keys[name] = _oriented_keys(ds)
            datasets.append(ds)
        aug_kept = 0
        for src_name, aug_nets in config.augmented.items():
            if src_name not in nets:
                raise ValueError(f"augmented source {src_name!r} is not a training network")
            for k, aug_net in enumerate(aug_nets):
                ds = build_pair_dataset(
                    aug_net,
                    feats[src_name],
                    seed=seed * 1_000_003 + k,
                    pair_cap=config.cpnn.pair_cap,
                    network_id=f"{src_name}+aug{k}",
                )
                ds = _dedup(ds, real_keys[src_name])
                if len(ds):
                    datasets.append(ds)
                    aug_kept += len(ds)
        if config.augmented and aug_kept == 0:
            log.warning("all augmented pairs were duplicates; training on real data only")
        aug_kept_total += aug_kept
        model, trace = _joint_model(datasets, config.cpnn, seed)
        for te_name, te_net in tests.items():
            acc = pair_accuracy(model, te_net, feats[te_name], seed=seed, cap=config.eval_pair_cap)
            cells.append(
                {"train": "+".join(nets) + "+aug", "test": te_name, "seed": seed, "accuracy": acc}
            )
    means = {
        te: float(np.mean([c["accuracy"] for c in cells if c["test"] == te])) for te in tests
    }
    return _report_shell(
        "augjoint",
        {
            "seeds": list(config.seeds),
            "cells": cells,
            "mean_accuracy": means,
            "augmented_pairs_used": aug_kept_total,
        },
    )


def run_ratio_sweep(
    net: TemporalNetwork,
    ratios: list[float],
    seeds: tuple[int, ...],
    cpnn_cfg: CpnnConfig | None = None,
    eval_pair_cap: int = 50_000,
) -> dict:
    """Train on pairs within a ratio-sized edge subset, test on the complement."""
    if any(not 0 < r < 1 for r in ratios):
        raise ValueError("ratios must lie strictly in (0, 1)")
    cpnn_cfg = cpnn_cfg or CpnnConfig()
    X = _prep(net)
    t = net.timestamps()
    m = net.n_edges

    rows = []
    skipped = []
    for ratio in ratios:
        n_train = int(round(ratio * m))
        if n_train < 2 or m - n_train < 2:
            skipped.append({"ratio": ratio, "reason": "too few edges on one side"})
            continue
        for seed in seeds:
            rng = np.random.default_rng(seed)
            train_edges = np.zeros(m, dtype=bool)
            train_edges[rng.choice(m, size=n_train, replace=False)] = True
            tr = _pairs_within(net, X, t, train_edges, seed, cpnn_cfg.pair_cap)
            te = _pairs_within(net, X, t, ~train_edges, seed + 1, eval_pair_cap)
            if tr is None or te is None:
                skipped.append({"ratio": ratio, "seed": seed, "reason": "no distinguishable pairs"})
                continue
            cfg = CpnnConfig(**{**cpnn_cfg.__dict__, "seed": seed})
            model, trace = train([tr], cfg)
            p = forward_batch(model, te.X)[:, 0]
            acc = float(((p > 0.5) == (te.y > 0.5)).mean())
            rows.append({"ratio": ratio, "seed": seed, "accuracy": acc})

    curve = []
    for ratio in ratios:
        vals = [r["accuracy"] for r in rows if r["ratio"] == ratio]
        if vals:
            curve.append(
                {"ratio": ratio, "mean": float(np.mean(vals)), "std": float(np.std(vals))}
            )
    return _report_shell(
        "ratio", {"seeds": list(seeds), "rows": rows, "curve": curve, "skipped": skipped}
    )


def _pairs_within(net, X, t, edge_mask, seed, cap):
    """Balanced pair dataset restricted to edges where edge_mask is True."""
    idx = np.flatnonzero(edge_mask)
    if idx.size < 2:
        return None
    sub_t = t[idx]
    rng = np.random.default_rng(seed)
    ii, jj = np.triu_indices(idx.size, k=1)
    keep = sub_t[ii] != sub_t[jj]
    ii, jj = ii[keep], jj[keep]
    if ii.size == 0:
        return None
    if ii.size > cap:
        sel = rng.choice(ii.size, size=cap, replace=False)
        ii, jj = ii[sel], jj[sel]
    gi, gj = idx[ii], idx[jj]
    earlier = np.where(t[gi] < t[gj], gi, gj)
    later = np.where(t[gi] < t[gj], gj, gi)
    n = earlier.size
    swap = np.zeros(n, dtype=bool)
    swap[rng.permutation(n)[: n // 2]] = True
    first = np.where(swap, later, earlier)
    second = np.where(swap, earlier, later)
    return PairDataset(
        X=np.hstack([X[first], X[second]]),
        y=(~swap).astype(float),
        first=first,
        second=second,
    )


def simulate_comparator(m: int, x: float, rng: np.random.Generator) -> PairwiseMatrix:
    """Hard Bernoulli comparator over edges in true order 1..m (alpha_i = i/m)."""
    if not 0.5 < x <= 1:
        raise ValueError("x must lie in (0.5, 1]")
    P = np.full((m, m), 0.5)
    ii, jj = np.triu_indices(m, k=1)
    correct = rng.random(ii.size) < x
    P[ii, jj] = correct.astype(float)  # i < j: truly i before j
    P[jj, ii] = 1.0 - correct.astype(float)
    return PairwiseMatrix(P)


def run_equivalence_sim(m: int, x_values: list[float], seeds: tuple[int, ...]) -> dict:
    """Empirical mean-field/Borda reconstruction error vs the closed form."""
    if any(not 0.5 < x <= 1 for x in x_values):
        raise ValueError("x values must lie in (0.5, 1]")
    alpha = np.arange(1, m + 1) / m
    truth = NormalizedOrder(alpha)
    table = []
    for x in x_values:
        residuals = []
        borda_rmse = []
        for seed in seeds:
            rng = np.random.default_rng(seed)
            P = simulate_comparator(m, x, rng)
            alpha_hat = meanfield_positions(P, x)
            residuals.append(alpha_hat - alpha)
            est = order_from_scores(borda_scores(P))
            borda_rmse.append(evaluate(est, truth)["rmse"])
        res = np.concatenate(residuals)
        table.append(
            {
                "x": x,
                "empirical_std": float(np.std(res)),
                "empirical_rmse": float(np.sqrt(np.mean(res**2))),
                "borda_rmse_mean": float(np.mean(borda_rmse)),
                "theoretical_error": float(theoretical_error(x, m)) if x < 1 else 0.0,
            }
        )
    return _report_shell("equiv", {"M": m, "seeds": list(seeds), "table": table})
