"""Synthetic temporal-network generators: BA, PSO, and Fitness growth models.

All three grow a network one node at a time from an (m+1)-clique seed.
Seed-clique edges get timestamp 0; every later edge is stamped with the
arrival index of its newer endpoint, so timestamps strictly increase with
arrival.  Node identifiers are the arrival indices as strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .netio import TemporalNetwork

__all__ = ["SynthConfig", "generate_ba", "generate_pso", "generate_fitness", "generate"]


@dataclass
class SynthConfig:
    model: str = "ba"  # ba | pso | fitness
    n: int = 100
    m: int = 2
    seed: int = 0
    # PSO knobs
    pso_fading: float = 0.5  # popularity-fading exponent (beta)
    pso_temperature: float = 0.1
    # Fitness knobs
    fitness_dist: str = "uniform"  # uniform(0,1] (default) or constant
    fitness_scale: float = 1.0
    fitness_values: np.ndarray | None = None  # explicit per-node eta, overrides the dist
    max_fitness_retries: int = 100

    def validate(self):
        if self.n <= self.m or self.m < 1:
            raise ValueError(f"need n > m >= 1, got n={self.n}, m={self.m}")
        if self.model not in ("ba", "pso", "fitness"):
            raise ValueError(f"unknown model {self.model!r}")


def _seed_clique(m: int) -> list[tuple[int, int, float]]:
    return [(i, j, 0.0) for i in range(m + 1) for j in range(i + 1, m + 1)]


def _finish(n: int, edges: list[tuple[int, int, float]]) -> TemporalNetwork:
    return TemporalNetwork(tuple(str(i) for i in range(n)), tuple(edges))


def _attach_weighted(rng, weights: np.ndarray, m: int) -> list[int]:
    """Draw m distinct targets with probability proportional to weights."""
    w = weights.astype(float).copy()
    chosen = []
    for _ in range(m):
        p = w / w.sum()
        pick = int(rng.choice(len(w), p=p))
        chosen.append(pick)
        w[pick] = 0.0
    return chosen


def generate_ba(config: SynthConfig) -> TemporalNetwork:
    """Barabasi-Albert preferential attachment: P(connect to j) ~ k_j."""
    config.validate()
    n, m = config.n, config.m
    rng = np.random.default_rng(config.seed)
    edges = _seed_clique(m)
    degree = np.zeros(n)
    degree[: m + 1] = m
    for new in range(m + 1, n):
        for tgt in _attach_weighted(rng, degree[:new], m):
            edges.append((tgt, new, float(new)))
            degree[tgt] += 1
        degree[new] = m
    return _finish(n, edges)


def generate_fitness(config: SynthConfig) -> TemporalNetwork:
    """Bianconi-Barabasi fitness model: P(connect to j) ~ k_j * eta_j."""
    config.validate()
    n, m = config.n, config.m
    rng = np.random.default_rng(config.seed)

    def draw_eta() -> float:
        if config.fitness_dist == "constant":
            return config.fitness_scale
        for _ in range(config.max_fitness_retries):
            x = (1.0 - rng.random()) * config.fitness_scale  # uniform (0, 1]
            if x > 0:
                return x
        raise RuntimeError("fitness distribution kept producing non-positive draws")

    if config.fitness_values is not None:
        eta = np.asarray(config.fitness_values, dtype=float)
        if eta.shape != (n,) or np.any(eta <= 0):
            raise ValueError("fitness_values must be n positive reals")
    else:
        eta = np.array([draw_eta() for _ in range(n)])
    edges = _seed_clique(m)
    degree = np.zeros(n)
    degree[: m + 1] = m
    for new in range(m + 1, n):
        for tgt in _attach_weighted(rng, degree[:new] * eta[:new], m):
            edges.append((tgt, new, float(new)))
            degree[tgt] += 1
        degree[new] = m
    return _finish(n, edges)


def generate_pso(config: SynthConfig) -> TemporalNetwork:
    """Popularity-similarity optimization on the hyperbolic disk.

    Node i sits at a random angle with radial coordinate ln(i+1); earlier
    nodes drift outward with fading exponent beta.  Each arrival connects to
    the m existing nodes at minimal hyperbolic distance, which trades off
    popularity (small radius, i.e. high degree) against angular similarity.
    """
    config.validate()
    n, m = config.n, config.m
    beta = config.pso_fading
    rng = np.random.default_rng(config.seed)

    theta = rng.random(n) * 2 * math.pi
    edges = _seed_clique(m)
    for new in range(m + 1, n):
        r_new = math.log(new + 1)
        # popularity fading: r_j(new) = beta*r_j + (1-beta)*r_new
        idx = np.arange(new)
        r_j = beta * np.log(idx + 1) + (1 - beta) * r_new
        dtheta = np.abs(theta[:new] - theta[new])
        dtheta = np.minimum(dtheta, 2 * math.pi - dtheta)
        dist = r_new + r_j + np.log(np.maximum(dtheta, 1e-12) / 2.0)
        order = np.argsort(dist, kind="stable")
        for tgt in order[:m]:
            edges.append((int(tgt), new, float(new)))
    return _finish(n, edges)


def generate(config: SynthConfig) -> TemporalNetwork:
    return {"ba": generate_ba, "pso": generate_pso, "fitness": generate_fitness}[
        config.model
    ](config)
