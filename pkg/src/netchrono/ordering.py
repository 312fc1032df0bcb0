"""Global order reconstruction from pairwise probabilities, and its metrics.

Borda scoring sums each edge's "generated before" probabilities against all
other edges; the edge with the most before-votes is placed first.  The
mean-field estimator instead maps after-vote averages through an affine
transform whose error has a closed form in the comparator accuracy x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netio import NormalizedOrder

__all__ = [
    "PairwiseMatrix",
    "OrderEstimate",
    "borda_scores",
    "order_from_scores",
    "meanfield_positions",
    "theoretical_error",
    "evaluate",
]


@dataclass(frozen=True)
class PairwiseMatrix:
    """M x M matrix P with P[i][j] = Pr(edge i generated before edge j).

    Entries lie in [0,1]; the diagonal is fixed at 0.5 by convention.
    Antisymmetry is NOT assumed: P[i][j] + P[j][i] need not be 1.
    """

    P: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.P, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise ValueError("P must be a square matrix")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("P entries must lie in [0, 1]")
        if not np.allclose(np.diag(p), 0.5, atol=1e-12):
            raise ValueError("diagonal of P must be 0.5")
        object.__setattr__(self, "P", p)

    @property
    def m(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class OrderEstimate:
    """Scores, earliest-first ranking, and normalized position estimates."""

    scores: np.ndarray = field(repr=False)
    ranking: np.ndarray = field(repr=False)  # permutation, earliest first
    alpha_hat: np.ndarray = field(repr=False)  # per-edge, aligned with edge index


def borda_scores(P: PairwiseMatrix) -> np.ndarray:
    """Before-vote sums S[i] = sum_{j != i} P[i][j]."""
    return P.P.sum(axis=1) - np.diag(P.P)


def order_from_scores(scores: np.ndarray) -> OrderEstimate:
    """Sort by before-votes descending (most before-votes = earliest).

    Ties break by ascending edge index; alpha_hat[i] = rank of edge i / M.
    """
    s = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    m = s.size
    ranking = np.argsort(-s, kind="stable")
    alpha_hat = np.empty(m)
    alpha_hat[ranking] = np.arange(1, m + 1) / m
    return OrderEstimate(scores=s, ranking=ranking, alpha_hat=alpha_hat)


def meanfield_positions(P: PairwiseMatrix, x: float) -> np.ndarray:
    """Unbiased position estimates alpha_hat_i = (u_i - (1-x)) / (2x - 1).

    u_i averages the after-votes 1 - P[i][j] over all j != i.  Values are not
    clipped to (0, 1]; the estimator is unbiased but noisy.
    """
    if not x > 0.5:
        raise ValueError(f"comparator accuracy x must exceed 0.5, got {x}")
    m = P.m
    u = ((1.0 - P.P).sum(axis=1) - 0.5) / m
    return (u - (1.0 - x)) / (2.0 * x - 1.0)


def theoretical_error(x: float, m: int) -> float:
    """Closed-form std of the mean-field position estimate."""
    if not x > 0.5:
        raise ValueError(f"x must exceed 0.5, got {x}")
    if x > 1 or m < 1:
        raise ValueError("need x <= 1 and M >= 1")
    return np.sqrt(x * (1.0 - x) / (2.0 * x - 1.0) ** 2) / np.sqrt(m)


def evaluate(order: OrderEstimate | np.ndarray, truth: NormalizedOrder) -> dict:
    """Pairwise accuracy over distinguishable true pairs, RMSE, and NRMSE.

    Accepts either an OrderEstimate or a bare alpha_hat vector.  Accuracy is
    reported as None when the truth has no distinguishable pair.
    """
    alpha_hat = order.alpha_hat if isinstance(order, OrderEstimate) else np.asarray(order, float)
    alpha = truth.alpha
    if alpha_hat.shape != alpha.shape:
        raise ValueError("order and truth cover different edge universes")

    diff = alpha_hat - alpha
    rmse = float(np.sqrt(np.mean(diff**2)))
    spread = float(alpha.max() - alpha.min())
    nrmse = rmse / spread if spread > 0 else float("inf") if rmse > 0 else 0.0

    # pairwise accuracy on pairs with strictly different true positions
    true_cmp = np.sign(alpha[:, None] - alpha[None, :])
    pred_cmp = np.sign(alpha_hat[:, None] - alpha_hat[None, :])
    mask = np.triu(true_cmp != 0, k=1)
    n_pairs = int(mask.sum())
    if n_pairs == 0:
        accuracy = None
    else:
        accuracy = float((pred_cmp[mask] == true_cmp[mask]).mean())
    return {"pairwise_accuracy": accuracy, "rmse": rmse, "nrmse": nrmse, "n_pairs": n_pairs}
