"""Direction normalization, estimation/selection/classification metrics."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import rankdata

from .model import Direction, Orientation

__all__ = [
    "normalize_direction",
    "mse_direction",
    "relative_efficiency",
    "auc",
    "tpr_fpr",
    "combine_directions",
]


def normalize_direction(
    v: np.ndarray,
    sigma_mat: np.ndarray,
    beta_ref: np.ndarray | None = None,
    orientation: Orientation = Orientation.TRUE_BETA,
) -> Direction:
    """Scale to unit length and fix the sign against a reference direction.

    The sign is flipped so that ``beta_ref' sigma_mat v >= 0`` when a reference
    is given; an exact zero inner product keeps the first nonzero coordinate
    positive. The all-zero input maps to the flagged degenerate Direction.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("v must be finite")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return Direction(v=np.zeros_like(v), orientation_ref=Orientation.NONE, degenerate=True)
    unit = v / norm
    if beta_ref is None:
        return Direction(v=unit, orientation_ref=Orientation.NONE)
    inner = float(np.asarray(beta_ref, dtype=float) @ np.asarray(sigma_mat, dtype=float) @ unit)
    if inner < 0.0:
        unit = -unit
    elif inner == 0.0:
        first = unit[np.nonzero(unit)[0][0]]
        if first < 0.0:
            unit = -unit
    return Direction(v=unit, orientation_ref=orientation)


def mse_direction(est: Direction, truth: Direction) -> float:
    """Squared Euclidean distance between the two (unit or degenerate) vectors."""
    return float(np.sum((est.v - truth.v) ** 2))


def relative_efficiency(mse_num: float, mse_den: float) -> float:
    """Inverse MSE ratio: values above 1 favor the estimator in the denominator."""
    if mse_den == 0.0:
        return math.inf
    if mse_den < 0.0 or mse_num < 0.0:
        raise ValueError("mean squared errors must be nonnegative")
    return mse_num / mse_den


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based concordance P(score+ > score-) + 0.5 P(score+ = score-).

    Computed exactly from midranks, so ties contribute one half.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc requires both classes")
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def tpr_fpr(support_est: set, support_true: set, p: int) -> tuple[float, float]:
    """True/false positive rates of a selected support versus the true one.

    Supports are sets of 0-based coordinate indices in range(p); the true
    support must be neither empty nor full.
    """
    support_est = set(support_est)
    support_true = set(support_true)
    if not support_true or len(support_true) >= p:
        raise ValueError("support_true must be nonempty and strictly smaller than p")
    if not support_est <= set(range(p)) or not support_true <= set(range(p)):
        raise ValueError("supports must be subsets of range(p)")
    tpr = len(support_est & support_true) / len(support_true)
    fpr = len(support_est - support_true) / (p - len(support_true))
    return tpr, fpr


def combine_directions(dirs: list[Direction]) -> Direction:
    """Coordinate-wise mean of unit directions, renormalized to unit length.

    Inputs must already be consistently oriented; exact cancellation yields the
    degenerate Direction. The orientation tag is kept when all inputs share it.
    """
    if not dirs:
        raise ValueError("combine_directions requires at least one direction")
    mean = np.mean([d.v for d in dirs], axis=0)
    refs = {d.orientation_ref for d in dirs}
    orientation = refs.pop() if len(refs) == 1 else Orientation.NONE
    norm = np.linalg.norm(mean)
    if norm == 0.0:
        return Direction(v=np.zeros_like(mean), orientation_ref=Orientation.NONE, degenerate=True)
    return Direction(v=mean / norm, orientation_ref=orientation)
