"""Core domain types shared by every other module.

Pure data: no algorithms live here. All types are frozen dataclasses whose
constructors validate their invariants and freeze their array fields, so
instances are immutable and safe to share across threads or processes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OutcomeNoise",
    "Orientation",
    "DegenerateTailsError",
    "DesignSpec",
    "Dataset",
    "ExtremeSubset",
    "FitResult",
    "Direction",
]

_UNIT_TOL = 1e-12


class OutcomeNoise(enum.Enum):
    """Noise law of the binary-outcome threshold model."""

    LOGISTIC_UNIT = "logistic-unit"


class Orientation(enum.Enum):
    """How the sign of a normalized direction was fixed."""

    TRUE_BETA = "true-beta"
    SURROGATE_ALPHA = "surrogate-alpha"
    NONE = "none"


class DegenerateTailsError(ValueError):
    """Tail thresholds collapsed (massive ties); the extreme subset is undefined."""


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _require_finite(name: str, a: np.ndarray) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class DesignSpec:
    """Ground-truth population parameters of the two linked index models.

    ``s = alpha0' x + noise`` drives the surrogate and ``y = 1(beta0' x + eps > 0)``
    the outcome; ``sigma_mat`` is the covariance of the Gaussian design.
    """

    p: int
    sigma_mat: np.ndarray
    beta0: np.ndarray
    alpha0: np.ndarray
    surrogate_noise_sd: float
    outcome_noise: OutcomeNoise = OutcomeNoise.LOGISTIC_UNIT

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be a positive integer")
        sigma = np.asarray(self.sigma_mat, dtype=float)
        if sigma.shape != (self.p, self.p):
            raise ValueError("sigma_mat must be p x p")
        _require_finite("sigma_mat", sigma)
        scale = max(1.0, float(np.abs(sigma).max()))
        if np.abs(sigma - sigma.T).max() > 1e-12 * scale:
            raise ValueError("sigma_mat must be symmetric within 1e-12")
        if np.linalg.eigvalsh(sigma).min() <= 0.0:
            raise ValueError("sigma_mat must be positive definite")
        beta0 = np.asarray(self.beta0, dtype=float)
        alpha0 = np.asarray(self.alpha0, dtype=float)
        if beta0.shape != (self.p,) or alpha0.shape != (self.p,):
            raise ValueError("beta0 and alpha0 must have length p")
        _require_finite("beta0", beta0)
        _require_finite("alpha0", alpha0)
        if not np.any(alpha0 != 0.0):
            raise ValueError("alpha0 must not be the zero vector")
        if not (np.isfinite(self.surrogate_noise_sd) and self.surrogate_noise_sd >= 0.0):
            raise ValueError("surrogate_noise_sd must be a nonnegative real")
        if not isinstance(self.outcome_noise, OutcomeNoise):
            raise ValueError("outcome_noise must be an OutcomeNoise member")
        object.__setattr__(self, "sigma_mat", _frozen_array(sigma))
        object.__setattr__(self, "beta0", _frozen_array(beta0))
        object.__setattr__(self, "alpha0", _frozen_array(alpha0))
        object.__setattr__(self, "surrogate_noise_sd", float(self.surrogate_noise_sd))


@dataclass(frozen=True)
class Dataset:
    """N observations of (surrogate, covariates), optionally with true labels."""

    x: np.ndarray
    s: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        s = np.asarray(self.s, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("x must be an N x p matrix with N >= 1")
        if s.shape != (x.shape[0],):
            raise ValueError("s must be a length-N vector")
        _require_finite("x", x)
        _require_finite("s", s)
        object.__setattr__(self, "x", _frozen_array(x))
        object.__setattr__(self, "s", _frozen_array(s))
        if self.y is not None:
            y = np.asarray(self.y, dtype=float)
            if y.shape != (x.shape[0],):
                raise ValueError("y must be a length-N vector")
            _require_finite("y", y)
            if not np.all((y == 0.0) | (y == 1.0)):
                raise ValueError("y entries must all be 0 or 1")
            object.__setattr__(self, "y", _frozen_array(y))

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class ExtremeSubset:
    """The tail observations of the surrogate, with the synthetic outcome.

    Rows whose surrogate falls at or below ``delta_lo`` carry ``y_star = 0``;
    rows at or above ``delta_hi`` carry ``y_star = 1``. Tail counts are equal,
    so ``mean(y_star) == 1/2`` exactly.
    """

    q: float
    delta_lo: float
    delta_hi: float
    x_sub: np.ndarray
    s_sub: np.ndarray
    y_star: np.ndarray
    source_indices: np.ndarray
    y_true: np.ndarray | None = None

    def __post_init__(self):
        if not (0.0 < self.q <= 1.0):
            raise ValueError("q must lie in (0, 1]")
        if not (self.delta_lo < self.delta_hi):
            raise DegenerateTailsError("tail thresholds must satisfy delta_lo < delta_hi")
        x = np.asarray(self.x_sub, dtype=float)
        s = np.asarray(self.s_sub, dtype=float)
        ystar = np.asarray(self.y_star, dtype=float)
        idx = np.asarray(self.source_indices, dtype=np.int64)
        n = s.shape[0]
        if n < 2 or n % 2 != 0:
            raise ValueError("n_q must be a positive even integer")
        if x.shape[0] != n or x.ndim != 2 or ystar.shape != (n,) or idx.shape != (n,):
            raise ValueError("x_sub, s_sub, y_star and source_indices must agree in length")
        _require_finite("x_sub", x)
        _require_finite("s_sub", s)
        lo = s <= self.delta_lo
        hi = s >= self.delta_hi
        if not np.all(lo ^ hi):
            raise ValueError("every s_sub entry must lie in exactly one tail")
        if not np.array_equal(ystar, hi.astype(float)):
            raise ValueError("y_star must equal 1(s_sub >= delta_hi)")
        if ystar.sum() * 2 != n:
            raise ValueError("tail counts must be equal (mean(y_star) = 1/2 exactly)")
        if len(np.unique(idx)) != n:
            raise ValueError("source_indices must be distinct")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "delta_lo", float(self.delta_lo))
        object.__setattr__(self, "delta_hi", float(self.delta_hi))
        object.__setattr__(self, "x_sub", _frozen_array(x))
        object.__setattr__(self, "s_sub", _frozen_array(s))
        object.__setattr__(self, "y_star", _frozen_array(ystar))
        object.__setattr__(self, "source_indices", _frozen_array(idx, dtype=np.int64))
        if self.y_true is not None:
            ytrue = np.asarray(self.y_true, dtype=float)
            if ytrue.shape != (n,):
                raise ValueError("y_true must have length n_q")
            if not np.all((ytrue == 0.0) | (ytrue == 1.0)):
                raise ValueError("y_true entries must all be 0 or 1")
            object.__setattr__(self, "y_true", _frozen_array(ytrue))

    @property
    def n_q(self) -> int:
        return self.s_sub.shape[0]

    @property
    def p(self) -> int:
        return self.x_sub.shape[1]


@dataclass(frozen=True)
class FitResult:
    """A penalized solution with its support and optimality certificate."""

    beta_hat: np.ndarray
    lam: float
    support: frozenset
    kkt_residual: float
    objective: float
    n_iterations: int
    converged: bool

    def __post_init__(self):
        beta = np.asarray(self.beta_hat, dtype=float)
        _require_finite("beta_hat", beta)
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        if frozenset(int(j) for j in np.nonzero(beta)[0]) != self.support:
            raise ValueError("support must be exactly the nonzero coordinates of beta_hat")
        if not (np.isfinite(self.kkt_residual) and self.kkt_residual >= 0.0):
            raise ValueError("kkt_residual must be a nonnegative real")
        object.__setattr__(self, "beta_hat", _frozen_array(beta))
        object.__setattr__(self, "support", frozenset(int(j) for j in self.support))


@dataclass(frozen=True)
class Direction:
    """A unit vector, or the explicit degenerate all-zero estimate."""

    v: np.ndarray
    orientation_ref: Orientation = Orientation.NONE
    degenerate: bool = field(default=False)

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        _require_finite("v", v)
        if self.degenerate:
            if np.any(v != 0.0):
                raise ValueError("a degenerate Direction must carry the zero vector")
        else:
            if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
                raise ValueError("v must be a unit vector within 1e-12")
        if not isinstance(self.orientation_ref, Orientation):
            raise ValueError("orientation_ref must be an Orientation member")
        object.__setattr__(self, "v", _frozen_array(v))
