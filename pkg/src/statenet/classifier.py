"""Closed-form ridge-regression classifier over feature vectors.

Multiclass handling is one-hot indicator regression: fit one linear score
column per topic against 0/1 targets, predict by argmax. The intercept is
carried as an extra all-ones feature column whose coefficient is not
regularized. The solve is a direct Cholesky factorization of the regularized
normal equations (LU fallback), followed by iterative refinement until the
relative residual is at most RESIDUAL_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericError
from .features import FeatureMatrix

NUM_CLASSES = 4
RESIDUAL_TOL = 1e-8
_REFINE_STEPS = 4


@dataclass
class RidgeClassifier:
    """Per-class linear weights; last row of `beta` is the intercept."""

    beta: np.ndarray
    lam: float
    dim: int
    residual: float

    def __post_init__(self):
        if self.beta.shape != (self.dim + 1, NUM_CLASSES):
            raise DimensionError(
                f"beta has shape {self.beta.shape}, expected {(self.dim + 1, NUM_CLASSES)}")


def _relative_residual(gram: np.ndarray, beta: np.ndarray, rhs: np.ndarray) -> float:
    denom = np.linalg.norm(rhs)
    if denom == 0.0:
        return float(np.linalg.norm(gram @ beta - rhs))
    return float(np.linalg.norm(gram @ beta - rhs) / denom)


def fit(features: FeatureMatrix, lam: float) -> RidgeClassifier:
    """Solve the regularized normal equations for one-hot class targets.

    The regularizer adds `lam` to every diagonal entry except the intercept's.
    Raises NumericError when the system cannot be solved to RESIDUAL_TOL,
    which for lam=0 means the data matrix is rank-deficient; use lam > 0.
    """
    if features.rows < 1:
        raise DimensionError("cannot fit on an empty feature matrix")
    if not (lam >= 0.0 and np.isfinite(lam)):
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    if features.labels.min() < 0 or features.labels.max() >= NUM_CLASSES:
        raise DimensionError(f"labels must be in [0, {NUM_CLASSES})")

    dim = features.dim
    xa = np.hstack([features.values, np.ones((features.rows, 1))])
    targets = np.zeros((features.rows, NUM_CLASSES), dtype=np.float64)
    targets[np.arange(features.rows), features.labels] = 1.0

    gram = xa.T @ xa
    reg = np.full(dim + 1, lam)
    reg[dim] = 0.0
    gram[np.diag_indices_from(gram)] += reg
    rhs = xa.T @ targets

    solve = None
    try:
        cho = scipy.linalg.cho_factor(gram, lower=True)
        solve = lambda r: scipy.linalg.cho_solve(cho, r)
    except scipy.linalg.LinAlgError:
        try:
            lu = scipy.linalg.lu_factor(gram)
            solve = lambda r: scipy.linalg.lu_solve(lu, r)
        except (scipy.linalg.LinAlgError, ValueError):
            raise NumericError(
                "normal equations are singular; refit with lambda > 0") from None

    beta = solve(rhs)
    for _ in range(_REFINE_STEPS):
        # A singular LU factorization yields non-finite entries; stop before
        # feeding them back into the solver.
        if not np.isfinite(beta).all():
            break
        if _relative_residual(gram, beta, rhs) <= RESIDUAL_TOL:
            break
        beta = beta + solve(rhs - gram @ beta)
    if not np.isfinite(beta).all():
        raise NumericError(
            "normal equations are singular; refit with lambda > 0")
    residual = _relative_residual(gram, beta, rhs)
    if not (residual <= RESIDUAL_TOL):
        raise NumericError(
            f"ridge solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}; "
            "the system is singular or ill-conditioned, refit with lambda > 0")
    return RidgeClassifier(beta=beta, lam=float(lam), dim=dim, residual=residual)


def scores(clf: RidgeClassifier, features: FeatureMatrix) -> np.ndarray:
    if features.dim != clf.dim:
        raise DimensionError(
            f"feature dimension {features.dim} does not match classifier dim {clf.dim}")
    return features.values @ clf.beta[:-1] + clf.beta[-1]


def predict(clf: RidgeClassifier, features: FeatureMatrix) -> np.ndarray:
    """Argmax class per row; ties resolve to the lowest class index."""
    return np.argmax(scores(clf, features), axis=1).astype(np.int64)


def accuracy(predicted, truth) -> float:
    """Fraction of exact label matches between two equal-length sequences."""
    p = np.asarray(predicted)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise DimensionError(f"prediction/truth shapes differ: {p.shape} vs {t.shape}")
    if p.shape[0] < 1:
        raise ValueError("accuracy needs at least one prediction")
    return float(np.mean(p == t))
