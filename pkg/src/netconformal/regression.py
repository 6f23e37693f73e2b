"""Fitted models and the absolute-residual non-conformity score.

The models are deliberately plain (ridge-able least squares and a
Nadaraya-Watson smoother): conformal coverage is model-agnostic, so these
stand in for fancier fits without affecting validity. What matters
structurally is that a model never sees the calibration fold's responses.

Shape conventions: fitting treats a 1-D ``x`` as a single feature column of
m samples; prediction treats a 1-D ``x`` as a single query point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

__all__ = [
    "OlsModel",
    "KernelSmoother",
    "fit_ols",
    "fit_kernel_smoother",
    "score",
    "silverman_bandwidth",
]


def _fit_columns(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[:, None] if x.ndim == 1 else x


def _query_rows(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[None, :] if x.ndim == 1 else x


@dataclass(frozen=True)
class OlsModel:
    """Linear model with intercept; coef[0] is the intercept."""

    coef: np.ndarray
    ridge: float = 0.0
    kind: str = "ols"

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = _query_rows(x)
        design = np.column_stack([np.ones(x.shape[0]), x])
        return design @ self.coef

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "intercept": float(self.coef[0]),
            "coefficients": [float(c) for c in self.coef[1:]],
            "ridge": self.ridge,
        }


@dataclass(frozen=True)
class KernelSmoother:
    """Nadaraya-Watson with a Gaussian kernel and per-dimension bandwidths."""

    x_train: np.ndarray
    y_train: np.ndarray
    bandwidth: np.ndarray
    kind: str = "kernel-smoother"

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = _query_rows(x)
        diffs = (x[:, None, :] - self.x_train[None, :, :]) / self.bandwidth
        logw = -0.5 * np.sum(diffs**2, axis=2)
        logw -= logw.max(axis=1, keepdims=True)  # stabilize; Gaussian weights stay positive
        w = np.exp(logw)
        return (w @ self.y_train) / w.sum(axis=1)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "bandwidth": [float(b) for b in self.bandwidth],
            "n_train": int(self.y_train.size),
        }


def fit_ols(design: np.ndarray, y: np.ndarray, ridge: float = 0.0) -> OlsModel:
    """Least squares of ``y`` on ``design`` (intercept added internally),
    minimizing ||y - Xb||^2 + ridge * ||b||^2.

    At ridge = 0 the design (with intercept) must have full column rank;
    rank-deficient inputs raise with a hint to add ridge.
    """
    X = np.column_stack([np.ones(len(np.atleast_1d(y))), _fit_columns(design)])
    y = np.asarray(y, dtype=np.float64)
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    if ridge == 0.0 and np.linalg.matrix_rank(X) < X.shape[1]:
        raise np.linalg.LinAlgError(
            "design is rank deficient at ridge=0; pass a positive ridge penalty"
        )
    gram = X.T @ X + ridge * np.eye(X.shape[1])
    coef = np.linalg.solve(gram, X.T @ y)
    return OlsModel(coef=coef, ridge=ridge)


def silverman_bandwidth(x: np.ndarray) -> np.ndarray:
    """Rule-of-thumb bandwidth 1.06 * sigma_hat * m^{-1/5} per dimension."""
    x = _fit_columns(x)
    m = x.shape[0]
    sd = x.std(axis=0, ddof=1) if m > 1 else np.ones(x.shape[1])
    sd = np.where(sd > 0, sd, 1.0)
    return 1.06 * sd * m ** (-0.2)


def fit_kernel_smoother(
    x: np.ndarray, y: np.ndarray, bandwidth: Optional[Union[float, np.ndarray]] = None
) -> KernelSmoother:
    """Nadaraya-Watson fit; ``bandwidth`` defaults to the Silverman rule."""
    x = _fit_columns(x)
    y = np.asarray(y, dtype=np.float64)
    if bandwidth is None:
        h = silverman_bandwidth(x)
    else:
        h = np.broadcast_to(np.asarray(bandwidth, dtype=np.float64), (x.shape[1],)).copy()
    if np.any(h <= 0):
        raise ValueError("bandwidth must be positive")
    return KernelSmoother(x_train=x.copy(), y_train=y.copy(), bandwidth=h)


def score(
    model, y: Union[float, np.ndarray], x: np.ndarray, z: Optional[np.ndarray] = None
) -> np.ndarray:
    """Absolute-residual non-conformity score |y - mu_hat(x, z)|."""
    features = _query_rows(x)
    if z is not None:
        features = np.hstack([features, _query_rows(z)])
    return np.abs(np.asarray(y, dtype=np.float64) - model.predict(features))
