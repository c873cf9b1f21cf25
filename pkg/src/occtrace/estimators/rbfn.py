"""Gaussian radial-basis-function network used as a class-probability estimator.

Hidden units sit at k-means cluster centers and share one width derived from
the maximum inter-center distance; the linear output layer is fit in closed
form by ridge-regularized least squares against {0, 1} class targets.
"""

import numpy as np

from ..base import as_float_matrix, ensure_fitted
from ..errors import DimensionError, NotEnoughDataError, SingleClassError
from .contract import ProbabilityEstimator
from .clustering import kmeans_cluster


def rbf_activation(x, center, width_sq):
    """exp(-||x - center||^2 / (2 * width_sq)), in (0, 1]."""
    if width_sq <= 0:
        raise ValueError(f"width must be positive, got {width_sq}")
    x = np.asarray(x, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    return float(np.exp(-float(((x - center) ** 2).sum()) / (2.0 * width_sq)))


def shared_width(centers, min_std):
    """Shared squared width: (max pairwise center distance)^2 / n_centers.

    Floored at min_std^2, which is also the value used when a single center
    leaves the maximum distance undefined.
    """
    c = as_float_matrix(centers, "centers")
    if c.shape[0] == 0:
        raise NotEnoughDataError("need at least one center")
    floor = float(min_std) ** 2
    if c.shape[0] == 1:
        return floor
    d2 = ((c[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
    return max(float(d2.max()) / c.shape[0], floor)


class RbfnEstimator(ProbabilityEstimator):
    """RBF network estimating the target-class probability P(target | x)."""

    def __init__(self, m_clusters=5, min_std=0.1, ridge=1e-6, seed=0):
        self.m_clusters = m_clusters
        self.min_std = min_std
        self.ridge = ridge
        self.seed = seed
        self.centers_ = None
        self.width_sq_ = None
        self.weights_ = None

    def _design(self, X):
        d2 = ((X[:, None, :] - self.centers_[None, :, :]) ** 2).sum(axis=2)
        phi = np.exp(-d2 / (2.0 * self.width_sq_))
        return np.hstack([phi, np.ones((X.shape[0], 1))])

    def fit(self, X, y):
        X = as_float_matrix(X, "X")
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise DimensionError("labels must align one-to-one with rows")
        targets = (y != 0).astype(np.float64)
        if targets.min() == targets.max():
            raise SingleClassError("fit requires both target and artificial rows")
        if X.shape[0] < self.m_clusters:
            raise NotEnoughDataError(
                f"need at least {self.m_clusters} rows for {self.m_clusters} clusters"
            )
        self.centers_ = kmeans_cluster(X, self.m_clusters, seed=self.seed)
        self.width_sq_ = shared_width(self.centers_, self.min_std)
        phi = self._design(X)
        gram = phi.T @ phi + self.ridge * np.eye(phi.shape[1])
        self.weights_ = np.linalg.solve(gram, phi.T @ targets)
        return self

    def _raw_estimate(self, X):
        ensure_fitted(self, "weights_")
        return self._design(X) @ self.weights_

    @property
    def n_features_(self):
        ensure_fitted(self, "centers_")
        return int(self.centers_.shape[1])

    def to_payload(self):
        ensure_fitted(self, "weights_")
        return {
            "kind": "rbfn",
            "m_clusters": int(self.m_clusters),
            "min_std": float(self.min_std),
            "ridge": float(self.ridge),
            "seed": int(self.seed),
            "centers": self.centers_.tolist(),
            "width_sq": float(self.width_sq_),
            "weights": self.weights_.tolist(),
        }

    @classmethod
    def from_payload(cls, payload):
        est = cls(
            m_clusters=int(payload["m_clusters"]),
            min_std=float(payload["min_std"]),
            ridge=float(payload["ridge"]),
            seed=int(payload["seed"]),
        )
        est.centers_ = np.asarray(payload["centers"], dtype=np.float64)
        est.width_sq_ = float(payload["width_sq"])
        est.weights_ = np.asarray(payload["weights"], dtype=np.float64)
        return est
