"""Diagonal Gaussian mixture fitted by expectation-maximization.

The mixture is seeded from k-means clusters. Each EM iteration computes
posterior responsibilities (E step) and refits weights, means and diagonal
variances from the responsibility-weighted data (M step). Variances are
floored at min_std^2 throughout, and the per-iteration log-likelihood is
recorded so monotonicity can be checked from the outside.
"""

from dataclasses import dataclass, field

import numpy as np

from ..base import as_float_matrix
from ..errors import DimensionError, NotEnoughDataError
from .clustering import kmeans_cluster

_LOG_2PI = float(np.log(2.0 * np.pi))


def _component_log_density(X, means, variances):
    # (n, h) x (m, h) -> (n, m) log N(x | mean_v, diag variances_v)
    const = -0.5 * (np.log(variances) + _LOG_2PI).sum(axis=1)
    sq = (((X[:, None, :] - means[None, :, :]) ** 2) / variances[None, :, :]).sum(axis=2)
    return const[None, :] - 0.5 * sq


def _logsumexp_rows(a):
    m = a.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=1, keepdims=True)))[:, 0]


@dataclass(eq=False)
class GmmModel:
    weights: np.ndarray        # (m,), positive, sums to 1
    means: np.ndarray          # (m, h)
    variances: np.ndarray      # (m, h), each >= min_std^2
    counts: np.ndarray         # (m,), effective points per component
    min_std: float
    log_likelihood_path: list = field(default_factory=list)

    @property
    def n_components(self):
        return int(self.weights.shape[0])

    @property
    def n_features(self):
        return int(self.means.shape[1])

    def _check(self, X):
        arr = np.asarray(X, dtype=np.float64)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.n_features:
            raise DimensionError(
                f"expected vectors of width {self.n_features}, got shape {np.asarray(X).shape}"
            )
        return arr, single

    def log_density(self, X):
        """log of the mixture density, computed by log-sum-exp."""
        arr, single = self._check(X)
        comp = np.log(self.weights)[None, :] + _component_log_density(
            arr, self.means, self.variances
        )
        out = _logsumexp_rows(comp)
        return float(out[0]) if single else out

    def posterior(self, X):
        """Per-component posterior responsibilities; rows sum to one."""
        arr, single = self._check(X)
        comp = np.log(self.weights)[None, :] + _component_log_density(
            arr, self.means, self.variances
        )
        resp = np.exp(comp - _logsumexp_rows(comp)[:, None])
        resp /= resp.sum(axis=1, keepdims=True)
        return resp[0] if single else resp

    def to_payload(self):
        return {
            "kind": "gmm",
            "n_components": self.n_components,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "counts": self.counts.tolist(),
            "min_std": float(self.min_std),
        }

    @classmethod
    def from_payload(cls, payload):
        return cls(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            means=np.asarray(payload["means"], dtype=np.float64),
            variances=np.asarray(payload["variances"], dtype=np.float64),
            counts=np.asarray(payload["counts"], dtype=np.float64),
            min_std=float(payload["min_std"]),
        )


def fit_gmm_em(X, n_components, min_std=0.1, max_iter=100, tol=1e-6, seed=0):
    """Fit a diagonal-covariance mixture of ``n_components`` Gaussians by EM."""
    X = as_float_matrix(X, "X")
    n, h = X.shape
    m = int(n_components)
    if n < m:
        raise NotEnoughDataError(f"EM needs at least {m} points, got {n}")
    floor = float(min_std) ** 2

    centers = kmeans_cluster(X, m, seed=seed)
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    counts = np.bincount(assign, minlength=m).astype(np.float64)
    counts = np.maximum(counts, 1.0)
    weights = counts / counts.sum()
    means = centers.copy()
    variances = np.empty((m, h))
    for c in range(m):
        members = X[assign == c]
        if members.shape[0]:
            variances[c] = ((members - means[c]) ** 2).mean(axis=0)
        else:
            variances[c] = X.var(axis=0)
    variances = np.maximum(variances, floor)

    path = []
    previous = -np.inf
    for _ in range(int(max_iter)):
        comp = np.log(weights)[None, :] + _component_log_density(X, means, variances)
        norm = _logsumexp_rows(comp)
        ll = float(norm.sum())
        path.append(ll)
        if ll - previous < tol and len(path) > 1:
            break
        previous = ll

        resp = np.exp(comp - norm[:, None])
        nk = np.maximum(resp.sum(axis=0), 1e-12)
        weights = nk / n
        means = (resp.T @ X) / nk[:, None]
        spread = (resp[:, :, None] * (X[:, None, :] - means[None, :, :]) ** 2).sum(axis=0)
        variances = np.maximum(spread / nk[:, None], floor)
        counts = nk

    return GmmModel(
        weights=weights,
        means=means,
        variances=variances,
        counts=counts,
        min_std=float(min_std),
        log_likelihood_path=path,
    )
