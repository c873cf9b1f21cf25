"""Common contract for target-class probability estimators.

An estimator fits on labeled rows (label 1 = target, 0 = artificial) and maps
feature vectors to P(target | x). Outputs are clamped into
[PROB_EPS, 1 - PROB_EPS] at this boundary only; the underlying per-model
quantities (leaf frequencies, network outputs) stay raw for unit testing.
"""

import abc

import numpy as np

from ..base import ParamsMixin, clamp_probability
from ..errors import DimensionError


class ProbabilityEstimator(ParamsMixin, abc.ABC):
    @abc.abstractmethod
    def fit(self, X, y):
        """Fit on an (n, h) row matrix with labels in {1 target, 0 artificial}."""

    @abc.abstractmethod
    def _raw_estimate(self, X):
        """Unclamped probability estimates for an (n, h) row matrix."""

    @property
    @abc.abstractmethod
    def n_features_(self):
        """Feature width the estimator was fitted on."""

    def estimate(self, X):
        """Clamped P(target | x); accepts one vector or a row matrix."""
        arr = np.asarray(X, dtype=np.float64)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.n_features_:
            raise DimensionError(
                f"expected vectors of width {self.n_features_}, got shape {np.asarray(X).shape}"
            )
        out = clamp_probability(self._raw_estimate(arr))
        return float(out[0]) if single else out

    @abc.abstractmethod
    def to_payload(self):
        """Serializable dict capturing the fitted state."""
