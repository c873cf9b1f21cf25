"""Shared plumbing: probability clamping, parameter introspection, validation."""

import inspect

import numpy as np

from .errors import DimensionError, NotFittedError

# Class-probability outputs are clamped into [PROB_EPS, 1 - PROB_EPS] at the
# estimator boundary so the odds ratio used by the one-class combiner stays finite.
PROB_EPS = 1e-6


def clamp_probability(p):
    """Clamp probabilities into the open unit interval used by the combiner."""
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def as_float_matrix(x, name="X", min_rows=0):
    """Coerce to a 2-D float64 array, rejecting non-finite values."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_rows:
        raise DimensionError(f"{name} needs at least {min_rows} rows, got {arr.shape[0]}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_float_vector(x, name="x", length=None):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"{name} must have length {length}, got {arr.shape[0]}")
    return arr


def ensure_fitted(obj, attribute):
    if getattr(obj, attribute, None) is None:
        raise NotFittedError(f"{type(obj).__name__} is not fitted; call fit() first")


class ParamsMixin:
    """Minimal get_params/set_params following the common estimator convention.

    Constructor arguments are stored verbatim as attributes of the same name,
    which keeps instances clonable by tools that rely on get_params.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [
            name
            for name, p in sig.parameters.items()
            if name != "self" and p.kind not in (p.VAR_POSITIONAL, p.VAR_KEYWORD)
        ]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"unknown parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def child_seed(seed, *path):
    """Derive a decorrelated integer seed from a master seed and an index path."""
    entropy = [int(seed) & ((1 << 63) - 1)] + [int(p) for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0] >> 1)
