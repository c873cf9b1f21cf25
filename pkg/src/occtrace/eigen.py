"""Eigenbasis extraction for window matrices and projection onto it.

The scatter matrix of mean-centered window columns is eigendecomposed with a
cyclic Jacobi solver written here (no external linear-algebra solver), and
window vectors are projected onto the leading eigenvectors. Projection uses
the raw, uncentered vector by default; centered projection is available as an
explicit option.
"""

import math
from dataclasses import dataclass

import numpy as np

from .base import ParamsMixin, as_float_matrix, as_float_vector, ensure_fitted
from .errors import (
    DimensionError,
    NonConvergenceError,
    NonSymmetricError,
    NotEnoughDataError,
)
from .windows import WindowMatrix


def _max_offdiag(a):
    if a.shape[0] < 2:
        return 0.0
    off = np.abs(a).copy()
    np.fill_diagonal(off, 0.0)
    return float(off.max())


def _normalize_signs(vectors):
    # Flip each column so its largest-magnitude entry is positive; argmax
    # resolves magnitude ties toward the lowest index.
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            vectors[:, j] = -col
    return vectors


def symmetric_eigendecomposition(matrix, symmetry_tol=1e-9, max_sweeps=64):
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.

    Cyclic Jacobi rotations are applied until the largest off-diagonal entry
    falls below 1e-13 of the matrix scale, which keeps the eigenpair residual
    well under 1e-8 * max(1, max|A|). Raises NonSymmetricError when the input
    is not symmetric within tolerance and NonConvergenceError when the sweep
    budget runs out.
    """
    a = as_float_matrix(matrix, "matrix")
    n, m = a.shape
    if n != m:
        raise DimensionError(f"matrix must be square, got {a.shape}")
    scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
    if n > 1 and float(np.abs(a - a.T).max()) > symmetry_tol * scale:
        raise NonSymmetricError("matrix is not symmetric within tolerance")

    a = (a + a.T) * 0.5
    v = np.eye(n)
    conv_tol = 1e-13 * scale
    skip_tol = conv_tol * 1e-2

    for _ in range(max_sweeps):
        if _max_offdiag(a) <= conv_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_tol:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - s * vcol_q
                v[:, q] = s * vcol_p + c * vcol_q
    else:
        if _max_offdiag(a) > conv_tol:
            raise NonConvergenceError(
                f"jacobi eigensolver did not converge within {max_sweeps} sweeps"
            )

    eigvals = np.diag(a).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], _normalize_signs(v[:, order])


@dataclass(eq=False)
class EigenModel:
    """Mean vector plus the leading orthonormal eigenvectors of the scatter matrix."""

    mean: np.ndarray          # (dim,)
    eigenvalues: np.ndarray   # (n_components,), non-increasing, >= 0
    eigenvectors: np.ndarray  # (dim, n_components), orthonormal columns
    center_before_project: bool = False

    @property
    def dim(self):
        return int(self.eigenvectors.shape[0])

    @property
    def n_components(self):
        return int(self.eigenvectors.shape[1])

    def project(self, vector):
        """Project one window vector onto the eigenbasis."""
        t = as_float_vector(vector, "vector", length=self.dim)
        if self.center_before_project:
            t = t - self.mean
        return self.eigenvectors.T @ t

    def project_rows(self, rows):
        """Project row vectors, shape (n, dim) -> (n, n_components)."""
        x = as_float_matrix(rows, "rows")
        if x.shape[1] != self.dim:
            raise DimensionError(f"rows have width {x.shape[1]}, model expects {self.dim}")
        if self.center_before_project:
            x = x - self.mean[None, :]
        return x @ self.eigenvectors


def fit_eigenmodel(train, n_components=None, center_before_project=False):
    """Fit the eigenbasis from training windows.

    ``train`` is a WindowMatrix or a (dim, n_windows) array of column vectors.
    The scatter matrix of the centered columns is eigendecomposed without any
    sample-count normalization; eigenvectors are invariant to that scaling.
    Tiny negative eigenvalues from round-off are clamped to zero.
    """
    data = train.data if isinstance(train, WindowMatrix) else as_float_matrix(train, "train")
    dim, n = data.shape
    if n < 1:
        raise NotEnoughDataError("cannot fit an eigenmodel from an empty matrix")
    k = dim if n_components is None else int(n_components)
    if not 1 <= k <= dim:
        raise DimensionError(f"n_components must be in [1, {dim}], got {k}")

    mean = data.mean(axis=1)
    centered = data - mean[:, None]
    scatter = centered @ centered.T
    scatter = (scatter + scatter.T) * 0.5
    eigvals, vecs = symmetric_eigendecomposition(scatter)
    eigvals = np.where(eigvals < 0.0, 0.0, eigvals)
    return EigenModel(
        mean=mean,
        eigenvalues=eigvals[:k].copy(),
        eigenvectors=vecs[:, :k].copy(),
        center_before_project=center_before_project,
    )


class EigentraceProjector(ParamsMixin):
    """Estimator-style wrapper: fit on window rows, transform into eigenspace."""

    def __init__(self, n_components=None, center_before_project=False):
        self.n_components = n_components
        self.center_before_project = center_before_project
        self.model_ = None

    def fit(self, X, y=None):
        rows = as_float_matrix(X, "X", min_rows=1)
        self.model_ = fit_eigenmodel(
            rows.T, n_components=self.n_components,
            center_before_project=self.center_before_project,
        )
        return self

    def transform(self, X):
        ensure_fitted(self, "model_")
        return self.model_.project_rows(X)

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)
