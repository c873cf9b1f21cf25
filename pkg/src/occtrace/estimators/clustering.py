"""Lloyd k-means used to seed the basis-function and mixture estimators."""

import numpy as np

from ..base import as_float_matrix
from ..errors import NotEnoughDataError


def kmeans_cluster(X, n_clusters, seed=0, max_iter=100):
    """Cluster rows of X into ``n_clusters`` centers.

    Initial centers are distinct rows sampled with the seeded generator;
    iterations run to an assignment fixpoint or the iteration cap. A cluster
    that empties out is re-seeded from the point currently farthest from its
    own center, so every returned center owns at least one point.
    """
    X = as_float_matrix(X, "X")
    n = X.shape[0]
    m = int(n_clusters)
    if m < 1:
        raise ValueError("n_clusters must be >= 1")
    if n < m:
        raise NotEnoughDataError(f"k-means needs at least {m} points, got {n}")

    rng = np.random.default_rng(seed)
    centers = X[rng.choice(n, size=m, replace=False)].copy()
    assign = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        for c in np.flatnonzero(np.bincount(new_assign, minlength=m) == 0):
            far = int(np.argmax(d2[np.arange(n), new_assign]))
            centers[c] = X[far]
            new_assign[far] = c
            d2[far] = ((X[far] - centers) ** 2).sum(axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(m):
            members = X[assign == c]
            if members.shape[0]:
                centers[c] = members.mean(axis=0)
    return centers
