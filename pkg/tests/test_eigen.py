import numpy as np
import pytest

from occtrace.eigen import (
    EigenModel,
    EigentraceProjector,
    fit_eigenmodel,
    symmetric_eigendecomposition,
)
from occtrace.errors import (
    DimensionError,
    NonConvergenceError,
    NonSymmetricError,
    NotEnoughDataError,
)

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def test_diagonal_matrix():
    vals, vecs = symmetric_eigendecomposition(np.diag([2.0, 1.0]))
    np.testing.assert_allclose(vals, [2.0, 1.0])
    np.testing.assert_allclose(vecs, np.eye(2))


def test_offdiagonal_hand_case():
    vals, vecs = symmetric_eigendecomposition(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(vals, [1.0, -1.0], atol=1e-12)
    np.testing.assert_allclose(vecs[:, 0], [INV_SQRT2, INV_SQRT2], atol=1e-12)
    np.testing.assert_allclose(vecs[:, 1], [INV_SQRT2, -INV_SQRT2], atol=1e-12)


def test_random_matrices_satisfy_residual_orthonormality_trace():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(2, 12))
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2.0
        vals, vecs = symmetric_eigendecomposition(a)
        scale = max(1.0, float(np.abs(a).max()))
        assert float(np.abs(a @ vecs - vecs * vals[None, :]).max()) < 1e-8 * scale
        assert float(np.abs(vecs.T @ vecs - np.eye(n)).max()) < 1e-9
        trace = float(np.trace(a))
        assert abs(float(vals.sum()) - trace) <= 1e-6 * max(1.0, abs(trace))
        assert (np.diff(vals) <= 1e-12).all()


def test_sign_convention_largest_entry_positive():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((6, 6))
    a = (a + a.T) / 2.0
    _, vecs = symmetric_eigendecomposition(a)
    for j in range(6):
        col = vecs[:, j]
        assert col[int(np.argmax(np.abs(col)))] > 0


def test_non_symmetric_rejected():
    with pytest.raises(NonSymmetricError):
        symmetric_eigendecomposition(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_non_square_rejected():
    with pytest.raises(DimensionError):
        symmetric_eigendecomposition(np.zeros((2, 3)))


def test_sweep_budget_exhaustion():
    with pytest.raises(NonConvergenceError):
        symmetric_eigendecomposition(np.array([[0.0, 1.0], [1.0, 0.0]]), max_sweeps=0)


def test_fit_toy_two_columns():
    model = fit_eigenmodel(np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_allclose(model.mean, [0.5, 0.5])
    np.testing.assert_allclose(model.eigenvalues, [1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(model.eigenvectors[:, 0], [INV_SQRT2, -INV_SQRT2], atol=1e-12)


def test_identical_columns_degenerate_to_standard_basis():
    data = np.tile(np.array([[3.0], [7.0], [1.0]]), (1, 5))
    model = fit_eigenmodel(data)
    np.testing.assert_allclose(model.eigenvalues, np.zeros(3))
    np.testing.assert_allclose(model.eigenvectors, np.eye(3))


def test_negative_roundoff_eigenvalues_clamped():
    rng = np.random.default_rng(2)
    model = fit_eigenmodel(rng.standard_normal((10, 4)))  # rank-deficient scatter
    assert (model.eigenvalues >= 0.0).all()


def test_gram_matrix_near_identity_full_basis():
    rng = np.random.default_rng(1)
    data = rng.integers(0, 340, size=(76, 500)).astype(float)
    model = fit_eigenmodel(data)
    gram = model.eigenvectors.T @ model.eigenvectors
    assert float(np.abs(gram - np.eye(76)).max()) < 1e-9


def test_projection_identity_basis_returns_input():
    model = EigenModel(mean=np.zeros(3), eigenvalues=np.ones(3), eigenvectors=np.eye(3))
    np.testing.assert_array_equal(model.project([4.0, 5.0, 6.0]), [4.0, 5.0, 6.0])


def test_projection_toy_inner_products():
    model = fit_eigenmodel(np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_allclose(model.project([1.0, 0.0]), [INV_SQRT2, INV_SQRT2], atol=1e-12)


def test_projection_is_isometry_for_full_basis():
    rng = np.random.default_rng(4)
    model = fit_eigenmodel(rng.standard_normal((12, 60)))
    for _ in range(10):
        t = rng.standard_normal(12)
        z = model.project(t)
        assert abs(np.linalg.norm(z) - np.linalg.norm(t)) < 1e-9


def test_project_then_reconstruct_full_rank():
    rng = np.random.default_rng(6)
    data = rng.standard_normal((8, 40)) * 5.0
    model = fit_eigenmodel(data)
    rows = data.T
    recon = model.project_rows(rows) @ model.eigenvectors.T
    np.testing.assert_allclose(recon, rows, rtol=1e-6, atol=1e-9)


def test_scaling_scatter_leaves_basis_unchanged():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((7, 7))
    a = (a + a.T) / 2.0 + 7 * np.eye(7)
    vals1, vecs1 = symmetric_eigendecomposition(a)
    vals2, vecs2 = symmetric_eigendecomposition(3.7 * a)
    np.testing.assert_allclose(vecs1, vecs2, atol=1e-9)
    np.testing.assert_allclose(vals2, 3.7 * vals1, rtol=1e-9)


def test_reduced_component_count():
    rng = np.random.default_rng(12)
    model = fit_eigenmodel(rng.standard_normal((10, 50)), n_components=4)
    assert model.eigenvectors.shape == (10, 4)
    assert model.eigenvalues.shape == (4,)
    assert model.project_rows(rng.standard_normal((3, 10))).shape == (3, 4)


def test_centered_projection_option():
    rng = np.random.default_rng(13)
    data = rng.standard_normal((5, 30)) + 10.0
    raw = fit_eigenmodel(data)
    centered = fit_eigenmodel(data, center_before_project=True)
    t = rng.standard_normal(5)
    np.testing.assert_allclose(centered.project(t), raw.project(t - raw.mean), atol=1e-12)


def test_project_dimension_mismatch():
    model = fit_eigenmodel(np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(DimensionError):
        model.project([1.0, 2.0, 3.0])


def test_empty_matrix_rejected():
    with pytest.raises(NotEnoughDataError):
        fit_eigenmodel(np.zeros((3, 0)))


def test_projector_matches_functional_api():
    rng = np.random.default_rng(14)
    rows = rng.standard_normal((40, 6))
    projector = EigentraceProjector(n_components=3).fit(rows)
    reference = fit_eigenmodel(rows.T, n_components=3)
    np.testing.assert_allclose(projector.transform(rows), reference.project_rows(rows))
    assert projector.get_params() == {"n_components": 3, "center_before_project": False}
    projector.set_params(n_components=2)
    assert projector.n_components == 2
