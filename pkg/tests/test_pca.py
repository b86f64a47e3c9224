import numpy as np
import pytest

from adrisk.learners import make_rng, pca_project


class TestPCA:
    def test_points_on_a_line_have_one_component(self):
        t = np.linspace(-3, 3, 40)
        direction = np.array([1.0, 2.0, -1.0])
        X = np.outer(t, direction)
        with pytest.warns(UserWarning, match="rank"):
            result = pca_project(X, k=2)
        assert result.components.shape[0] == 1
        # All variance along the line; a second component would carry ~0.
        centered = X - X.mean(axis=0)
        residual = centered - result.coords @ result.components
        assert np.abs(residual).max() < 1e-9

    def test_matches_dense_eigendecomposition(self):
        rng = make_rng(21)
        X = rng.standard_normal((10, 5))
        result = pca_project(X, k=3, tol=1e-10)
        # Independent oracle: full symmetric eigendecomposition.
        Xc = X - X.mean(axis=0)
        cov = Xc.T @ Xc / (X.shape[0] - 1)
        vals, vecs = np.linalg.eigh(cov)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        assert np.allclose(result.explained_variance, vals[:3], atol=1e-5)
        for i in range(3):
            dot = abs(float(result.components[i] @ vecs[:, i]))
            assert dot == pytest.approx(1.0, abs=1e-5)
        for i in range(3):
            oracle_coords = Xc @ vecs[:, i]
            agree = np.allclose(result.coords[:, i], oracle_coords, atol=1e-5)
            flipped = np.allclose(result.coords[:, i], -oracle_coords, atol=1e-5)
            assert agree or flipped

    def test_components_orthonormal(self):
        rng = make_rng(22)
        X = rng.standard_normal((30, 8))
        result = pca_project(X, k=4)
        gram = result.components @ result.components.T
        assert np.abs(gram - np.eye(4)).max() < 1e-8

    def test_explained_variance_non_increasing(self):
        rng = make_rng(23)
        X = rng.standard_normal((40, 6)) * np.array([5, 3, 2, 1, 0.5, 0.1])
        result = pca_project(X, k=5)
        assert (np.diff(result.explained_variance) <= 1e-10).all()

    def test_deterministic(self):
        rng = make_rng(24)
        X = rng.standard_normal((20, 4))
        a = pca_project(X, k=2, seed=0)
        b = pca_project(X, k=2, seed=0)
        assert np.array_equal(a.coords, b.coords)

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            pca_project(np.ones((1, 3)), k=1)
