import numpy as np
import pytest

from powerdag import objectives, simulate
from powerdag.errors import DomainError, ShapeError, SingularMatrixError

from oracles import finite_diff_grad, rel_err


class TestLeastSquares:
    def test_zero_b_value(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((40, 5))
        ev = objectives.least_squares(x, np.zeros((5, 5)))
        assert ev.value == pytest.approx(np.sum(x * x) / 80.0, rel=1e-14)

    def test_residual_equals_noise_at_truth(self):
        p = simulate.make_problem("er", 8, 2, "gauss", 500, 7)
        noise = p.data - p.data @ p.truth_weights
        ev = objectives.least_squares(p.data, p.truth_weights)
        assert ev.value == pytest.approx(np.sum(noise * noise) / 1000.0, rel=1e-12)

    def test_exact_zero_at_truth_for_zero_data(self):
        b = np.zeros((3, 3))
        b[0, 1] = 1.5
        ev = objectives.least_squares(np.zeros((10, 3)), b)
        assert ev.value == 0.0
        assert np.array_equal(ev.gradient, np.zeros((3, 3)))

    def test_gradient_finite_difference(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((50, 6))
        b = rng.uniform(-0.5, 0.5, size=(6, 6))
        ev = objectives.least_squares(x, b)
        fd = finite_diff_grad(lambda m: objectives.least_squares(x, m).value, b)
        assert rel_err(ev.gradient, fd) < 1e-6

    def test_unnormalized_matches_frobenius(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((20, 4))
        b = rng.uniform(-0.5, 0.5, size=(4, 4))
        ev = objectives.least_squares(x, b, normalized=False)
        resid = x - x @ b
        assert ev.value == pytest.approx(np.sum(resid * resid), rel=1e-14)

    def test_convexity_along_segments(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((30, 5))
        for _ in range(10):
            b1 = rng.uniform(-1, 1, size=(5, 5))
            b2 = rng.uniform(-1, 1, size=(5, 5))
            v1 = objectives.least_squares(x, b1).value
            v2 = objectives.least_squares(x, b2).value
            for t in (0.25, 0.5, 0.75):
                mid = objectives.least_squares(x, (1 - t) * b1 + t * b2).value
                assert mid <= (1 - t) * v1 + t * v2 + 1e-10

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            objectives.least_squares(np.ones((10, 3)), np.ones((4, 4)))


class TestGolemLikelihood:
    def test_zero_b_closed_form(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((40, 5))
        ev = objectives.golem_likelihood(x, np.zeros((5, 5)))
        rss = np.sum(x * x)
        assert ev.value == pytest.approx(2.5 * np.log(rss), rel=1e-14)
        expected = -5.0 * (x.T @ x) / rss + np.eye(5)
        assert rel_err(ev.gradient, expected) < 1e-13

    def test_scalar_closed_form(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((30, 1))
        beta = 0.4
        ev = objectives.golem_likelihood(x, np.array([[beta]]))
        expected = 0.5 * np.log(np.sum((x * (1 - beta)) ** 2)) - np.log(abs(1 - beta))
        assert ev.value == pytest.approx(expected, rel=1e-14)

    def test_gradient_finite_difference(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((50, 6))
        b = rng.uniform(-0.2, 0.2, size=(6, 6))
        ev = objectives.golem_likelihood(x, b)
        fd = finite_diff_grad(lambda m: objectives.golem_likelihood(x, m).value, b)
        assert rel_err(ev.gradient, fd) < 1e-5

    def test_singular_rejected(self):
        x = np.random.default_rng(8).standard_normal((10, 2))
        b = np.array([[0.0, 1.0], [1.0, 0.0]])  # I - b singular
        with pytest.raises(SingularMatrixError):
            objectives.golem_likelihood(x, b)

    def test_zero_residual_rejected(self):
        with pytest.raises(DomainError):
            objectives.golem_likelihood(np.zeros((10, 2)), np.zeros((2, 2)))
