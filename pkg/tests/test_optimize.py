import numpy as np
import pytest

from scadkit.optimize import (
    minimize_projected,
    multistart_points,
    project_box_hyperplane,
    project_box_hyperplane_batch,
)


def _random_instance(rng, k):
    coeff = rng.uniform(0.05, 1.0, size=k)
    lo_total, hi_total = -coeff.sum(), coeff.sum()
    target = float(rng.uniform(lo_total, hi_total))
    return coeff, target


def test_projection_is_feasible_and_optimal():
    rng = np.random.default_rng(2)
    for _ in range(100):
        k = int(rng.integers(1, 9))
        coeff, target = _random_instance(rng, k)
        v = rng.uniform(-3.0, 3.0, size=k)
        u = project_box_hyperplane(v, coeff, target)
        assert np.all(u >= -1.0 - 1e-12) and np.all(u <= 1.0 + 1e-12)
        assert float(coeff @ u) == pytest.approx(target, abs=1e-10)
        # no feasible point is closer to v
        dist = float(np.sum((u - v) ** 2))
        for _ in range(40):
            w = rng.uniform(-1.0, 1.0, size=k)
            w = project_box_hyperplane(w, coeff, target)
            assert float(np.sum((w - v) ** 2)) >= dist - 1e-9


def test_projection_idempotent():
    rng = np.random.default_rng(3)
    coeff, target = _random_instance(rng, 6)
    u = project_box_hyperplane(rng.uniform(-2, 2, size=6), coeff, target)
    again = project_box_hyperplane(u, coeff, target)
    np.testing.assert_allclose(again, u, atol=1e-9)


def test_projection_batch_matches_single():
    rng = np.random.default_rng(4)
    coeff, target = _random_instance(rng, 5)
    vs = rng.uniform(-2.0, 2.0, size=(7, 5))
    batch = project_box_hyperplane_batch(vs, coeff, target)
    for row, v in zip(batch, vs):
        np.testing.assert_allclose(row, project_box_hyperplane(v, coeff, target), atol=1e-12)


def test_projection_rejects_infeasible_target():
    with pytest.raises(ValueError):
        project_box_hyperplane(np.zeros(3), np.ones(3), 4.0)
    with pytest.raises(ValueError):
        project_box_hyperplane(np.zeros(3), np.array([1.0, -1.0, 1.0]), 0.0)


def test_descent_solves_convex_quadratic():
    # min ||u - c||^2 over the polytope has the projection of c as solution
    rng = np.random.default_rng(5)
    for _ in range(10):
        k = int(rng.integers(2, 7))
        coeff, target = _random_instance(rng, k)
        c = rng.uniform(-2.0, 2.0, size=k)

        def f_only(u):
            return float(np.sum((u - c) ** 2))

        def f_grad(u):
            return f_only(u), 2.0 * (u - c)

        u, val = minimize_projected(f_only, f_grad, rng.uniform(-1, 1, size=k), coeff, target)
        expected = project_box_hyperplane(c, coeff, target)
        assert val == pytest.approx(float(np.sum((expected - c) ** 2)), abs=1e-6)
        np.testing.assert_allclose(u, expected, atol=1e-3)


def test_multistart_count_and_range():
    rng = np.random.default_rng(6)
    for k in (2, 4, 9, 40):
        starts = multistart_points(k, rng, n_starts=16)
        assert len(starts) >= 16
        assert all(s.shape == (k,) for s in starts)
        assert np.max(np.abs(np.array(starts))) <= 1.0
