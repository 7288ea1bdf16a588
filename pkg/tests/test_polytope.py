import sys
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from glkit.errors import DivisionGuard
from glkit.instance import gap_profile, make_theta
from glkit.polytope import Projector, feasible_region, project, reduce, violation, violation_gradient
from glkit.structures import (
    BipartiteMatching,
    Explicit,
    MSet,
    StPathDag,
    enumerate_decisions,
    hull,
)


def two_path_dag() -> StPathDag:
    return StPathDag(4, ((0, 1), (0, 2), (1, 3), (2, 3)), 0, 3)


def reduced(structure, theta, drop_redundant=False):
    theta = make_theta(theta)
    rep = hull(structure, drop_redundant=drop_redundant)
    return reduce(rep, theta, gap_profile(structure, theta))


PROJECTION_CASES = (
    (two_path_dag(), [2, 1, 2, 1]),
    (MSet(4, 2), [4, 1, 3, 2]),
    (BipartiteMatching(2, 3, ((0, 0), (0, 1), (1, 1), (1, 2))), [3, 1, 2, 2]),
    (BipartiteMatching(2, 2, ((0, 0), (0, 1), (1, 0), (1, 1)), perfect=True), [3, 1, 1, 2]),
    (Explicit(((1, 1, 0, 0), (0, 1, 1, 0), (0, 0, 1, 1), (1, 0, 1, 0))), [1, 2, 3, 1]),
)


class TestReduce(unittest.TestCase):
    def test_one_set_compact(self):
        problem = reduced(MSet(3, 1), [3, 1, 2], drop_redundant=True)
        np.testing.assert_array_equal(problem.M, np.zeros((1, 3)))
        np.testing.assert_allclose(problem.q, [0, 2, 1])
        self.assertAlmostEqual(problem.w_floor, 1 / 9)
        self.assertEqual(problem.I, (1, 2))

    def test_dag(self):
        problem = reduced(two_path_dag(), [2, 1, 2, 1])
        np.testing.assert_allclose(problem.q, [2, 3, -2, -1])
        self.assertAlmostEqual(problem.w_floor, 1 / 16)
        for x, delta in (((1, 0, 1, 0), 0.0), ((0, 1, 0, 1), 2.0)):
            z = problem.hull.lift(x)
            self.assertAlmostEqual(float(problem.q @ z), delta)
            np.testing.assert_allclose(problem.M @ z, 0.0, atol=1e-12)

    def test_identity_holds_on_every_decision(self):
        cases = [
            (MSet(4, 2), [4, 1, 3, 2]),
            (BipartiteMatching(2, 2, ((0, 0), (0, 1), (1, 0), (1, 1))), [3, 1, 1, 2]),
            (BipartiteMatching(2, 2, ((0, 0), (0, 1), (1, 0), (1, 1)), perfect=True), [3, 1, 1, 2]),
            (Explicit(((1, 1, 0), (0, 1, 1), (1, 0, 1))), [1, 2, 3]),
            (two_path_dag(), [1, 3, 2, 2]),
        ]
        for structure, theta in cases:
            decisions = enumerate_decisions(structure)
            problem = reduced(structure, theta)
            # reduce() itself raises IdentityViolation on a mismatch
            reduce(problem.hull, make_theta(theta), problem.gaps, sample=decisions)
            values = np.asarray(theta, dtype=float)
            opt = max(float(values @ x) for x in decisions)
            for x in decisions:
                z = problem.hull.lift(x)
                self.assertAlmostEqual(float(problem.q @ z), opt - float(values @ x), places=9)
                self.assertLessEqual(float(np.max(np.abs(problem.M @ z))), 1e-9)


class TestProjection(unittest.TestCase):
    def test_clamp(self):
        s = MSet(3, 1)
        problem = reduced(s, [3, 1, 2], drop_redundant=True)
        region = feasible_region(problem, s)
        projector = Projector(region)
        self.assertTrue(projector.is_clamp)
        np.testing.assert_allclose(project(region, [-1, 0.05, 0.5], projector), [0, 1 / 9, 0.5])

    def test_normal_offsets_project_back(self):
        dag = two_path_dag()
        problem = reduced(dag, [2, 1, 2, 1])
        region = feasible_region(problem, dag)
        w0 = region.interior
        self.assertTrue(np.all(w0 > region.lower))
        y = w0 + problem.M.T @ np.array([0.1, -0.2, 0.3])
        np.testing.assert_allclose(project(region, y), w0, atol=1e-9)

    def test_interior_is_feasible(self):
        for structure, theta in ((two_path_dag(), [2, 1, 2, 1]), (MSet(4, 2), [4, 1, 3, 2])):
            problem = reduced(structure, theta)
            region = feasible_region(problem, structure)
            self.assertLessEqual(float(np.max(np.abs(region.M @ region.interior))), 1e-12)
            self.assertTrue(np.all(region.interior >= region.lower))

    def test_random_points(self):
        rng = np.random.default_rng(1)
        for structure, theta in PROJECTION_CASES:
            problem = reduced(structure, theta)
            region = feasible_region(problem, structure)
            projector = Projector(region)
            w0 = region.interior
            for _ in range(500):
                y = rng.normal(scale=1.0, size=region.d_lifted)
                y2 = rng.normal(scale=1.0, size=region.d_lifted)
                w = projector.project(y)
                w2 = projector.project(y2)
                self.assertLessEqual(float(np.max(np.abs(region.M @ w))), 1e-9, structure)
                self.assertTrue(np.all(w >= region.lower - 1e-9), structure)
                np.testing.assert_allclose(projector.project(w), w, atol=1e-9)
                self.assertLessEqual(
                    float(np.linalg.norm(w - w2)), float(np.linalg.norm(y - y2)) + 1e-6
                )
                # optimality: no feasible point (here the interior) is closer than w along its ray
                for t in (0.1, 0.5):
                    mix = (1 - t) * w + t * w0
                    self.assertLessEqual(
                        float(np.linalg.norm(w - y)), float(np.linalg.norm(mix - y)) + 1e-7
                    )

    def test_barrier_agrees_with_active_set(self):
        rng = np.random.default_rng(2)
        for structure, theta in PROJECTION_CASES + ((MSet(3, 2), [2, 2, 1]),):
            problem = reduced(structure, theta)
            region = feasible_region(problem, structure)
            fast, slow = Projector(region), Projector(region, method="barrier")
            for scale in (1.0, 100.0):
                for _ in range(10):
                    y = rng.normal(scale=scale, size=region.d_lifted)
                    np.testing.assert_allclose(
                        fast.project(y), slow.project(y), atol=1e-6 * max(1.0, scale)
                    )
            self.assertGreater(slow.calls["barrier"], 0)

    def test_tangent_is_orthogonal_to_rows(self):
        dag = two_path_dag()
        problem = reduced(dag, [2, 1, 2, 1])
        projector = Projector(feasible_region(problem, dag))
        g = projector.tangent([1.0, -2.0, 0.5, 3.0])
        np.testing.assert_allclose(problem.M @ g, 0.0, atol=1e-12)


class TestViolation(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(violation([1, 0.25, 1], [0, 1, 0], [1, 2], 2), 0.0)
        self.assertEqual(violation([1, 0.25, 1], [1, 0, 0], [1, 2], 3), -9.0)
        self.assertEqual(violation([1, 1, 1 / 16], [0, 1, 1], [2], 1), 15.0)

    def test_division_guard(self):
        with self.assertRaises(DivisionGuard):
            violation([1, 0, 1], [0, 1, 0], [1], 1)
        # a zero rate outside the decision's support is fine
        self.assertEqual(violation([1, 0, 1], [1, 0, 0], [1], 1), -1.0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        h = 1e-6
        for _ in range(20):
            w = rng.uniform(0.5, 2.0, size=5)
            x = rng.integers(0, 2, size=5)
            I = [i for i in range(5) if rng.random() < 0.6]
            grad = violation_gradient(w, x, I)
            for j in range(5):
                e = np.zeros(5)
                e[j] = h
                numeric = (violation(w + e, x, I, 1.0) - violation(w - e, x, I, 1.0)) / (2 * h)
                self.assertAlmostEqual(grad[j], numeric, places=5)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
