import math
import sys
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from glkit.errors import TooLarge
from glkit.glpg import solution_bounds
from glkit.instance import gap_profile
from glkit.reference import brute_force_gl, check_feasible, closed_form_1set
from glkit.structures import MSet, StPathDag


class TestClosedForm(unittest.TestCase):
    def test_examples(self):
        self.assertAlmostEqual(closed_form_1set([3, 1, 2]).C, 1.5)
        self.assertAlmostEqual(closed_form_1set([5, 4]).C, 1.0)
        flat = closed_form_1set([2, 2, 2])
        self.assertEqual(flat.C, 0.0)
        self.assertEqual(flat.alpha, {})

    def test_allocation(self):
        res = closed_form_1set([3, 1, 2])
        np.testing.assert_allclose(res.w, [0, 0.25, 1.0])
        self.assertEqual(res.alpha, {(0, 1, 0): 0.25, (0, 0, 1): 1.0})
        self.assertEqual(res.method, "closed-form")


class TestCheckFeasible(unittest.TestCase):
    def test_tight_scaled_and_halved(self):
        s, theta = MSet(3, 1), [3, 1, 2]
        w = closed_form_1set(theta).w
        self.assertAlmostEqual(check_feasible(s, theta, w), 0.0, places=12)
        self.assertLess(check_feasible(s, theta, 2 * w), 0.0)
        halved = w.copy()
        halved[1] /= 2
        self.assertGreater(check_feasible(s, theta, halved), 0.0)

    def test_zero_rate_is_infinite(self):
        self.assertEqual(check_feasible(MSet(3, 1), [3, 1, 2], [1.0, 0.0, 1.0]), math.inf)

    def test_nothing_suboptimal(self):
        self.assertEqual(check_feasible(MSet(2, 1), [1, 1], [0.0, 0.0]), -math.inf)


class TestBruteForce(unittest.TestCase):
    def test_one_sets(self):
        res = brute_force_gl(MSet(3, 1), [3, 1, 2])
        self.assertAlmostEqual(res.C, 1.5, places=5)
        np.testing.assert_allclose(res.w[1:], [0.25, 1.0], rtol=1e-5)
        self.assertEqual(res.method, "slsqp")

    def test_mset(self):
        res = brute_force_gl(MSet(3, 2), [2, 2, 1])
        self.assertAlmostEqual(res.C, 1.0, places=5)
        self.assertAlmostEqual(res.w[2], 1.0, places=5)

    def test_dag(self):
        dag = StPathDag(4, ((0, 1), (0, 2), (1, 3), (2, 3)), 0, 3)
        res = brute_force_gl(dag, [2, 1, 2, 1])
        self.assertAlmostEqual(res.C, 1.0, places=5)
        self.assertAlmostEqual(res.alpha[(0, 1, 0, 1)], 0.5, places=5)

    def test_empty(self):
        res = brute_force_gl(MSet(2, 1), [1, 1])
        self.assertEqual(res.C, 0.0)
        self.assertEqual(res.method, "empty")

    def test_result_is_feasible(self):
        s, theta = MSet(4, 2), [4, 1, 3, 2]
        res = brute_force_gl(s, theta)
        self.assertLessEqual(check_feasible(s, theta, res.w), 1e-9)
        self.assertTrue(math.isfinite(res.kkt_residual))

    def test_matches_closed_form(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            d = int(rng.integers(2, 6))
            theta = rng.integers(1, 8, size=d)
            self.assertAlmostEqual(
                brute_force_gl(MSet(d, 1), theta).C, closed_form_1set(theta).C, places=5
            )

    def test_within_a_priori_bound(self):
        rng = np.random.default_rng(13)
        for d, m in ((4, 2), (5, 2), (4, 3)):
            theta = rng.integers(1, 5, size=d)
            res = brute_force_gl(MSet(d, m), theta)
            q_bound, _ = solution_bounds(m, d, float(np.max(theta)))
            self.assertLessEqual(res.C, q_bound)
            general = gap_profile(MSet(d, m), theta).general_bound(d)
            self.assertLessEqual(res.C, general + 1e-6)

    def test_cap(self):
        with self.assertRaises(TooLarge):
            brute_force_gl(MSet(12, 6), np.arange(1, 13))


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
