import logging
import math
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from glkit.config import ENUM_CAP_ENV, Settings, default_settings, load_settings
from glkit.errors import NonPositiveEntry
from glkit.instance import (
    discretize,
    gap,
    gap_profile,
    inflate_discretized_solution,
    inflation_factor,
    make_theta,
    suboptimal_items,
)
from glkit.structures import MSet, StPathDag, decision_matrix


class TestGaps(unittest.TestCase):
    def test_one_set(self):
        s, theta = MSet(3, 1), make_theta([3, 1, 2])
        profile = gap_profile(s, theta)
        self.assertEqual(tuple(profile.x_star), (1, 0, 0))
        self.assertEqual(profile.I, (1, 2))
        self.assertEqual(gap(profile, theta, [0, 1, 0]), 2.0)
        self.assertEqual(profile.delta_min, 1.0)
        self.assertEqual(profile.delta_max, 2.0)

    def test_all_optimal(self):
        profile = gap_profile(MSet(2, 1), make_theta([1, 1]))
        self.assertEqual(profile.I, ())
        self.assertEqual(profile.delta_max, 0.0)
        self.assertTrue(math.isinf(profile.delta_min))
        self.assertEqual(profile.general_bound(2), 0.0)

    def test_mset_tie_at_the_top(self):
        s, theta = MSet(3, 2), make_theta([2, 2, 1])
        profile = gap_profile(s, theta)
        self.assertEqual(suboptimal_items(s, theta), (2,))
        self.assertEqual(gap(profile, theta, [1, 0, 1]), 1.0)

    def test_dag(self):
        dag = StPathDag(4, ((0, 1), (0, 2), (1, 3), (2, 3)), 0, 3)
        theta = make_theta([2, 1, 2, 1])
        profile = gap_profile(dag, theta)
        self.assertEqual(profile.I, (1, 3))
        self.assertEqual(profile.opt_value, 4.0)

    def test_gaps_sit_between_bounds(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            d = int(rng.integers(3, 7))
            s = MSet(d, int(rng.integers(1, d)))
            theta = make_theta(rng.integers(1, 6, size=d))
            profile = gap_profile(s, theta)
            X = decision_matrix(s)
            gaps = profile.opt_value - X @ theta.values
            positive = gaps[gaps > 0]
            if positive.size == 0:
                self.assertEqual(profile.I, ())
                continue
            self.assertEqual(profile.delta_min, positive.min())
            self.assertEqual(profile.delta_max, positive.max())
            self.assertGreaterEqual(profile.delta_min, 1.0)


class TestTheta(unittest.TestCase):
    def test_rejects_nonpositive(self):
        with self.assertRaises(NonPositiveEntry):
            make_theta([0, 1])

    def test_rejects_fractions(self):
        with self.assertRaises(ValueError):
            make_theta([1.5, 2])

    def test_norm(self):
        self.assertEqual(make_theta([3, 7, 2]).norm_inf, 7.0)


class TestDiscretize(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(tuple(discretize([0.5, 0.24], 0.1).values), (5, 3))
        self.assertEqual(tuple(discretize([1.01, 1.0], 0.5).values), (3, 2))

    def test_exact_multiples_do_not_round_up(self):
        self.assertEqual(tuple(discretize([1.1, 0.3], 0.1).values), (11, 3))

    def test_never_rounds_below_the_mean(self):
        # just above a multiple of ε: 10.000000005 must become 11
        self.assertEqual(tuple(discretize([1.0000000005], 0.1).values), (11,))
        rng = np.random.default_rng(17)
        for _ in range(200):
            real = rng.uniform(0.01, 5.0, size=4)
            eps = float(rng.uniform(0.001, 0.5))
            values = discretize(real, eps).values
            self.assertTrue(np.all(values * eps >= real * (1 - 1e-14)))
            self.assertTrue(np.all((values - 1) * eps < real))

    def test_rejects_nonpositive(self):
        with self.assertRaises(NonPositiveEntry):
            discretize([0.5, -0.1], 0.1)
        with self.assertRaises(ValueError):
            discretize([0.5], 0.0)

    def test_certification_flag(self):
        s = MSet(2, 1)
        fine = discretize([1.0, 0.5], 0.1, s)
        self.assertTrue(fine.certified)
        self.assertEqual(fine.epsilon, 0.1)
        np.testing.assert_allclose(fine.origin, [1.0, 0.5])
        with self.assertLogs("glkit.instance", level=logging.WARNING):
            coarse = discretize([1.0, 0.5], 0.4, s)
        self.assertFalse(coarse.certified)

    def test_gap_sandwich(self):
        # ε·Δ' − mε <= Δ <= ε·Δ' + mε for every decision
        rng = np.random.default_rng(9)
        s = MSet(5, 2)
        X = decision_matrix(s)
        for _ in range(20):
            real = rng.uniform(0.05, 1.0, size=5)
            eps = float(rng.uniform(0.01, 0.2))
            integer = discretize(real, eps).values
            real_gaps = np.max(X @ real) - X @ real
            int_gaps = np.max(X @ integer) - X @ integer
            self.assertTrue(np.all(np.abs(eps * int_gaps - real_gaps) <= 2 * eps + 1e-8))

    def test_inflation(self):
        self.assertAlmostEqual(inflation_factor(1, 0.25, 1.0), 2.25)
        np.testing.assert_allclose(inflate_discretized_solution([1.0, 1.0], 1, 0.25, 1.0), [2.25, 2.25])
        scaled = inflate_discretized_solution({(1, 0): 2.0}, 1, 0.25, 1.0)
        self.assertAlmostEqual(scaled[(1, 0)], 4.5)


class TestSettings(unittest.TestCase):
    def test_solver_defaults(self):
        settings = Settings()
        self.assertEqual(settings.max_iters, 200_000)
        self.assertEqual(settings.plateau_tol, 1e-7)
        self.assertEqual(settings.feasibility_tol, 1e-9)

    def test_yaml_overrides_and_unknown_keys(self):
        with tempfile.TemporaryDirectory() as td:
            path = Path(td) / "glkit.yaml"
            path.write_text("max_iters: 1234\nplateau_tol: 1e-4\nbogus: 1\n", encoding="utf-8")
            with self.assertLogs("glkit.config", level=logging.WARNING):
                settings = load_settings(path)
        self.assertEqual(settings.max_iters, 1234)
        self.assertEqual(settings.plateau_tol, 1e-4)

    def test_env_enum_cap(self):
        with mock.patch.dict(os.environ, {ENUM_CAP_ENV: "77"}):
            self.assertEqual(default_settings().enum_cap, 77)
            self.assertEqual(load_settings().enum_cap, 77)
        with mock.patch.dict(os.environ, {ENUM_CAP_ENV: "lots"}):
            self.assertEqual(default_settings().enum_cap, 1_000_000)

    def test_bad_bonus_rejected(self):
        with tempfile.TemporaryDirectory() as td:
            path = Path(td) / "glkit.yaml"
            path.write_text("cucb_bonus: huge\n", encoding="utf-8")
            with self.assertRaises(ValueError):
                load_settings(path)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
