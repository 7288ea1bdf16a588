import sys
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from glkit.errors import InvalidStructure
from glkit.glpg import (
    EnumeratedOracle,
    SolveOverrides,
    SweepOracle,
    decompose,
    inflate,
    make_oracle,
    most_violated,
    schedule,
    solve,
    solve_discretized,
)
from glkit.instance import gap_profile, make_theta
from glkit.model import decision_key
from glkit.reference import brute_force_gl, check_feasible, closed_form_1set
from glkit.structures import (
    BipartiteMatching,
    Explicit,
    MSet,
    StPathDag,
    decision_matrix,
    enumerate_decisions,
    hull,
)

FAST = SolveOverrides(max_iters=20_000)


def two_path_dag() -> StPathDag:
    return StPathDag(4, ((0, 1), (0, 2), (1, 3), (2, 3)), 0, 3)


def random_dag(rng, n_nodes=5) -> StPathDag:
    # a chain plus random forward edges: every edge lies on some source-sink path
    edges = [(i, i + 1) for i in range(n_nodes - 1)]
    for _ in range(int(rng.integers(2, 5))):
        u = int(rng.integers(0, n_nodes - 1))
        v = int(rng.integers(u + 1, n_nodes))
        edges.append((u, v))
    return StPathDag(n_nodes, tuple(edges), 0, n_nodes - 1)


class TestSchedule(unittest.TestCase):
    def test_example(self):
        p = schedule(0.1, 1.0, 1, 3, 3, 1.0)
        self.assertAlmostEqual(p.delta2, 0.1 / 9)
        self.assertAlmostEqual(p.delta1, 0.049451, places=6)
        self.assertAlmostEqual(p.lam, 814.45, places=2)

    def test_monotone_in_delta(self):
        coarse = schedule(0.2, 1.0, 2, 4, 3, 5.0)
        fine = schedule(0.1, 1.0, 2, 4, 3, 5.0)
        self.assertGreaterEqual(fine.lam, 1.9 * coarse.lam)
        self.assertGreaterEqual(fine.T, 4 * coarse.T)

    def test_iterations(self):
        p = schedule(0.1, 1.0, 1, 2, 2, 1.0, max_iters=500)
        self.assertEqual(p.iterations, 500)
        theoretical = schedule(0.1, 1.0, 1, 2, 2, 1.0, max_iters=500, theoretical=True)
        self.assertGreaterEqual(theoretical.iterations, theoretical.T)
        self.assertAlmostEqual(theoretical.eta_for(theoretical.T), theoretical.eta)

    def test_rejects_bad_parameters(self):
        with self.assertRaises(ValueError):
            schedule(0.0, 1.0, 1, 3, 3, 1.0)
        with self.assertRaises(ValueError):
            schedule(0.1, 1.5, 1, 3, 3, 1.0)


class TestMostViolated(unittest.TestCase):
    def test_mset_tie_breaks_to_smaller_vector(self):
        x, score = most_violated(MSet(3, 2), [1, 1, 1 / 16], make_theta([2, 2, 1]), [2])
        self.assertEqual(tuple(x), (0, 1, 1))
        self.assertAlmostEqual(score, 15.0)

    def test_one_sets(self):
        x, score = most_violated(MSet(3, 1), [1, 1 / 9, 1 / 9], make_theta([3, 1, 2]), [1, 2])
        self.assertEqual(tuple(x), (0, 0, 1))
        self.assertAlmostEqual(score, 8.0)

    def test_feasible_point_scores_nonpositive(self):
        x, score = most_violated(MSet(3, 1), [1, 1, 4], make_theta([3, 1, 2]), [1, 2])
        self.assertLessEqual(score, 0.0)

    def test_sweep_matches_enumeration(self):
        rng = np.random.default_rng(6)
        for structure in (MSet(4, 2), two_path_dag(), MSet(5, 3)):
            X = decision_matrix(structure)
            for _ in range(15):
                theta = make_theta(rng.integers(1, 5, size=structure.d))
                profile = gap_profile(structure, theta)
                if not profile.I:
                    continue
                gaps = profile.opt_value - X @ theta.values
                dense = EnumeratedOracle(X, gaps, profile.I)
                sweep = SweepOracle(structure, theta.values, profile)
                for _ in range(5):
                    w = rng.uniform(0.05, 2.0, size=structure.d)
                    _, dense_score, _ = dense.most_violated(w)
                    x, sweep_score, delta = sweep.most_violated(w)
                    self.assertAlmostEqual(dense_score, sweep_score, places=9)
                    self.assertAlmostEqual(delta, profile.opt_value - float(theta.values @ x))

    def test_make_oracle_modes(self):
        s, theta = MSet(3, 1), make_theta([3, 1, 2])
        profile = gap_profile(s, theta)
        self.assertIsInstance(make_oracle(s, theta.values, profile), EnumeratedOracle)
        self.assertIsInstance(make_oracle(s, theta.values, profile, mode="sweep"), SweepOracle)
        with self.assertRaises(ValueError):
            make_oracle(s, theta.values, profile, mode="guess")


class TestSolve(unittest.TestCase):
    def test_one_sets(self):
        s, theta = MSet(3, 1), [3, 1, 2]
        out = solve(s, theta, delta=0.1, overrides=FAST)
        self.assertGreaterEqual(out.objective, 1.5 - 1e-9)
        self.assertLessEqual(out.objective, 1.6)
        self.assertLessEqual(out.certified_max_violation, 1e-9)
        self.assertLessEqual(abs(out.objective - out.objective_q), 1e-6)
        self.assertLessEqual(check_feasible(s, theta, out.rates()), 1e-9)
        members = {decision_key(x) for x in enumerate_decisions(s)}
        self.assertTrue(all(decision_key(x) in members for x in out.atoms))
        self.assertTrue(all(w > 0 for w in out.weights))
        self.assertGreaterEqual(out.w_bar_prime[1], 0.25 - 1e-9)
        self.assertGreaterEqual(out.w_bar_prime[2], 1.0 - 1e-9)

    def test_one_sets_with_sweep_oracle(self):
        out = solve(MSet(3, 1), [3, 1, 2], overrides=SolveOverrides(max_iters=20_000, oracle="sweep"))
        self.assertLessEqual(out.objective, 1.6)
        self.assertLessEqual(out.certified_max_violation, 1e-9)

    def test_mset(self):
        s = MSet(3, 2)
        out = solve(s, [2, 2, 1], overrides=FAST)
        self.assertGreaterEqual(out.objective, 1.0 - 1e-9)
        self.assertLessEqual(out.objective, 1.1)
        self.assertLessEqual(check_feasible(s, [2, 2, 1], out.rates()), 1e-9)
        self.assertLessEqual(len(out.atoms), hull(s, drop_redundant=True).d_lifted)

    def test_dag(self):
        dag = two_path_dag()
        out = solve(dag, [2, 1, 2, 1], overrides=FAST)
        self.assertGreaterEqual(out.objective, 1.0 - 1e-6)
        self.assertLessEqual(out.objective, 1.1)
        self.assertLessEqual(check_feasible(dag, [2, 1, 2, 1], out.rates()), 1e-9)

    def test_no_suboptimal_items(self):
        out = solve(MSet(2, 1), [1, 1])
        self.assertEqual(out.objective, 0.0)
        self.assertEqual(out.atoms, [])
        self.assertEqual(out.iterations, 0)

    def test_uncovered_coordinate_rejected(self):
        with self.assertRaises(InvalidStructure):
            solve(Explicit(((1, 1, 0), (1, 0, 0))), [1, 1, 1])

    def test_length_mismatch(self):
        with self.assertRaises(ValueError):
            solve(MSet(3, 1), [1, 2])

    def test_agrees_with_brute_force(self):
        rng = np.random.default_rng(11)
        structures = [MSet(4, 2), MSet(4, 1), two_path_dag(), MSet(5, 2), MSet(4, 3), MSet(3, 1)]
        for structure in structures:
            theta = rng.integers(1, 5, size=structure.d)
            brute = brute_force_gl(structure, theta)
            out = solve(structure, theta, delta=0.1, overrides=SolveOverrides(max_iters=50_000))
            self.assertLessEqual(out.objective, brute.C + 0.1, (structure, theta))
            # brute force is itself approximate; both answers are feasible
            self.assertGreaterEqual(out.objective, brute.C * (1 - 1e-4) - 1e-6, (structure, theta))
            self.assertLessEqual(check_feasible(structure, theta, out.rates()), 1e-9)

    def test_random_one_sets_match_closed_form(self):
        rng = np.random.default_rng(21)
        solved = 0
        while solved < 20:
            d = int(rng.integers(2, 9))
            theta = rng.integers(1, 10, size=d)
            if np.count_nonzero(theta == theta.max()) > 1:
                continue
            C = closed_form_1set(theta).C
            out = solve(MSet(d, 1), theta, delta=0.1, overrides=FAST)
            self.assertGreaterEqual(out.objective, C * (1 - 1e-9) - 1e-9, theta)
            self.assertLessEqual(out.objective, C + 0.1, theta)
            self.assertLessEqual(out.certified_max_violation, 1e-9, theta)
            self.assertLessEqual(check_feasible(MSet(d, 1), theta, out.rates()), 1e-9, theta)
            solved += 1

    def test_agrees_with_brute_force_beyond_msets(self):
        rng = np.random.default_rng(12)
        complete = tuple((u, v) for u in range(3) for v in range(3))
        structures = [
            BipartiteMatching(3, 3, complete),
            BipartiteMatching(3, 3, complete, perfect=True),
            BipartiteMatching(2, 3, ((0, 0), (0, 1), (1, 1), (1, 2))),
            random_dag(rng),
            random_dag(rng),
            Explicit(((1, 1, 0, 0), (0, 1, 1, 0), (0, 0, 1, 1), (1, 0, 1, 0))),
        ]
        for structure in structures:
            theta = rng.integers(1, 5, size=structure.d)
            brute = brute_force_gl(structure, theta)
            out = solve(structure, theta, delta=0.1, overrides=SolveOverrides(max_iters=50_000))
            self.assertLessEqual(out.objective, brute.C + 0.1, (structure, theta))
            self.assertGreaterEqual(out.objective, brute.C * (1 - 1e-4) - 1e-6, (structure, theta))
            self.assertLessEqual(out.certified_max_violation, 1e-9, (structure, theta))
            self.assertLessEqual(check_feasible(structure, theta, out.rates()), 1e-9)

    def test_explicit_list(self):
        s = Explicit(((1, 1, 0), (0, 1, 1), (1, 0, 1)))
        theta = [1, 2, 3]
        brute = brute_force_gl(s, theta)
        out = solve(s, theta, delta=0.1, overrides=FAST)
        self.assertLessEqual(out.objective, brute.C + 0.1)
        self.assertGreaterEqual(out.objective, brute.C * (1 - 1e-4) - 1e-6)
        self.assertLessEqual(out.certified_max_violation, 1e-9)
        self.assertLessEqual(check_feasible(s, theta, out.rates()), 1e-9)
        members = {decision_key(x) for x in enumerate_decisions(s)}
        self.assertTrue(all(decision_key(x) in members for x in out.atoms))
        self.assertTrue(all(w > 0 for w in out.weights))


class TestInflation(unittest.TestCase):
    def test_small_violation_is_cleared_by_one_plus_delta2(self):
        s, theta = MSet(3, 1), make_theta([3, 1, 2])
        delta2 = schedule(0.1, 1.0, 1, 3, 3, 1.0).delta2
        gaps = np.array([0.0, 2.0, 1.0])
        w = np.ones(3)
        w[1:] = 1.0 / (gaps[1:] ** 2 + delta2)
        self.assertAlmostEqual(check_feasible(s, theta, w), delta2)
        self.assertLessEqual(check_feasible(s, theta, inflate(w, 1.0 + delta2)), 1e-12)


class TestDecompose(unittest.TestCase):
    def test_mset_example(self):
        s = MSet(3, 2)
        rep = hull(s)
        w = np.array([1.0, 0.5, 0.5, 0.0, 0.5, 0.5])  # rates plus slack coordinates
        atoms, weights = decompose(s, rep, w)
        got = {decision_key(x): a for x, a in zip(atoms, weights)}
        self.assertEqual(set(got), {(1, 1, 0), (1, 0, 1)})
        self.assertAlmostEqual(got[(1, 1, 0)], 0.5)
        self.assertAlmostEqual(got[(1, 0, 1)], 0.5)

    def test_single_atom_and_zero(self):
        dag = two_path_dag()
        rep = hull(dag)
        atoms, weights = decompose(dag, rep, rep.lift([0, 1, 0, 1]))
        self.assertEqual([decision_key(x) for x in atoms], [(0, 1, 0, 1)])
        self.assertAlmostEqual(weights[0], 1.0)
        self.assertEqual(decompose(dag, rep, np.zeros(4)), ([], []))

    def test_random_cone_points(self):
        rng = np.random.default_rng(8)
        for structure in (MSet(4, 2), MSet(5, 3), two_path_dag()):
            rep = hull(structure)
            X = enumerate_decisions(structure)
            for _ in range(10):
                picks = rng.choice(len(X), size=min(len(X), 4), replace=False)
                w = sum(rng.uniform(0.1, 2.0) * rep.lift(X[k]) for k in picks)
                atoms, weights = decompose(structure, rep, w)
                self.assertLessEqual(len(atoms), rep.d_lifted)
                self.assertTrue(all(a > 0 for a in weights))
                rebuilt = sum(a * rep.lift(x) for x, a in zip(atoms, weights))
                np.testing.assert_allclose(rebuilt, w, atol=1e-6)


class TestDiscretized(unittest.TestCase):
    def test_real_means(self):
        s, real = MSet(2, 1), [1.0, 0.5]
        out = solve_discretized(s, real, epsilon=0.1, overrides=FAST)
        self.assertTrue(out.certified_discretization)
        self.assertEqual(out.meta["integer_theta"], [10, 5])
        self.assertLessEqual(out.certified_max_violation, 1e-9)
        self.assertLessEqual(check_feasible(s, real, out.rates()), 1e-9)
        brute = brute_force_gl(s, real)
        self.assertAlmostEqual(brute.C, 2.0, places=5)
        self.assertLessEqual(out.objective, brute.C * (1 + 4 * 0.1 / 0.5) ** 4)
        self.assertAlmostEqual(out.objective, out.objective_q, places=6)

    def test_coarse_step_is_flagged(self):
        out = solve_discretized(MSet(2, 1), [1.0, 0.5], epsilon=0.4, overrides=FAST)
        self.assertFalse(out.certified_discretization)


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
