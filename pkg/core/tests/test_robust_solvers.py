import itertools
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.exceptions import InfeasibleRowError, SolverDivergenceError
from core.ram_model import ActionPair, Belief, RamMdp, UncertainRow, average_point_model
from core.robust_solvers import (
    WorstCaseRow,
    inner_best_expectation,
    inner_worst_expectation,
    robust_belief_update,
    value_iteration,
    worst_case_transition_nomeasure,
)
from environments.builders import build_ab, build_belief_dep, build_lucky_unlucky, build_snakemaze, snakemaze_point_model


def random_row(rng, k):
    p = rng.dirichlet(np.ones(k))
    lo = p * rng.uniform(0.0, 1.0, size=k)
    hi = np.minimum(1.0, p + (1.0 - p) * rng.uniform(0.0, 1.0, size=k))
    return UncertainRow(np.arange(k), lo, hi)


def interval_vertices(row):
    """Every point of the row polytope with at most one coordinate strictly inside its interval"""
    k = len(row)
    vertices = []
    for free in range(k):
        others = [i for i in range(k) if i != free]
        for bounds in itertools.product((0, 1), repeat=len(others)):
            p = np.empty(k)
            for i, upper in zip(others, bounds):
                p[i] = row.hi[i] if upper else row.lo[i]
            p[free] = 1.0 - p[others].sum()
            if row.lo[free] - 1e-12 <= p[free] <= row.hi[free] + 1e-12:
                vertices.append(p)
    return np.array(vertices)


class InnerProblemTests(SimpleTestCase):
    def setUp(self):
        self.row = UncertainRow.from_entries([(0, 0.1, 0.6), (1, 0.2, 0.5), (2, 0.1, 0.5)])
        self.values = np.array([1.0, 2.0, 3.0])

    def test_worst_case_fills_low_values_first(self):
        result = inner_worst_expectation(self.row, self.values)
        self.assertIsInstance(result, WorstCaseRow)
        for (s, p), expected in zip(result.distribution, (0.6, 0.3, 0.1)):
            self.assertAlmostEqual(p, expected)
        self.assertAlmostEqual(result.achieved_value, 1.5)

    def test_best_case_fills_high_values_first(self):
        result = inner_best_expectation(self.row, {0: 1.0, 1: 2.0, 2: 3.0})
        self.assertEqual(result.as_dict().keys(), {0, 1, 2})
        self.assertAlmostEqual(result.as_dict()[2], 0.5)
        self.assertAlmostEqual(result.achieved_value, 2.4)

    def test_ties_go_to_the_lower_successor(self):
        row = UncertainRow.from_entries([(4, 0.0, 1.0), (7, 0.0, 1.0)])
        result = inner_worst_expectation(row, np.zeros(8))
        self.assertEqual(result.distribution, ((4, 1.0),))

    def test_infeasible_row(self):
        with self.assertRaises(InfeasibleRowError):
            inner_worst_expectation(UncertainRow.from_entries([(0, 0.0, 0.3), (1, 0.0, 0.3)]), np.zeros(2))
        with self.assertRaises(InfeasibleRowError):
            inner_best_expectation(UncertainRow.from_entries([(0, 0.6, 1.0), (1, 0.6, 1.0)]), np.zeros(2))

    def test_greedy_matches_vertex_enumeration(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            row = random_row(rng, int(rng.integers(1, 5)))
            values = rng.normal(size=len(row))
            vertices = interval_vertices(row)
            expectations = vertices @ values
            worst = inner_worst_expectation(row, values)
            best = inner_best_expectation(row, values)
            self.assertAlmostEqual(worst.achieved_value, expectations.min(), delta=1e-9)
            self.assertAlmostEqual(best.achieved_value, expectations.max(), delta=1e-9)
            self.assertAlmostEqual(sum(p for _, p in worst.distribution), 1.0, delta=1e-9)


class ValueIterationTests(SimpleTestCase):
    def test_ab_robust_and_optimistic(self):
        m = build_ab()
        robust = value_iteration(m, 'robust')
        np.testing.assert_allclose(robust.values[0], [0.8, 0.8])
        np.testing.assert_allclose(robust.values[1], [0.8, 0.0])
        np.testing.assert_allclose(robust.values[2], [0.0, 1.0])
        np.testing.assert_allclose(robust.values[3], [0.0, 0.0])
        self.assertEqual(robust.rows.row(0, 0), [(1, 1.0)])

        optimistic = value_iteration(m, 'optimistic')
        np.testing.assert_allclose(optimistic.values[0], [1.0, 1.0])
        self.assertEqual(optimistic.rows.row(0, 0), [(2, 1.0)])

    def test_lucky_unlucky_robust_value(self):
        q = value_iteration(build_lucky_unlucky(0.3, 0.2), 'robust')
        np.testing.assert_allclose(q.values[0], [0.7, 0.7])
        np.testing.assert_allclose(q.state_values()[1:3], [0.0, 1.0])

    def test_robust_never_exceeds_optimistic(self):
        m = build_snakemaze(3, 3, alpha=0.6)
        robust = value_iteration(m, 'robust')
        optimistic = value_iteration(m, 'optimistic')
        self.assertTrue(np.all(robust.values <= optimistic.values + 1e-9))
        np.testing.assert_allclose(robust.rows.row_sums(), 1.0, atol=1e-9)
        self.assertEqual(robust.variant, 'robust')
        self.assertLess(robust.residuals[-1], 1e-8)

    def test_average_model_lies_between_robust_and_optimistic(self):
        for m in (build_snakemaze(3, 3, alpha=0.6), build_lucky_unlucky(0.4, 0.2), build_ab()):
            with self.subTest(model=m.name):
                robust = value_iteration(m, 'robust')
                average = value_iteration(m, average_point_model(m))
                optimistic = value_iteration(m, 'optimistic')
                self.assertTrue(np.all(robust.values <= average.values + 1e-6))
                self.assertTrue(np.all(average.values <= optimistic.values + 1e-6))

    def test_residuals_never_grow(self):
        m = build_snakemaze(3, 3, alpha=0.6)
        for variant in ('robust', 'optimistic', average_point_model(m)):
            residuals = np.array(value_iteration(m, variant).residuals)
            self.assertGreater(len(residuals), 1)
            self.assertTrue(np.all(np.diff(residuals) <= 1e-12))

    def test_exact_variant_on_a_point_model(self):
        base = snakemaze_point_model(3, 3)
        exact = value_iteration(build_snakemaze(3, 3, alpha=1.0), base)
        robust = value_iteration(build_snakemaze(3, 3, alpha=1.0), 'robust')
        self.assertEqual(exact.variant, 'exact')
        self.assertIs(exact.rows, base)
        np.testing.assert_allclose(exact.values, robust.values, atol=1e-7)

    def test_terminal_rows_are_zero(self):
        q = value_iteration(build_snakemaze(2, 2, alpha=0.5), 'robust')
        np.testing.assert_array_equal(q.values[-1], 0.0)

    def test_divergence(self):
        with self.assertLogs('solvers', level='ERROR'):
            with self.assertRaises(SolverDivergenceError) as ctx:
                value_iteration(build_snakemaze(3, 3), 'robust', max_iter=2)
        self.assertEqual(ctx.exception.iterations, 2)

    def test_unknown_variant(self):
        with self.assertRaises(ValueError):
            value_iteration(build_ab(), 'pessimistic')

    def test_csv_export(self):
        q = value_iteration(build_ab(), 'robust')
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'q.csv'
            q.to_csv(path)
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ['s', 'a', 'value'])
        self.assertEqual(len(frame), 8)
        self.assertAlmostEqual(frame.loc[(frame.s == 2) & (frame.a == 1), 'value'].item(), 1.0)
        self.assertEqual(q.greedy_actions().tolist()[:3], [0, 0, 1])


class NatureResponseTests(SimpleTestCase):
    def test_ab_worst_case_belief(self):
        m = build_ab()
        q = value_iteration(m, 'robust')
        b = Belief.delta(0)
        response = worst_case_transition_nomeasure(m, b, 0, q)
        self.assertAlmostEqual(response.game_value, 0.8 / 1.8, delta=1e-9)
        nxt = robust_belief_update(m, b, ActionPair(0, False), response.rows)
        self.assertAlmostEqual(nxt.prob(1), 1 / 1.8, delta=1e-9)
        self.assertAlmostEqual(nxt.prob(2), 0.8 / 1.8, delta=1e-9)

    def test_belief_dependent_mixture(self):
        m = build_belief_dep()
        q = value_iteration(m, 'robust')
        b = Belief.from_mapping({0: 0.2, 1: 0.8})
        response = worst_case_transition_nomeasure(m, b, 0, q)
        self.assertAlmostEqual(response.distribution(1)[2], 0.375, delta=1e-9)
        self.assertAlmostEqual(response.game_value, 0.5, delta=1e-9)
        np.testing.assert_allclose(response.response_values, [0.5, 0.5], atol=1e-9)

    def test_update_from_plain_mappings(self):
        m = build_ab()
        nxt = robust_belief_update(m, Belief.delta(0), ActionPair(1, False), {0: {1: 0.25, 2: 0.75}})
        self.assertEqual(nxt, Belief.from_mapping({1: 0.25, 2: 0.75}))

    def test_blind_value_never_exceeds_the_informed_value(self):
        m = build_snakemaze(3, 3, alpha=0.6)
        q = value_iteration(m, 'robust')
        V = q.state_values()
        rng = np.random.default_rng(5)
        for _ in range(30):
            support = rng.choice(m.num_states - 1, size=int(rng.integers(1, 4)), replace=False)
            b = Belief(np.sort(support), rng.uniform(0.1, 1.0, size=len(support)))
            for a in range(m.num_actions):
                response = worst_case_transition_nomeasure(m, b, a, q)
                informed = sum(
                    w * inner_worst_expectation(m.row(s, a), V).achieved_value for s, w in zip(b.support, b.probs)
                )
                self.assertLessEqual(response.game_value, informed + 1e-9)

    def test_degenerate_rows_take_the_fast_path(self):
        atm = snakemaze_point_model(2, 3).as_interval_model()
        q = value_iteration(atm, 'robust')
        response = worst_case_transition_nomeasure(atm, Belief.from_mapping({0: 0.5, 1: 0.5}), 0, q)
        self.assertEqual(response.rounds, 1)

    def test_saddle_point_on_random_instances(self):
        rng = np.random.default_rng(99)
        S, A = 6, 3
        for _ in range(200):
            support = rng.choice(S, size=int(rng.integers(1, 4)), replace=False)
            rows = {}
            for s in range(S):
                k = int(rng.integers(1, 5))
                succ = rng.choice(S, size=k, replace=False)
                r = random_row(rng, k)
                rows[(s, 0)] = list(zip(succ.tolist(), r.lo.tolist(), r.hi.tolist()))
                for a in range(1, A):
                    rows[(s, a)] = [(s, 1.0, 1.0)]
            m = RamMdp.from_rows(S, A, rows, np.zeros((S, A)))
            Q = rng.normal(size=(S, A))
            b = Belief(support, rng.uniform(0.1, 1.0, size=len(support)))

            response = worst_case_transition_nomeasure(m, b, 0, Q)
            chosen = sum(
                w * np.array([p * Q[sp] for sp, p in response.rows[s].distribution]).sum(axis=0)
                for s, w in zip(b.support, b.probs)
            )
            self.assertAlmostEqual(response.game_value, float(chosen.max()), delta=1e-6)

            sampled = np.zeros((1000, A))
            for s, w in zip(b.support, b.probs):
                row = m.row(s, 0)
                vertices = interval_vertices(row)
                mix = rng.dirichlet(np.ones(len(vertices)), size=1000)
                sampled += w * (mix @ vertices @ Q[row.successors])
            self.assertGreaterEqual(float(sampled.max(axis=1).min()), response.game_value - 1e-6)
