import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ContractViolationError, DomainError
from core.planners import (
    AtmPlanner,
    Decision,
    MlatmPlanner,
    PlannerConfig,
    RatmPlanner,
    SolvedModel,
    build_planner,
    planner_configs,
)
from core.ram_model import ActionPair, Belief
from environments.builders import build_ab, build_lucky_unlucky


def first_decision(model, name='ratm', **options):
    planner = build_planner(SolvedModel(model), PlannerConfig.from_name(name, **options))
    planner.reset()
    return planner.decide()


class PlannerConfigTests(SimpleTestCase):
    def test_names(self):
        config = PlannerConfig.from_name('MLATM-avg')
        self.assertEqual((config.kind, config.variant), ('mlatm', 'avg'))
        self.assertEqual(config.name, 'mlatm-avg')
        self.assertEqual(config.label, 'MLATM-avg')
        self.assertEqual(PlannerConfig.from_name('ratm').label, 'RATM')

    def test_invalid_configurations(self):
        for kwargs in (
            {'kind': 'pomdp'},
            {'kind': 'ratm', 'variant': 'avg'},
            {'kind': 'mlatm'},
            {'kind': 'atm', 'variant': 'opt'},
            {'kind': 'ratm', 'tie_break': 'coin'},
            {'kind': 'ratm', 'tie_break': 'ml_preferred'},
            {'kind': 'mlatm', 'variant': 'avg', 'ml_mv_mode': 'greedy'},
        ):
            with self.subTest(**kwargs):
                with self.assertRaises(DomainError):
                    PlannerConfig(**kwargs)

    def test_ml_preferred_falls_back_for_robust_planners(self):
        configs = planner_configs(['ratm', 'mlatm-opt', 'atm-avg'], tie_break='ml_preferred')
        self.assertEqual([c.tie_break for c in configs], ['lexicographic', 'ml_preferred', 'lexicographic'])

    def test_planner_classes(self):
        solved = SolvedModel(build_ab())
        self.assertIsInstance(build_planner(solved, 'ratm'), RatmPlanner)
        self.assertIsInstance(build_planner(solved, 'mlatm-pes'), MlatmPlanner)
        self.assertIsInstance(build_planner(solved, 'atm-avg'), AtmPlanner)
        self.assertIs(build_planner(solved, 'mlatm-avg').q, build_planner(solved, 'ratm').q)


class RatmPlannerTests(SimpleTestCase):
    def test_ab_measuring_value(self):
        for c in (0.0, 0.1, 0.3, 0.5):
            with self.subTest(c=c):
                decision = first_decision(build_ab(c))
                self.assertAlmostEqual(decision.mv_robust, 0.8 - 0.8 / 1.8 - c, delta=1e-9)
                self.assertEqual(decision.measure, c < 0.8 - 0.8 / 1.8)
                self.assertEqual(decision.control, 0)
                self.assertAlmostEqual(decision.control_q, 0.8)

    def test_ab_belief_after_skipping_the_measurement(self):
        planner = RatmPlanner(SolvedModel(build_ab(0.5)))
        planner.reset()
        decision = planner.decide()
        self.assertFalse(decision.measure)
        state = planner.advance(decision)
        self.assertAlmostEqual(state.robust_belief.prob(1), 1 / 1.8, delta=1e-9)
        self.assertAlmostEqual(state.robust_belief.prob(2), 0.8 / 1.8, delta=1e-9)
        self.assertIsNone(state.ml_belief)

    def test_measurement_resets_the_belief(self):
        planner = RatmPlanner(SolvedModel(build_ab(0.1)))
        planner.reset()
        decision = planner.decide()
        self.assertTrue(decision.measure)
        state = planner.advance(decision, observation=2)
        self.assertEqual(state.robust_belief, Belief.delta(2))
        self.assertEqual(planner.decide().control, 1)

    def test_uninformative_step_never_measures(self):
        planner = RatmPlanner(SolvedModel(build_ab(0.0)))
        planner.reset()
        planner.advance(Decision(ActionPair(0, False), 0.0))
        decision = planner.decide()
        self.assertFalse(decision.informative)
        self.assertAlmostEqual(decision.mv_robust, 0.0, delta=1e-9)
        self.assertFalse(decision.measure)

    def test_lucky_unlucky_measuring_window(self):
        for p, expected in ((0.1, False), (0.3, True), (0.5, True), (0.7, True), (0.9, False)):
            with self.subTest(p=p):
                decision = first_decision(build_lucky_unlucky(p, 0.2))
                self.assertAlmostEqual(decision.mv_robust, (1 - p) - max(1 - 2 * p, 0.0) - 0.2, delta=1e-9)
                self.assertEqual(decision.measure, expected)

    def test_protocol_violations(self):
        planner = RatmPlanner(SolvedModel(build_ab(0.1)))
        with self.assertRaises(ContractViolationError):
            planner.decide()
        planner.reset()
        decision = planner.decide()
        with self.assertRaises(ContractViolationError):
            planner.advance(decision)
        with self.assertRaises(ContractViolationError):
            planner.advance(Decision(ActionPair(0, False), 0.0), observation=1)

    def test_seeded_random_ties(self):
        solved = SolvedModel(build_ab(0.5))
        config = PlannerConfig(tie_break='seeded_random')

        def controls(seed):
            planner = RatmPlanner(solved, config)
            planner.reset(rng=np.random.default_rng(seed))
            return planner.decide().control

        picks = [controls(seed) for seed in range(20)]
        self.assertEqual(picks, [controls(seed) for seed in range(20)])
        self.assertEqual(set(picks), {0, 1})
        self.assertEqual(first_decision(build_ab(0.5)).control, 0)

    def test_clone_starts_fresh(self):
        solved = SolvedModel(build_ab(0.1))
        planner = build_planner(solved, 'mlatm-opt')
        planner.reset()
        planner.decide()
        copy = planner.clone()
        self.assertIsInstance(copy, MlatmPlanner)
        self.assertIs(copy.solved, solved)
        self.assertEqual(copy.config, planner.config)
        self.assertIsNone(copy.state)
        copy.reset()
        self.assertEqual(copy.decide().action_pair, ActionPair(0, True))


class MlatmPlannerTests(SimpleTestCase):
    def test_lenient_measuring_values(self):
        model = build_lucky_unlucky(1.0, 0.2)
        for variant, expected in (('avg', 0.3), ('opt', 0.8), ('pes', -0.2)):
            with self.subTest(variant=variant):
                decision = first_decision(model, f'mlatm-{variant}')
                self.assertAlmostEqual(decision.mv_ml, expected, delta=1e-9)
                self.assertAlmostEqual(decision.mv_robust, -0.2, delta=1e-9)
                self.assertEqual(decision.measure, expected >= 0)

    def test_measures_whenever_the_robust_planner_does(self):
        for p in np.linspace(0.05, 0.95, 10):
            model = build_lucky_unlucky(float(p), 0.2)
            solved = SolvedModel(model)
            robust = build_planner(solved, 'ratm')
            robust.reset()
            for variant in ('avg', 'opt', 'pes'):
                lenient = build_planner(solved, f'mlatm-{variant}')
                lenient.reset()
                decision = lenient.decide()
                if robust.decide().measure:
                    self.assertTrue(decision.measure)
                self.assertEqual(decision.control, robust.decide().control)

    def test_ml_belief_follows_the_lenient_model(self):
        planner = build_planner(SolvedModel(build_ab(0.6)), 'mlatm-avg')
        planner.reset()
        state = planner.advance(planner.decide())
        self.assertEqual(state.ml_belief, Belief.from_mapping({1: 0.5, 2: 0.5}))

    def test_ml_preferred_breaks_robust_ties(self):
        solved = SolvedModel(build_ab(0.5))
        controls = {}
        for config in (PlannerConfig(), PlannerConfig('mlatm', 'opt', tie_break='ml_preferred')):
            planner = build_planner(solved, config)
            planner.reset()
            first = planner.decide()
            self.assertFalse(first.measure)
            planner.advance(first)
            controls[config.name] = planner.decide().control
        self.assertEqual(controls, {'ratm': 0, 'mlatm-opt': 1})

    def test_random_ties_reach_the_lenient_measuring_value(self):
        solved = SolvedModel(build_ab(0.5))
        measured = {}
        for mode in ('seeded_random', 'lexicographic'):
            planner = build_planner(solved, PlannerConfig('mlatm', 'pes', tie_break=mode))
            measured[mode] = 0
            for seed in range(40):
                planner.reset(rng=np.random.default_rng(seed))
                first = planner.decide()
                self.assertEqual(first.measure, first.robust_next == 1)
                if first.measure:
                    self.assertAlmostEqual(first.mv_ml, 0.3, delta=1e-9)
                    measured[mode] += 1
                    continue
                self.assertAlmostEqual(first.mv_ml, -0.5, delta=1e-9)
                planner.advance(first)
                self.assertEqual(planner.decide().control, first.robust_next)
        self.assertEqual(measured['lexicographic'], 0)
        self.assertTrue(5 <= measured['seeded_random'] <= 35, measured)

    def test_measured_step_drops_the_predicted_action(self):
        planner = build_planner(SolvedModel(build_ab(0.1)), PlannerConfig('mlatm', 'avg', tie_break='seeded_random'))
        planner.reset(rng=np.random.default_rng(0))
        first = planner.decide()
        self.assertTrue(first.measure)
        planner.advance(first, observation=2)
        self.assertEqual(planner.decide().control, 1)


class AtmPlannerTests(SimpleTestCase):
    def test_average_model_measuring_value(self):
        for c in (0.0, 0.25):
            with self.subTest(c=c):
                decision = first_decision(build_ab(c), 'atm-avg')
                self.assertAlmostEqual(decision.mv_robust, 0.4 - c, delta=1e-9)
                self.assertAlmostEqual(decision.control_q, 0.9)
                self.assertTrue(decision.measure)

    def test_pessimistic_baseline_shares_the_robust_rows(self):
        solved = SolvedModel(build_ab(0.1))
        planner = build_planner(solved, 'atm-pes')
        self.assertIs(solved.atm_solution('pes'), solved.atm_solution('pes'))
        planner.reset()
        self.assertAlmostEqual(planner.decide().control_q, 0.8)
