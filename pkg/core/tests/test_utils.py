import numpy as np
from django.test import SimpleTestCase

from core.utils import argmax_rows, config_digest, discounted_sum, parse_param, tied_argmax


class TieBreakingTests(SimpleTestCase):
    def test_ties_go_to_the_lowest_index(self):
        self.assertEqual(tied_argmax([1.0, 1.0 + 1e-12, 0.0], tol=1e-9), 0)
        self.assertEqual(tied_argmax([0.0, 2.0, 1.0], tol=1e-9), 1)
        self.assertEqual(argmax_rows([[1.0, 1.0], [0.0, 2.0]], tol=1e-9).tolist(), [0, 1])

    def test_rng_draws_among_ties_only(self):
        rng = np.random.default_rng(7)
        picks = {tied_argmax([1.0, 0.0, 1.0], tol=1e-9, rng=rng) for _ in range(50)}
        self.assertEqual(picks, {0, 2})


class DiscountedSumTests(SimpleTestCase):
    def test_discounting(self):
        self.assertAlmostEqual(discounted_sum([1.0, 1.0, 1.0], 0.5), 1.75)
        self.assertAlmostEqual(discounted_sum([0.0, 0.8], 1.0), 0.8)
        self.assertEqual(discounted_sum([], 0.9), 0.0)


class ParamTests(SimpleTestCase):
    def test_casts(self):
        self.assertEqual(parse_param('width=3'), ('width', 3))
        self.assertEqual(parse_param('alpha=0.5'), ('alpha', 0.5))
        self.assertEqual(parse_param('p-max = 1'), ('p_max', 1))
        self.assertEqual(parse_param('flag=True'), ('flag', True))
        self.assertEqual(parse_param('name=ab'), ('name', 'ab'))
        with self.assertRaises(ValueError):
            parse_param('alpha')

    def test_digest_ignores_key_order(self):
        self.assertEqual(config_digest({'a': 1, 'b': 2}), config_digest({'b': 2, 'a': 1}))
        self.assertNotEqual(config_digest({'a': 1}), config_digest({'a': 2}))
