import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.exceptions import DomainError, InvalidMeasureError
from services.dimension.services import DimensionService
from services.expansions.services import BetaSystem
from services.language.services import LanguageService
from .services import CylinderMeasure, MarkovMeasure, MarkovService, binary_words


def bernoulli(max_order, q=0.5):
    """Cylinder masses of the Bernoulli(q) measure, q the probability of 0"""
    mass = {}
    for length in range(max_order + 1):
        for w in binary_words(length):
            mass[w] = q ** w.count('0') * (1 - q) ** w.count('1')
    return CylinderMeasure(max_order=max_order, mass=mass)


class PhiTest(SimpleTestCase):
    """Test cases for phi(x) = -x log x"""

    def test_phi_examples(self):
        """phi vanishes at 0 and 1 and peaks at 1/e"""
        self.assertEqual(MarkovService.phi(0.0), 0.0)
        self.assertEqual(MarkovService.phi(1.0), 0.0)
        self.assertAlmostEqual(MarkovService.phi(1 / math.e), 1 / math.e, places=15)
        self.assertAlmostEqual(MarkovService.phi(0.5), 0.5 * math.log(2), places=15)

    def test_phi_negative(self):
        """Negative arguments are outside the domain"""
        with self.assertRaises(DomainError):
            MarkovService.phi(-0.1)

    def test_phi_concave(self):
        """phi(t x + (1-t) y) >= t phi(x) + (1-t) phi(y) on random samples"""
        rng = np.random.default_rng(7)
        for x, y, t in rng.random((10000, 3)):
            mixed = MarkovService.phi(t * x + (1 - t) * y)
            self.assertGreaterEqual(mixed, t * MarkovService.phi(x) + (1 - t) * MarkovService.phi(y) - 1e-15)


class CylinderMeasureTest(SimpleTestCase):
    """Test cases for validation and Markovization of cylinder measures"""

    def test_bernoulli_is_valid(self):
        """Bernoulli(1/2) up to length 4 passes on the full 2-shift"""
        diagnostics = MarkovService.validate_cylinder_measure(bernoulli(4), BetaSystem.integer(2))
        self.assertTrue(diagnostics.passes())
        self.assertEqual(diagnostics.support, 0.0)

    def test_mass_on_illegal_word(self):
        """Positive mass on 111 is flagged on the tribonacci shift"""
        diagnostics = MarkovService.validate_cylinder_measure(bernoulli(3), BetaSystem.pseudo_golden(3))
        self.assertFalse(diagnostics.passes())
        self.assertAlmostEqual(diagnostics.support, 0.125)
        self.assertEqual(diagnostics.worst_word, '111')

    def test_broken_additivity(self):
        """Masses of w0 and w1 must add up to the mass of w"""
        mass = dict(bernoulli(2).mass)
        mass['01'] = 0.3
        diagnostics = MarkovService.validate_cylinder_measure(
            CylinderMeasure(max_order=2, mass=mass), BetaSystem.integer(2)
        )
        self.assertAlmostEqual(diagnostics.additivity, 0.05)
        with self.assertRaises(InvalidMeasureError):
            MarkovService.markovize(CylinderMeasure(max_order=2, mass=mass), 2)

    def test_words_longer_than_order(self):
        """Masses beyond max_order are rejected"""
        with self.assertRaises(InvalidMeasureError):
            CylinderMeasure(max_order=1, mass={'01': 0.5})
        with self.assertRaises(DomainError):
            bernoulli(2)['010']

    def test_markovize_bernoulli(self):
        """Markovizing a Bernoulli measure gives constant transition rows"""
        mu = MarkovService.markovize(bernoulli(3, q=0.3), 3)
        self.assertEqual(mu.order, 2)
        for i, s in enumerate(mu.states):
            self.assertAlmostEqual(mu.P[i, mu.index(s[1:] + '0')], 0.3, places=14)
            self.assertAlmostEqual(mu.P[i, mu.index(s[1:] + '1')], 0.7, places=14)
        self.assertAlmostEqual(MarkovService.markov_entropy(mu), MarkovService.phi(0.3) + MarkovService.phi(0.7))

    def test_markovize_idempotent(self):
        """Markovizing the cylinder measure of a Markov measure gives it back"""
        rng = np.random.default_rng(11)
        mu = MarkovService.random_markov_measure(BetaSystem.pseudo_golden(3), 2, rng)
        again = MarkovService.markovize(MarkovService.cylinder_measure(mu, 3), 3)
        np.testing.assert_allclose(again.p, mu.p, atol=1e-14)
        for i, s in enumerate(mu.states):
            if mu.p[i] > 0:
                np.testing.assert_allclose(again.P[i], mu.P[i], atol=1e-12)

    def test_markovize_needs_order(self):
        """The measure must reach length m"""
        with self.assertRaises(InvalidMeasureError):
            MarkovService.markovize(bernoulli(2), 3)


class MarkovEntropyTest(SimpleTestCase):
    """Test cases for entropy and cylinder masses of Markov measures"""

    def setUp(self):
        self.rng = np.random.default_rng(2024)
        self.tribonacci = BetaSystem.pseudo_golden(3)

    def test_conditional_entropy_decreases(self):
        """H(x_n | x_1..x_{n-1}) is non-increasing in n"""
        mu = MarkovService.random_markov_measure(BetaSystem.pseudo_golden(4), 3, self.rng)
        cm = MarkovService.cylinder_measure(mu, 6)
        values = [MarkovService.conditional_entropy(cm, n) for n in range(1, 7)]
        for left, right in zip(values, values[1:]):
            self.assertLessEqual(right, left + 1e-12)
        self.assertAlmostEqual(values[-1], values[3], places=12)

    def test_entropy_matches_conditional_entropy(self):
        """Markov entropy equals the order-(k+1) conditional entropy"""
        for order in (1, 2, 3):
            mu = MarkovService.random_markov_measure(self.tribonacci, order, self.rng)
            cm = MarkovService.cylinder_measure(mu, order + 1)
            self.assertAlmostEqual(
                MarkovService.markov_entropy(mu), MarkovService.conditional_entropy(cm, order + 1), delta=1e-12
            )

    def test_extension_consistency(self):
        """mu[w0] + mu[w1] = mu[w] and mu[0w] + mu[1w] = mu[w]"""
        mu = MarkovService.random_markov_measure(BetaSystem.golden(), 2, self.rng)
        for length in range(1, 6):
            for w in binary_words(length):
                mass = MarkovService.measure_of_word(mu, w)
                self.assertAlmostEqual(
                    MarkovService.measure_of_word(mu, w + '0') + MarkovService.measure_of_word(mu, w + '1'),
                    mass, delta=1e-14)
                self.assertAlmostEqual(
                    MarkovService.measure_of_word(mu, '0' + w) + MarkovService.measure_of_word(mu, '1' + w),
                    mass, delta=1e-12)

    def test_random_measure_support(self):
        """Random measures put no mass on illegal words"""
        for _ in range(5):
            mu = MarkovService.random_markov_measure(self.tribonacci, 3, self.rng)
            cm = MarkovService.cylinder_measure(mu, 5)
            self.assertEqual(MarkovService.validate_cylinder_measure(cm, self.tribonacci).support, 0.0)
            self.assertLessEqual(mu.stationarity_residual, 1e-12)

    def test_random_measure_with_frequency(self):
        """The mixture hits the requested zero frequency"""
        for a in (0.4, 0.5, 0.8):
            mu = MarkovService.random_markov_measure_with_frequency(self.tribonacci, 2, a, self.rng)
            self.assertAlmostEqual(MarkovService.zero_frequency(mu), a, delta=1e-12)
            self.assertEqual(mu.problems(), [])

    def test_invalid_matrix(self):
        """A transition to a state that does not continue the source is rejected"""
        mu = MarkovMeasure(order=1, states=('0', '1'), p=np.array([0.5, 0.5]), P=np.eye(2))
        self.assertEqual(mu.problems(), [])
        bad = MarkovMeasure(order=2, states=('00', '01', '10', '11'), p=np.full(4, 0.25), P=np.eye(4))
        self.assertTrue(bad.problems())
        with self.assertRaises(InvalidMeasureError):
            MarkovService.markov_entropy(bad)


class MaxMeasureTest(SimpleTestCase):
    """Test cases for the entropy-maximizing measure"""

    def test_order_three_half(self):
        """m=3, a=1/2, y=(1/3): masses of the renewal table and entropy log(3)/2"""
        mu = MarkovService.build_max_measure(3, 0.5, [1 / 3])
        expected = {'00': 1 / 6, '01': 1 / 3, '10': 1 / 3, '11': 1 / 6,
                    '011': 1 / 6, '110': 1 / 6, '111': 0.0}
        for word, mass in expected.items():
            self.assertAlmostEqual(MarkovService.measure_of_word(mu, word), mass, delta=1e-14)
        self.assertAlmostEqual(MarkovService.markov_entropy(mu), 0.5493061443340549, delta=1e-12)
        self.assertAlmostEqual(MarkovService.zero_frequency(mu), 0.5, delta=1e-14)

    def test_all_zeros(self):
        """a=1 leaves only the zero sequence"""
        mu = MarkovService.build_max_measure(3, 1.0, [0.0])
        self.assertEqual(MarkovService.markov_entropy(mu), 0.0)
        self.assertAlmostEqual(MarkovService.zero_frequency(mu), 1.0)

    def test_outside_domain(self):
        """Points outside D_(m,a) are rejected"""
        with self.assertRaises(DomainError):
            MarkovService.build_max_measure(3, 0.5, [0.6])
        with self.assertRaises(DomainError):
            MarkovService.build_max_measure(4, 0.4, [0.1])

    def test_entropy_realizes_maximum(self):
        """Entropy equals f_a at the maximizer and the measure is stationary"""
        for m in (3, 4, 5):
            for a in np.linspace(1 / m + 0.03, 0.97, 10):
                optimum = DimensionService.maximize_f(m, a)
                mu = MarkovService.build_max_measure(m, a, optimum.argmax)
                self.assertAlmostEqual(
                    MarkovService.markov_entropy(mu), DimensionService.f_a_eval(m, a, optimum.argmax), delta=1e-10
                )
                self.assertLessEqual(mu.stationarity_residual, 1e-12)
                self.assertAlmostEqual(MarkovService.zero_frequency(mu), a, delta=1e-12)
                cm = MarkovService.cylinder_measure(mu, m + 1)
                diagnostics = MarkovService.validate_cylinder_measure(cm, BetaSystem.pseudo_golden(m))
                self.assertLessEqual(diagnostics.additivity, 1e-14)
                self.assertLessEqual(diagnostics.shift, 1e-12)
                self.assertEqual(diagnostics.support, 0.0)

    def test_order_four(self):
        """m=4, a=0.4 gives a stationary measure at the maximizer"""
        optimum = DimensionService.maximize_f(4, 0.4)
        mu = MarkovService.build_max_measure(4, 0.4, optimum.argmax)
        self.assertEqual(mu.order, 3)
        self.assertAlmostEqual(MarkovService.markov_entropy(mu) / BetaSystem.pseudo_golden(4).log_beta,
                               optimum.dim, delta=1e-10)

    def test_golden_parry_measure(self):
        """At the Parry frequency the golden measure has entropy log(golden)"""
        graph = LanguageService.build_follower_graph(BetaSystem.golden())
        a = DimensionService.parry_zero_frequency(graph)
        mu = MarkovService.build_max_measure(2, a, [])
        self.assertAlmostEqual(MarkovService.markov_entropy(mu), math.log((1 + math.sqrt(5)) / 2), delta=1e-9)

    def test_json_round_trip(self):
        """to_json / from_json reproduces p and P bit for bit"""
        optimum = DimensionService.maximize_f(4, 0.55)
        mu = MarkovService.build_max_measure(4, 0.55, optimum.argmax)
        again = MarkovMeasure.from_json(mu.to_json())
        self.assertEqual(again.states, mu.states)
        self.assertTrue(np.array_equal(again.p, mu.p))
        self.assertTrue(np.array_equal(again.P, mu.P))

    def test_malformed_json(self):
        """Bad JSON and bad schemas raise InvalidMeasureError"""
        for text in ('{', '[1, 2]', '{"order": 1}', json.dumps({'order': 1, 'states': ['0', '1'],
                                                               'p': {'0': 0.5, '1': 0.5},
                                                               'P': {'0': {'2': 1.0}}})):
            with self.assertRaises(InvalidMeasureError):
                MarkovMeasure.from_json(text)


class EntropyCommandTest(SimpleTestCase):
    """Test cases for the entropy command"""

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue().strip()

    def test_max_measure_entropy(self):
        """entropy --pseudo-golden 3 --a 0.5 prints log(3)/2"""
        output = json.loads(self.call('entropy', '--pseudo-golden', '3', '--a', '0.5', '--format', 'json'))
        self.assertAlmostEqual(output['entropy'], 0.549306144334, delta=1e-11)
        self.assertAlmostEqual(output['zero_frequency'], 0.5, delta=1e-11)
        self.assertEqual(output['order'], 2)

    def test_save_and_load(self):
        """A saved measure reads back with the same entropy"""
        with tempfile.TemporaryDirectory() as tmp:
            path = str(Path(tmp) / 'mu.json')
            first = self.call('entropy', '--pseudo-golden', '4', '--a', '0.6', '--save', path)
            second = self.call('entropy', '--measure', path)
            self.assertEqual(first, second)

    def test_missing_file(self):
        """An unreadable file is a usage error"""
        with self.assertRaises(CommandError) as ctx:
            self.call('entropy', '--measure', '/nonexistent/mu.json')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_invalid_measure_file(self):
        """A malformed measure exits with code 3"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.json'
            path.write_text('{"order": 1, "states": ["0", "1"], "p": {"0": 0.9, "1": 0.9}, "P": {}}')
            with self.assertRaises(CommandError) as ctx:
                self.call('entropy', '--measure', str(path))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_frequency_out_of_range(self):
        """a below 1/m exits with code 3"""
        with self.assertRaises(CommandError) as ctx:
            self.call('entropy', '--pseudo-golden', '3', '--a', '0.2')
        self.assertEqual(ctx.exception.returncode, 3)
