import json
import math
from io import StringIO

import numpy as np
from scipy.optimize import minimize
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.exceptions import DomainError, UnsupportedBetaError
from services.expansions.services import BetaSystem
from services.language.services import LanguageService
from services.markov.services import MarkovService
from .services import DimensionService, FreqQuery, Method, parse_grid

GOLDEN = (1 + math.sqrt(5)) / 2


def interior_point(m, a):
    return np.asarray(DimensionService.interior_point(m, a))


def sweep(rng, count, margin=0.02, orders=(3, 4, 5, 6)):
    """(m, a) pairs with a uniform in (1/m + margin, 1 - margin)"""
    for _ in range(count):
        m = int(rng.choice(orders))
        yield m, float(rng.uniform(1 / m + margin, 1 - margin))


def random_point(m, a, rng):
    """A uniform-ish point of D_(m,a): gaps a*p for a Dirichlet p pushed to mean 1/a"""
    p = rng.dirichlet(np.ones(m))
    weights = np.arange(1, m + 1)
    mean, target = float(p @ weights), 1 / a
    end = np.zeros(m)
    if mean > target:
        end[0] = 1.0
        share = (mean - target) / (mean - 1)
    else:
        end[-1] = 1.0
        share = (target - mean) / (m - mean)
    gaps = a * ((1 - share) * p + share * end)
    return np.cumsum(gaps[::-1])[::-1][1:m - 1]


class PolytopeTest(SimpleTestCase):
    """Test cases for the domain D_(m,a) and the function f_a"""

    def test_domain_contains_examples(self):
        """(0.3) lies in D_(3,0.5); (0.1) does not"""
        self.assertTrue(DimensionService.domain_contains(3, 0.5, [0.3]))
        self.assertFalse(DimensionService.domain_contains(3, 0.5, [0.1]))
        self.assertFalse(DimensionService.domain_contains(3, 0.5, [0.3, 0.1]))
        self.assertTrue(DimensionService.domain_contains(2, 0.7, []))
        self.assertFalse(DimensionService.domain_contains(2, 0.3, []))

    def test_feasible_point_examples(self):
        """Witness points for both halves of the frequency range"""
        np.testing.assert_allclose(DimensionService.feasible_point(4, 0.3), (0.3, 0.2), atol=1e-15)
        np.testing.assert_allclose(DimensionService.feasible_point(3, 0.7), (0.3,), atol=1e-15)
        self.assertEqual(DimensionService.feasible_point(2, 0.5), ())
        for m in range(3, 8):
            for a in np.linspace(1 / m, 1, 13):
                self.assertTrue(DimensionService.domain_contains(m, a, DimensionService.feasible_point(m, a)))

    def test_feasible_point_empty(self):
        """Below 1/m the domain is empty"""
        with self.assertRaises(DomainError):
            DimensionService.feasible_point(3, 0.2)

    def test_vertices(self):
        """Order 3: the domain is the segment [(1-a)/2, min(a, 1-a)]"""
        vertices = sorted(v[0] for v in DimensionService.polytope_vertices(3, 0.4))
        self.assertAlmostEqual(vertices[0], 0.3, places=14)
        self.assertAlmostEqual(vertices[1], 0.4, places=14)

    def test_f_a_examples(self):
        """f_a(1/3) = log(3)/2 at m=3, a=1/2"""
        self.assertAlmostEqual(DimensionService.f_a_eval(3, 0.5, [1 / 3]), 0.5 * math.log(3), places=14)
        with self.assertRaises(DomainError):
            DimensionService.f_a_eval(3, 0.5, [0.1])

    def test_gradient_matches_finite_differences(self):
        """Central differences agree with the analytic gradient across a seeded sweep"""
        h = 1e-6
        rng = np.random.default_rng(2)
        for m, a in sweep(rng, 150):
            x = (interior_point(m, a) + random_point(m, a, rng)) / 2
            gradient = DimensionService.f_a_gradient(m, a, x)
            for i in range(m - 2):
                step = np.zeros(m - 2)
                step[i] = h
                numeric = (DimensionService.f_a_eval(m, a, x + step) - DimensionService.f_a_eval(m, a, x - step)) / (2 * h)
                self.assertAlmostEqual(gradient[i], numeric, delta=1e-6 * max(1.0, abs(numeric)))

    def test_concavity(self):
        """Hessian is negative definite and f_a is concave along random chords"""
        rng = np.random.default_rng(5)
        for m, a in sweep(rng, 100, margin=1e-3):
            hessian = DimensionService.f_a_hessian(m, a, interior_point(m, a))
            self.assertTrue(np.all(np.linalg.eigvalsh(hessian) < 0))
            for _ in range(20):
                x, y = random_point(m, a, rng), random_point(m, a, rng)
                mid = DimensionService.f_a_eval(m, a, (x + y) / 2)
                chord = (DimensionService.f_a_eval(m, a, x) + DimensionService.f_a_eval(m, a, y)) / 2
                self.assertGreaterEqual(mid, chord - 1e-12)

    def test_interior_point(self):
        """The gap construction is strictly inside D_(m,a), even for very thin domains"""
        for m in range(3, 9):
            for a in (1 / m + 1e-9, 1 / m + 1e-6, 2 / (m + 1), 0.5, 1 - 1e-6, 1 - 1e-12):
                if not 1 / m < a < 1:
                    continue
                x = interior_point(m, a)
                self.assertEqual(x.size, m - 2)
                self.assertTrue(np.all(DimensionService.phi_arguments(m, a, x) > 0))
        np.testing.assert_allclose(interior_point(3, 0.5), (1 / 3,), atol=1e-15)
        with self.assertRaises(DomainError):
            DimensionService.interior_point(4, 0.25)
        with self.assertRaises(DomainError):
            DimensionService.interior_point(2, 0.7)


class MaximizerTest(SimpleTestCase):
    """Test cases for the polytope maximizer and closed forms"""

    def setUp(self):
        self.tribonacci = BetaSystem.pseudo_golden(3)

    def test_closed_form_half(self):
        """Order 3 at a=1/2 has dimension log(3) / (2 log beta)"""
        self.assertAlmostEqual(DimensionService.closed_form_m3(self.tribonacci, 0.5), 0.9014212, delta=1e-6)
        with self.assertRaises(UnsupportedBetaError):
            DimensionService.closed_form_m3(BetaSystem.pseudo_golden(4), 0.5)

    def test_closed_form_matches_maximizer(self):
        """Closed form and Newton maximizer agree on a in [0.34, 0.99]"""
        for a in np.arange(0.34, 0.995, 0.01):
            self.assertAlmostEqual(
                DimensionService.closed_form_m3(self.tribonacci, a),
                DimensionService.maximize_f(3, a).dim,
                delta=1e-9,
            )

    def test_maximizer_beats_samples(self):
        """No sampled point of D_(4,a) exceeds the maximum"""
        rng = np.random.default_rng(3)
        for a in (0.3, 0.5, 0.8):
            optimum = DimensionService.maximize_f(4, a)
            vertices = np.array(DimensionService.polytope_vertices(4, a))
            best = optimum.diagnostics['f']
            for x in rng.dirichlet(np.ones(len(vertices)), size=2000) @ vertices:
                self.assertLessEqual(DimensionService.f_a_eval(4, a, x), best + 1e-12)
            self.assertLessEqual(optimum.kkt_residual, 1e-6)
            self.assertTrue(DimensionService.domain_contains(4, a, optimum.argmax))

    def test_maximizer_matches_nelder_mead(self):
        """A derivative-free search over D_(m,a) finds the same maximum"""
        for m, a in ((4, 0.35), (4, 0.7), (5, 0.45)):
            def negative_f(x):
                if not DimensionService.domain_contains(m, a, x, tol=0.0):
                    return 1.0
                return -DimensionService.f_a_eval(m, a, x)

            found = minimize(negative_f, interior_point(m, a), method='Nelder-Mead',
                             options={'xatol': 1e-10, 'fatol': 1e-14, 'maxiter': 20000})
            optimum = DimensionService.maximize_f(m, a)
            self.assertAlmostEqual(-found.fun, optimum.diagnostics['f'], delta=1e-8)

    def test_order_two_is_golden(self):
        """m=2 reduces to the golden-ratio formula"""
        for a in (0.55, 0.7, 0.9):
            self.assertAlmostEqual(DimensionService.maximize_f(2, a).dim, DimensionService.golden_dim(a), delta=1e-12)

    def test_endpoints(self):
        """a = 1/m and a = 1 give exactly 0; a < 1/m is empty"""
        for m in (3, 4, 5):
            system = BetaSystem.pseudo_golden(m)
            for a in (1 / m, 1.0):
                self.assertEqual(DimensionService.freq_dim(FreqQuery(system, a)).dim, 0.0)
                self.assertEqual(DimensionService.maximize_f(m, a).dim, 0.0)
            below = DimensionService.freq_dim(FreqQuery(system, 1 / m - 0.01))
            self.assertTrue(below.empty_set)
            self.assertEqual(below.dim, 0.0)
            self.assertEqual(below.flag, 'empty_set')

    def test_near_endpoints(self):
        """Frequencies just inside [1/m, 1] give small non-negative dimensions, not errors"""
        for m in (3, 4, 5, 6):
            system = BetaSystem.pseudo_golden(m)
            for a in (1 / m + 1e-9, 1 / m + 1e-6, 1 - 1e-9, 1 - 1e-12, 1 - 2e-12):
                result = DimensionService.freq_dim(FreqQuery(system, a))
                self.assertGreaterEqual(result.dim, 0.0)
                self.assertLess(result.dim, 0.01)
                self.assertFalse(result.empty_set)
                optimum = DimensionService.maximize_f(m, a)
                self.assertTrue(DimensionService.domain_contains(m, a, optimum.argmax))
                self.assertLess(optimum.dim, 0.01)

    def test_golden_formula(self):
        """Golden dimension peaks at 1 at (5+sqrt5)/10 and vanishes at 1/2"""
        self.assertAlmostEqual(DimensionService.golden_dim((5 + math.sqrt(5)) / 10), 1.0, delta=1e-12)
        self.assertEqual(DimensionService.golden_dim(0.4), 0.0)
        self.assertAlmostEqual(DimensionService.golden_dim(0.5), 0.0, delta=1e-15)

    def test_eggleston_formula(self):
        """Binary frequency 0.11 has dimension 0.499916"""
        self.assertAlmostEqual(DimensionService.eggleston_dim(0.11), 0.499916, delta=1e-6)
        self.assertAlmostEqual(DimensionService.eggleston_dim(0.5), 1.0, delta=1e-15)
        self.assertAlmostEqual(DimensionService.eggleston_dim(0.0), 0.0, delta=1e-15)
        self.assertAlmostEqual(DimensionService.eggleston_dim(1 / 3, base=3), 1.0, delta=1e-12)


class PressureTest(SimpleTestCase):
    """Test cases for the pressure oracle"""

    def test_perron_root(self):
        """The golden-mean matrix has Perron root phi"""
        self.assertAlmostEqual(DimensionService.perron_root(np.array([[1.0, 1.0], [1.0, 0.0]])), GOLDEN, delta=1e-12)
        graph = LanguageService.build_follower_graph(BetaSystem.golden())
        self.assertAlmostEqual(DimensionService.pressure(graph, 0.0), math.log(GOLDEN), delta=1e-12)

    def test_pressure_matches_maximizer(self):
        """Legendre transform of the pressure equals the polytope maximum"""
        for m in (3, 4, 5):
            system = BetaSystem.pseudo_golden(m)
            graph = LanguageService.build_follower_graph(system)
            for a in np.linspace(1 / m + 0.02, 0.97, 20):
                via_pressure = DimensionService.dim_via_pressure(graph, a, system)
                self.assertFalse(via_pressure.boundary)
                self.assertAlmostEqual(via_pressure.dim, DimensionService.maximize_f(m, a).dim, delta=1e-7)

    def test_pressure_domain(self):
        """The oracle works on the open interval only"""
        graph = LanguageService.build_follower_graph(BetaSystem.golden())
        with self.assertRaises(DomainError):
            DimensionService.dim_via_pressure(graph, 1.0)

    def test_pressure_boundary(self):
        """Frequencies outside the attainable range are flagged at the bracket edge"""
        for m in (2, 3, 4, 5):
            system = BetaSystem.pseudo_golden(m)
            graph = LanguageService.build_follower_graph(system)
            for a in (0.05, 0.1, 1 / m - 0.02):
                result = DimensionService.dim_via_pressure(graph, a, system)
                self.assertTrue(result.boundary)
                self.assertEqual(result.flag, 'boundary')
                self.assertEqual(result.dim, 0.0)
                self.assertLess(result.diagnostics['raw'], 0.0)
                self.assertEqual(result.diagnostics['t'], -40.0)
            inside = DimensionService.dim_via_pressure(graph, 1 / m + 0.05, system)
            self.assertFalse(inside.boundary)
            self.assertGreaterEqual(inside.diagnostics['raw'], 0.0)

    def test_parry_frequency(self):
        """Zero frequency of the maximal-entropy measure"""
        golden = LanguageService.build_follower_graph(BetaSystem.golden())
        binary = LanguageService.build_follower_graph(BetaSystem.integer(2))
        self.assertAlmostEqual(DimensionService.parry_zero_frequency(golden), (5 + math.sqrt(5)) / 10, delta=1e-12)
        self.assertAlmostEqual(DimensionService.parry_zero_frequency(binary), 0.5, delta=1e-12)

    def test_counting_close_to_closed_form(self):
        """Counting estimate at n=2000 is near the exact value"""
        system = BetaSystem.pseudo_golden(3)
        result = DimensionService.dim_via_counting(LanguageService.build_follower_graph(system), 0.5)
        self.assertEqual(result.method, Method.COUNTING)
        self.assertAlmostEqual(result.dim, DimensionService.closed_form_m3(system, 0.5), delta=0.02)


class FreqDimTest(SimpleTestCase):
    """Test cases for freq_dim dispatch, spectra and the full-dimension point"""

    def test_dispatch(self):
        """Each beta family goes to its own formula"""
        cases = (
            (BetaSystem.integer(2), 0.11, Method.EGGLESTON),
            (BetaSystem.golden(), 0.6, Method.GOLDEN),
            (BetaSystem.pseudo_golden(3), 0.5, Method.CLOSED_M3),
            (BetaSystem.pseudo_golden(5), 0.5, Method.POLYTOPE),
        )
        for system, a, method in cases:
            result = DimensionService.freq_dim(FreqQuery(system, a))
            self.assertEqual(result.method, method)
            self.assertTrue(result.certified)
            self.assertGreater(result.dim, 0.0)

    def test_closed_form_cross_check(self):
        """Order 3 results carry the maximizer's value but no argmax"""
        result = DimensionService.freq_dim(FreqQuery(BetaSystem.pseudo_golden(3), 0.6))
        self.assertLessEqual(result.diagnostics['delta'], 1e-9)
        self.assertEqual(result.argmax, ())
        forced = DimensionService.solve(FreqQuery(BetaSystem.pseudo_golden(3), 0.6), 'polytope')
        self.assertEqual(len(forced.argmax), 1)

    def test_uncertified(self):
        """Generic betas need the explicit opt-in and are flagged"""
        system = BetaSystem.from_value(1.465571231876768)
        with self.assertRaises(UnsupportedBetaError):
            DimensionService.freq_dim(FreqQuery(system, 0.75))
        result = DimensionService.freq_dim(FreqQuery(system, 0.75), allow_uncertified=True)
        self.assertFalse(result.certified)
        self.assertEqual(result.flag, 'uncertified')
        self.assertGreater(result.dim, 0.0)

    def test_frequency_range(self):
        """Frequencies outside [0,1] are domain errors"""
        with self.assertRaises(DomainError):
            FreqQuery(BetaSystem.golden(), 1.2)

    def test_solve_methods(self):
        """Forced methods agree with the automatic one"""
        query = FreqQuery(BetaSystem.pseudo_golden(4), 0.5)
        auto = DimensionService.solve(query).dim
        self.assertAlmostEqual(DimensionService.solve(query, 'polytope').dim, auto, delta=1e-12)
        self.assertAlmostEqual(DimensionService.solve(query, 'pressure').dim, auto, delta=1e-7)
        with self.assertRaises(UnsupportedBetaError):
            DimensionService.solve(FreqQuery(BetaSystem.integer(2), 0.6), 'polytope')

    def test_spectrum(self):
        """Rows keep grid order; failures stay on their row"""
        spectrum = DimensionService.spectrum(BetaSystem.pseudo_golden(3), [0.5, 0.2, 1.0, 1.5], workers=2)
        self.assertEqual([row.a for row in spectrum.rows], [0.5, 0.2, 1.0, 1.5])
        self.assertAlmostEqual(spectrum.rows[0].result.dim, 0.9014212, delta=1e-6)
        self.assertEqual(spectrum.rows[1].flag, 'empty_set')
        self.assertEqual(spectrum.rows[2].result.dim, 0.0)
        self.assertIsNone(spectrum.rows[3].result)
        self.assertTrue(spectrum.rows[3].flag.startswith('error'))
        self.assertEqual(spectrum.columns, ['a', 'dim', 'method', 'kkt_residual', 'flag'])
        self.assertGreater(spectrum.continuity, 0.0)

    def test_spectrum_is_deterministic(self):
        """Worker count does not change the result"""
        grid = list(np.linspace(0.35, 0.95, 13))
        one = DimensionService.spectrum(BetaSystem.pseudo_golden(4), grid, workers=1)
        four = DimensionService.spectrum(BetaSystem.pseudo_golden(4), grid, workers=4)
        self.assertEqual(one.as_rows(), four.as_rows())

    def test_full_dimension_point(self):
        """The spectrum reaches 1 for golden, binary and order 3"""
        for system in (BetaSystem.golden(), BetaSystem.integer(2), BetaSystem.pseudo_golden(3)):
            point = DimensionService.full_dimension_point(system)
            self.assertAlmostEqual(point.dim, 1.0, delta=1e-6)
            self.assertAlmostEqual(point.a, point.parry_frequency, delta=1e-4)
        with self.assertRaises(UnsupportedBetaError):
            DimensionService.full_dimension_point(BetaSystem.from_value(1.465571231876768))

    def test_entropy_bound(self):
        """No random invariant measure beats the dimension at its own frequency"""
        rng = np.random.default_rng(17)
        for m in (3, 4):
            system = BetaSystem.pseudo_golden(m)
            for _ in range(50):
                order = int(rng.integers(m - 1, m + 2))
                mu = MarkovService.random_markov_measure(system, order, rng, zero_bias=float(np.exp(rng.uniform(-2, 2))))
                a = min(max(MarkovService.zero_frequency(mu), 0.0), 1.0)
                bound = DimensionService.freq_dim(FreqQuery(system, a)).dim
                self.assertLessEqual(MarkovService.markov_entropy(mu) / system.log_beta, bound + 1e-9)


class DimCommandTest(SimpleTestCase):
    """Test cases for the dim command"""

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue().strip()

    def test_parse_grid(self):
        """Comma lists and inclusive ranges"""
        self.assertEqual(parse_grid('0.3,0.5,1'), [0.3, 0.5, 1.0])
        self.assertEqual(parse_grid('0.4:0.6:0.1'), [0.4, 0.5, 0.6])
        with self.assertRaises(ValueError):
            parse_grid('0.5:0.1:0.1')

    def test_dim_text(self):
        """Text output lists dim, method and flag"""
        lines = {}
        for line in self.call('dim', '--pseudo-golden', '3', '--a', '0.5').splitlines():
            name, _, value = line.partition(' ')
            lines[name] = value.strip()
        self.assertAlmostEqual(float(lines['dim']), 0.9014212, delta=1e-6)
        self.assertEqual(lines['method'], 'closed-m3')
        self.assertEqual(lines['flag'], '')

    def test_dim_empty_set(self):
        """a below 1/m prints dim 0 with the empty_set flag"""
        output = json.loads(self.call('dim', '--pseudo-golden', '3', '--a', '0.2', '--format', 'json'))
        self.assertEqual(output['dim'], 0.0)
        self.assertEqual(output['flag'], 'empty_set')

    def test_dim_integer(self):
        """beta=2 uses the binary entropy formula"""
        output = json.loads(self.call('dim', '--integer', '2', '--a', '0.11', '--format', 'json'))
        self.assertAlmostEqual(output['dim'], 0.499916, delta=1e-6)
        self.assertEqual(output['method'], 'eggleston')

    def test_dim_grid_csv(self):
        """--a-grid writes one CSV row per frequency"""
        lines = self.call('dim', '--pseudo-golden', '3', '--a-grid', '0.4:0.6:0.1', '--format', 'csv').splitlines()
        self.assertEqual(lines[0], 'a,dim,method,kkt_residual,flag')
        self.assertEqual(len(lines), 4)
        a, dim = lines[2].split(',')[:2]
        self.assertEqual(a, '0.5')
        self.assertAlmostEqual(float(dim), 0.9014212, delta=1e-6)

    def test_dim_grid_json(self):
        """JSON grids carry the continuity estimate"""
        output = json.loads(self.call('dim', '--golden', '--a-grid', '0.6,0.7,0.8', '--format', 'json'))
        self.assertEqual(len(output['rows']), 3)
        self.assertIn('continuity', output)

    def test_forced_pressure(self):
        """--method pressure agrees with the golden formula"""
        output = json.loads(self.call('dim', '--golden', '--a', '0.6', '--method', 'pressure', '--format', 'json'))
        self.assertAlmostEqual(output['dim'], DimensionService.golden_dim(0.6), delta=1e-7)

    def test_exit_codes(self):
        """Unsupported beta and bad frequency exit 3, a bad grid exits 2"""
        for args, code in (
            (('--beta', '1.5', '--a', '0.5'), 3),
            (('--golden', '--a', '1.5'), 3),
            (('--golden', '--a-grid', '0.5:0.1:0.1'), 2),
            (('--golden', '--a', '0.5', '--workers', '0'), 2),
        ):
            with self.assertRaises(CommandError) as ctx:
                self.call('dim', *args)
            self.assertEqual(ctx.exception.returncode, code)
