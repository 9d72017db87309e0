import math
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.exceptions import DomainError, UnsupportedBetaError
from services.expansions.services import BetaSystem, ExpansionService
from .services import LanguageService


class FollowerGraphTest(SimpleTestCase):
    """Test cases for follower-graph construction"""

    def test_golden_graph(self):
        """Golden-mean shift: states 0,1 and edges 0->0, 0->1, 1->0"""
        graph = LanguageService.build_follower_graph(BetaSystem.golden())
        self.assertEqual([str(s) for s in graph.states], ['0', '1'])
        self.assertEqual(sorted((src, dst) for src, dst, _ in graph.edges), [(0, 0), (0, 1), (1, 0)])
        self.assertTrue(graph.is_strongly_connected())

    def test_tribonacci_graph(self):
        """Order 3: four states and seven edges, 11 -> 11 is missing"""
        graph = LanguageService.build_follower_graph(BetaSystem.pseudo_golden(3))
        self.assertEqual([str(s) for s in graph.states], ['00', '01', '10', '11'])
        self.assertEqual(len(graph.edges), 7)
        self.assertNotIn((3, 3, 1), graph.edges)
        self.assertTrue(graph.is_strongly_connected())

    def test_states_are_legal(self):
        """Every state is a legal word and state counts match the language"""
        for m in range(2, 7):
            system = BetaSystem.pseudo_golden(m)
            graph = LanguageService.build_follower_graph(system)
            self.assertEqual(graph.size, 2 ** (m - 1))
            for state in graph.states:
                self.assertTrue(ExpansionService.is_legal_word(state, system))
            self.assertTrue(graph.is_strongly_connected())

    def test_binary_graph(self):
        """beta=2 is one state with two loops"""
        graph = LanguageService.build_follower_graph(BetaSystem.integer(2))
        self.assertEqual(graph.size, 1)
        self.assertEqual(graph.block, 0)
        self.assertEqual(graph.adjacency.tolist(), [[2]])

    def test_other_finite_expansion(self):
        """eps(1,beta)=101 gives the shift avoiding 11 and 101 followed by 1"""
        system = BetaSystem.from_value(1.465571231876768)
        self.assertEqual(system.finite_length, 3)
        self.assertFalse(system.certified)
        graph = LanguageService.build_follower_graph(system)
        self.assertEqual([str(s) for s in graph.states], ['00', '01', '10'])
        for n in range(1, 12):
            expected = sum(1 for _ in ExpansionService.legal_words(system, n))
            self.assertEqual(LanguageService.count_words(graph, n), expected)

    def test_unsupported_beta(self):
        """Infinite expansions of 1 have no follower graph"""
        with self.assertRaises(UnsupportedBetaError):
            LanguageService.build_follower_graph(BetaSystem.from_value(1.5))


class LanguageServiceTest(SimpleTestCase):
    """Test cases for exact counting"""

    def setUp(self):
        self.golden = LanguageService.build_follower_graph(BetaSystem.golden())
        self.tribonacci = LanguageService.build_follower_graph(BetaSystem.pseudo_golden(3))
        self.m4 = LanguageService.build_follower_graph(BetaSystem.pseudo_golden(4))
        self.binary = LanguageService.build_follower_graph(BetaSystem.integer(2))

    def test_count_words_examples(self):
        """Tribonacci, Fibonacci and powers of two"""
        self.assertEqual([LanguageService.count_words(self.tribonacci, n) for n in range(1, 6)], [2, 4, 7, 13, 24])
        self.assertEqual([LanguageService.count_words(self.golden, n) for n in range(1, 4)], [2, 3, 5])
        for n in (1, 7, 64):
            self.assertEqual(LanguageService.count_words(self.binary, n), 2 ** n)
        with self.assertRaises(DomainError):
            LanguageService.count_words(self.golden, 0)

    def test_count_by_zeros_examples(self):
        """N(3,k) and N(2,k) for order 3"""
        self.assertEqual(LanguageService.count_words_by_zeros(self.tribonacci, 3).counts, (0, 3, 3, 1))
        self.assertEqual(LanguageService.count_words_by_zeros(self.tribonacci, 2).counts, (1, 2, 1))
        self.assertEqual(LanguageService.count_words_by_zeros(self.tribonacci, 1).counts, (1, 1))

    def test_count_by_zeros_binomial(self):
        """Full shift rows are binomial coefficients"""
        table = LanguageService.count_words_by_zeros(self.binary, 50)
        self.assertEqual(list(table.counts), [math.comb(50, k) for k in range(51)])

    def test_all_zero_word(self):
        """N(n,n) = 1 for every graph"""
        for graph in (self.golden, self.tribonacci, self.m4, self.binary):
            for n in (1, 5, 40):
                self.assertEqual(LanguageService.count_words_by_zeros(graph, n)[n], 1)

    def test_recurrence(self):
        """N(n) = N(n-1) + ... + N(n-m) for 2m <= n <= 400"""
        for m, graph in ((3, self.tribonacci), (4, self.m4)):
            counts = {n: LanguageService.count_words(graph, n) for n in range(m, 401)}
            for n in range(2 * m, 401):
                self.assertEqual(counts[n], sum(counts[n - j] for j in range(1, m + 1)))

    def test_growth_rate(self):
        """log N(1000) / 1000 is within 0.005 of log beta"""
        for graph in (self.tribonacci, self.m4, self.golden):
            count = LanguageService.count_words(graph, 1000)
            self.assertLessEqual(abs(math.log(count) / 1000 - graph.system.log_beta), 0.005)

    def test_frequency_support(self):
        """No legal word has fewer than floor(n/m) - 1 zeros"""
        for m, graph in ((3, self.tribonacci), (4, self.m4)):
            for n in (30, 61, 100):
                table = LanguageService.count_words_by_zeros(graph, n)
                for k in range(0, n // m - 1):
                    self.assertEqual(table[k], 0)

    def test_row_sums(self):
        """Sum over k of N(n,k) equals N(n)"""
        for graph in (self.golden, self.tribonacci, self.m4, self.binary):
            for n in (1, 2, 3, 17, 200):
                table = LanguageService.count_words_by_zeros(graph, n)
                self.assertEqual(table.total, LanguageService.count_words(graph, n))

    def test_transfer_matrix_consistency(self):
        """Start weights times A^(n-m+1) reproduces N(n)"""
        for graph in (self.golden, self.tribonacci, self.m4, self.binary):
            for n in (graph.block or 1, 10, 150):
                self.assertEqual(LanguageService.transfer_matrix_count(graph, n), LanguageService.count_words(graph, n))

    def test_count_table_csv(self):
        """CSV export has a header and exact integers"""
        csv = LanguageService.count_words_by_zeros(self.tribonacci, 3).to_csv()
        self.assertEqual(csv.splitlines(), ['n,k,count', '3,0,0', '3,1,3', '3,2,3', '3,3,1'])

    def test_estimate_all_zeros(self):
        """a=1 selects the single all-zero word"""
        for n in (10, 50):
            self.assertEqual(LanguageService.freq_dim_estimate(self.tribonacci, n, 1.0), 0.0)

    def test_estimate_empty_class(self):
        """Frequencies below 1/m give an empty class"""
        estimate = LanguageService.frequency_estimate(self.tribonacci, 60, 0.1)
        self.assertTrue(estimate.empty)
        self.assertEqual(estimate.value, 0.0)

    def test_estimate_requires_length(self):
        """Estimates need n >= 10"""
        with self.assertRaises(DomainError):
            LanguageService.freq_dim_estimate(self.tribonacci, 9, 0.5)

    def test_estimate_binary(self):
        """Central binomial at n=2000 is within 0.01 of full dimension"""
        self.assertAlmostEqual(LanguageService.freq_dim_estimate(self.binary, 2000, 0.5), 1.0, delta=0.01)

    def test_counting_convergence(self):
        """n=3000 estimates are within 0.01 of the order-3 closed form"""
        from services.dimension.services import DimensionService

        table = LanguageService.count_words_by_zeros(self.tribonacci, 3000)
        for a in (0.4, 0.5, 0.6, 0.7):
            estimate = LanguageService.frequency_estimate(self.tribonacci, 3000, a, table=table)
            expected = DimensionService.closed_form_m3(self.tribonacci.system, a)
            self.assertAlmostEqual(estimate.value, expected, delta=0.01)
            self.assertAlmostEqual(estimate.best_value, expected, delta=0.01)
        self.assertAlmostEqual(LanguageService.frequency_estimate(self.tribonacci, 3000, 0.5, table=table).value,
                               0.901420, delta=0.01)


class CountCommandTest(SimpleTestCase):
    """Test cases for the count command"""

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue().strip()

    def test_count_examples(self):
        """count prints exact integers"""
        self.assertEqual(self.call('count', '--pseudo-golden', '3', '--n', '4'), '13')
        self.assertEqual(self.call('count', '--pseudo-golden', '3', '--n', '3', '--zeros', '1'), '3')
        self.assertEqual(self.call('count', '--golden', '--n', '3'), '5')
        self.assertEqual(self.call('count', '--integer', '2', '--n', '100'), str(2 ** 100))

    def test_count_table_csv(self):
        """--table --format csv prints n,k,count rows"""
        output = self.call('count', '--pseudo-golden', '3', '--n', '2', '--table', '--format', 'csv')
        self.assertEqual(output.splitlines(), ['n,k,count', '2,0,1', '2,1,2', '2,2,1'])

    def test_unsupported_beta_exit_code(self):
        """A beta without finite expansion exits with code 3"""
        with self.assertRaises(CommandError) as ctx:
            self.call('count', '--beta', '1.5', '--n', '4')
        self.assertEqual(ctx.exception.returncode, 3)

    def test_bad_length_exit_code(self):
        """Lengths outside [1, n_max] exit with code 2"""
        for n in ('0', '100000'):
            with self.assertRaises(CommandError) as ctx:
                self.call('count', '--golden', '--n', n)
            self.assertEqual(ctx.exception.returncode, 2)
