import math
import random
from io import StringIO

import mpmath
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.exceptions import DomainError, LengthMismatchError
from .services import BetaSystem, DigitWord, ExpansionService, Ordering

GOLDEN = (1 + math.sqrt(5)) / 2


def interval_beta(polynomial, approx, bits=200):
    """Certified enclosure of the root of `polynomial` near `approx`"""
    mpmath.iv.prec = bits
    with mpmath.workdps(80):
        root = mpmath.findroot(lambda z: mpmath.polyval(list(polynomial), z), approx)
        lo, hi = mpmath.nstr(root - mpmath.mpf('1e-60'), 75), mpmath.nstr(root + mpmath.mpf('1e-60'), 75)
    p_lo = mpmath.iv.polyval(list(polynomial), mpmath.iv.mpf(lo))
    p_hi = mpmath.iv.polyval(list(polynomial), mpmath.iv.mpf(hi))
    assert (p_lo < 0) is True and (p_hi > 0) is True
    return mpmath.iv.mpf([lo, hi])


def interval_digits(x, beta, n):
    """Greedy digits computed in interval arithmetic; None when a floor is not certified"""
    orbit = mpmath.iv.mpf(x)
    digits = []
    for _ in range(n):
        y = beta * orbit
        d = int(math.floor(float(y.mid)))
        if (y >= d) is not True or (y < d + 1) is not True:
            return None
        digits.append(d)
        orbit = y - d
    return digits


class BetaSystemTest(SimpleTestCase):
    """Test cases for BetaSystem construction"""

    def test_pseudo_golden_expansion_of_one(self):
        """eps(1,beta) = 1^m 0^inf for pseudo-golden orders 2..8"""
        for m in range(2, 9):
            system = BetaSystem.pseudo_golden(m)
            self.assertEqual(system.finite_length, m)
            self.assertEqual(str(system.eps_one[:m + 5]), '1' * m + '00000')
            self.assertEqual(str(system.quasi_greedy_period), '1' * (m - 1) + '0')
            self.assertEqual(system.alphabet_max, 1)

    def test_golden_root(self):
        """The order-2 root is the golden ratio"""
        system = BetaSystem.golden()
        self.assertAlmostEqual(system.beta, GOLDEN, places=14)
        self.assertTrue(system.is_golden)

    def test_tribonacci_root(self):
        """The order-3 root satisfies beta^3 = beta^2 + beta + 1"""
        beta = BetaSystem.pseudo_golden(3).beta
        self.assertAlmostEqual(beta ** 3, beta ** 2 + beta + 1, places=13)
        self.assertAlmostEqual(beta, 1.839286755214161, places=14)

    def test_from_value_matches_pseudo_golden(self):
        """A numeric beta close to a pseudo-golden root selects the certified system"""
        system = BetaSystem.from_value(1.8392867552141612)
        self.assertTrue(system.is_pseudo_golden)
        self.assertEqual(system.order, 3)
        self.assertTrue(BetaSystem.from_value(2.0).is_integer)

    def test_pseudo_golden_roots(self):
        """Every order 2..8 builds and its root solves x^m = x^(m-1) + ... + 1 in (1,2)"""
        previous = 1.0
        for m in range(2, 9):
            beta = BetaSystem.pseudo_golden(m).beta
            self.assertTrue(previous < beta < 2)
            self.assertAlmostEqual(beta ** m, sum(beta ** j for j in range(m)), places=12)
            previous = beta

    def test_large_beta_prefix_matches_expansion(self):
        """The cached eps(1,beta) prefix agrees with a fresh expansion for large beta"""
        for value in (30.7, 50.3):
            system = BetaSystem.from_value(value)
            word, finite = ExpansionService.expand_one(system, 64)
            self.assertFalse(finite)
            self.assertEqual(system.eps_one, word)
            self.assertEqual(ExpansionService.quasi_greedy_one(system, 64), word)
            self.assertEqual(ExpansionService.quasi_greedy_one(system, 40), word[:40])

    def test_from_value_generic(self):
        """Other values give an uncertified generic system"""
        system = BetaSystem.from_value(1.5)
        self.assertEqual(system.kind, 'generic')
        self.assertFalse(system.certified)
        self.assertEqual(system.alphabet_max, 1)

    def test_invalid_systems(self):
        """Bad orders, bases and values raise DomainError"""
        with self.assertRaises(DomainError):
            BetaSystem.pseudo_golden(1)
        with self.assertRaises(DomainError):
            BetaSystem.integer(1)
        with self.assertRaises(DomainError):
            BetaSystem.from_value(0.9)

    def test_digit_word_parse(self):
        """Words parse from digit strings and reject anything else"""
        self.assertEqual(DigitWord.parse('0110').digits, (0, 1, 1, 0))
        with self.assertRaises(DomainError):
            DigitWord.parse('01a')
        with self.assertRaises(DomainError):
            DigitWord.parse('012', alphabet_max=1)
        self.assertEqual(DigitWord.coerce((0, 2), alphabet_max=2).digits, (0, 2))


class ExpansionServiceTest(SimpleTestCase):
    """Test cases for ExpansionService"""

    def setUp(self):
        self.golden = BetaSystem.golden()
        self.tribonacci = BetaSystem.pseudo_golden(3)
        self.m4 = BetaSystem.pseudo_golden(4)
        self.binary = BetaSystem.integer(2)
        self.systems = [self.golden, self.tribonacci, self.m4]

    def test_beta_transform(self):
        """T(0)=0, T(1/golden)=0 and the doubling map below 1/2"""
        self.assertEqual(ExpansionService.beta_transform(0.0, self.golden), 0.0)
        self.assertAlmostEqual(ExpansionService.beta_transform(1 / GOLDEN, self.golden), 0.0, places=12)
        self.assertAlmostEqual(ExpansionService.beta_transform(0.3, self.binary), 0.6, places=15)
        with self.assertRaises(DomainError):
            ExpansionService.beta_transform(1.5, self.golden)

    def test_greedy_expand_examples(self):
        """Zero, 1/golden and a binary fraction"""
        self.assertEqual(str(ExpansionService.greedy_expand(0.0, self.tribonacci, 5)), '00000')
        self.assertEqual(str(ExpansionService.greedy_expand(GOLDEN - 1, self.golden, 4)), '1000')
        self.assertEqual(str(ExpansionService.greedy_expand(0.625, self.binary, 4)), '1010')
        with self.assertRaises(DomainError):
            ExpansionService.greedy_expand(1.0, self.golden, 4)

    def test_greedy_expand_matches_interval_oracle(self):
        """Tribonacci digits of 0.5 agree with a 200-bit interval re-expansion"""
        beta = interval_beta((1, -1, -1, -1), 1.839)
        for x, n in ((0.5, 10), (0.5, 60), (0.123456789, 60), (0.987654321, 40)):
            expected = interval_digits(x, beta, n)
            self.assertIsNotNone(expected)
            self.assertEqual(list(ExpansionService.greedy_expand(x, self.tribonacci, n)), expected)

    def test_expand_one(self):
        """Finite expansions of 1 and the integer convention"""
        word, finite = ExpansionService.expand_one(self.tribonacci, 8)
        self.assertEqual(str(word), '11100000')
        self.assertTrue(finite)
        word, finite = ExpansionService.expand_one(self.golden, 6)
        self.assertEqual(str(word), '110000')
        self.assertTrue(finite)
        word, finite = ExpansionService.expand_one(self.binary, 4)
        self.assertEqual(str(word), '1111')
        self.assertFalse(finite)

    def test_quasi_greedy_one(self):
        """eps*(1,beta) is periodic with period 1^(m-1)0"""
        self.assertEqual(str(ExpansionService.quasi_greedy_one(self.tribonacci, 9)), '110110110')
        self.assertEqual(str(ExpansionService.quasi_greedy_one(self.golden, 6)), '101010')
        self.assertEqual(str(ExpansionService.quasi_greedy_one(self.m4, 8)), '11101110')
        self.assertEqual(str(ExpansionService.quasi_greedy_one(self.binary, 3)), '111')

    def test_lex_compare(self):
        """Standard lexicographic order on equal lengths"""
        self.assertEqual(ExpansionService.lex_compare('10', '11'), Ordering.LESS)
        self.assertEqual(ExpansionService.lex_compare('110', '110'), Ordering.EQUAL)
        self.assertEqual(ExpansionService.lex_compare('111', '110'), Ordering.GREATER)
        with self.assertRaises(LengthMismatchError):
            ExpansionService.lex_compare('1', '10')

    def test_is_legal_word(self):
        """Parry's criterion on short examples"""
        self.assertTrue(ExpansionService.is_legal_word('110110', self.tribonacci))
        self.assertFalse(ExpansionService.is_legal_word('111', self.tribonacci))
        self.assertFalse(ExpansionService.is_legal_word('11', self.golden))
        for system in self.systems + [self.binary]:
            self.assertTrue(ExpansionService.is_legal_word(DigitWord.zeros(12), system))

    def test_legal_words_enumeration(self):
        """Tribonacci words avoiding 111 are counted 2, 4, 7, 13, 24"""
        counts = [sum(1 for _ in ExpansionService.legal_words(self.tribonacci, n)) for n in range(1, 6)]
        self.assertEqual(counts, [2, 4, 7, 13, 24])
        words = [str(w) for w in ExpansionService.legal_words(self.golden, 3)]
        self.assertEqual(words, ['000', '001', '010', '100', '101'])

    def test_project(self):
        """pi(0^n)=0, pi(10)=1/golden, pi(111)=1 for tribonacci"""
        self.assertEqual(ExpansionService.project('0000', self.golden), 0.0)
        self.assertAlmostEqual(ExpansionService.project('10', self.golden), 0.6180339887498949, places=15)
        self.assertAlmostEqual(ExpansionService.project('111', self.tribonacci), 1.0, places=15)

    def test_sequence_distance(self):
        """beta^-k at the first disagreement, 0 for equal words"""
        self.assertEqual(ExpansionService.sequence_distance('101', '101', self.golden), 0.0)
        self.assertAlmostEqual(ExpansionService.sequence_distance('10', '11', self.golden), 1 / GOLDEN)
        beta = self.tribonacci.beta
        self.assertAlmostEqual(ExpansionService.sequence_distance('110', '111', self.tribonacci), beta ** -2)
        with self.assertRaises(LengthMismatchError):
            ExpansionService.sequence_distance('1', '10', self.golden)

    def test_digits_outside_alphabet(self):
        """Digits above ceil(beta)-1 are rejected rather than projected or compared"""
        with self.assertRaises(DomainError):
            ExpansionService.project('2', self.golden)
        with self.assertRaises(DomainError):
            ExpansionService.sequence_distance('29', '21', self.golden)
        with self.assertRaises(DomainError):
            ExpansionService.is_legal_word('102', self.tribonacci)
        with self.assertRaises(DomainError):
            ExpansionService.expansion_residual(0.5, (1, 3), self.binary)
        with self.assertRaises(DomainError):
            ExpansionService.cylinder_interval('20', self.m4)
        self.assertAlmostEqual(ExpansionService.project('2', BetaSystem.integer(3)), 2 / 3, places=15)

    def test_cylinder_interval_examples(self):
        """Binary, golden and tribonacci cylinders"""
        cylinder = ExpansionService.cylinder_interval('0', self.binary)
        self.assertAlmostEqual(cylinder.left, 0.0)
        self.assertAlmostEqual(cylinder.right, 0.5, places=12)

        cylinder = ExpansionService.cylinder_interval('1', self.golden)
        self.assertAlmostEqual(cylinder.left, 1 / GOLDEN, places=14)
        self.assertAlmostEqual(cylinder.right, 1.0, places=12)

        beta = self.tribonacci.beta
        cylinder = ExpansionService.cylinder_interval('11', self.tribonacci)
        self.assertAlmostEqual(cylinder.left, 1 / beta + 1 / beta ** 2, places=14)
        self.assertAlmostEqual(cylinder.right, 1.0, places=12)

        self.assertTrue(ExpansionService.cylinder_interval('111', self.tribonacci).empty)

    def test_cylinder_partition(self):
        """Legal order-n cylinders tile [0,1) without gaps or overlaps"""
        for system, orders in ((self.golden, (1, 4, 12)), (self.tribonacci, (2, 7, 12)), (self.m4, (3, 9))):
            for n in orders:
                cylinders = [ExpansionService.cylinder_interval(w, system) for w in ExpansionService.legal_words(system, n)]
                cylinders.sort(key=lambda c: c.left)
                self.assertAlmostEqual(cylinders[0].left, 0.0)
                self.assertAlmostEqual(cylinders[-1].right, 1.0, places=10)
                for current, following in zip(cylinders, cylinders[1:]):
                    self.assertLessEqual(current.left, current.right)
                    self.assertLessEqual(current.right - current.left, system.beta ** -n + 1e-12)
                    self.assertAlmostEqual(current.right, following.left, places=10)

    def test_admissibility_and_round_trip(self):
        """Greedy words are legal and project back to within beta^-n of x"""
        rng = random.Random(20240601)
        for system in self.systems:
            for _ in range(60):
                x = rng.random()
                word = ExpansionService.greedy_expand(x, system, 60)
                self.assertTrue(ExpansionService.is_legal_word(word, system))
                for n in (1, 5, 10, 20, 40, 60):
                    residual = ExpansionService.expansion_residual(x, word[:n], system)
                    self.assertLessEqual(residual, system.beta ** -n)

    def test_round_trip_random_points(self):
        """1000 random points at n=60 on the tribonacci system"""
        rng = random.Random(7)
        for _ in range(1000):
            x = rng.random()
            word = ExpansionService.greedy_expand(x, self.tribonacci, 60)
            self.assertLessEqual(ExpansionService.expansion_residual(x, word, self.tribonacci),
                                 self.tribonacci.beta ** -60)

    def test_monotonicity(self):
        """Greedy expansion is order preserving"""
        for system in self.systems:
            grid = [i / 500 for i in range(500)]
            words = [ExpansionService.greedy_expand(x, system, 20) for x in grid]
            for u, v in zip(words, words[1:]):
                self.assertNotEqual(ExpansionService.lex_compare(u, v), Ordering.GREATER)

    def test_quasi_greedy_self_consistency(self):
        """Every shift of eps*(1,beta) is lexicographically below it"""
        for system in self.systems + [BetaSystem.from_value(1.5)]:
            eps_star = ExpansionService.quasi_greedy_one(system, 200)
            for k in range(1, 200):
                shifted = eps_star[k:]
                prefix = eps_star[:200 - k]
                self.assertNotEqual(ExpansionService.lex_compare(shifted, prefix), Ordering.GREATER)

    def test_covering_examples(self):
        """Small covering counts for binary, tribonacci and golden"""
        for n in (1, 5, 10):
            self.assertLessEqual(ExpansionService.covering_count(0.3, n, self.binary), 3)
        count = ExpansionService.covering_count(0.9, 10, self.tribonacci)
        self.assertGreaterEqual(count, 1)
        self.assertLessEqual(count, 44)
        count = ExpansionService.covering_count(0.0, 5, self.golden)
        self.assertGreaterEqual(count, 1)
        self.assertLessEqual(count, 24)
        with self.assertRaises(DomainError):
            ExpansionService.covering_count(0.5, 21, self.golden)

    def test_covering_bound(self):
        """A beta^-n ball meets at most 4(n+1) order-n cylinders"""
        rng = random.Random(11)
        for _ in range(1000):
            system = rng.choice(self.systems)
            x, n = rng.random(), rng.randint(1, 14)
            count = ExpansionService.covering_count(x, n, system)
            self.assertGreaterEqual(count, 1)
            self.assertLessEqual(count, 4 * (n + 1))


class ExpansionCommandTest(SimpleTestCase):
    """Test cases for the expand and beta commands"""

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def test_expand_binary(self):
        """expand --integer 2 --x 0.625 --digits 4 prints 1010"""
        output = self.call('expand', '--integer', '2', '--x', '0.625', '--digits', '4')
        self.assertEqual(output.splitlines()[0], '1010')
        self.assertTrue(output.splitlines()[1].startswith('residual'))

    def test_expand_golden(self):
        """1/golden expands to 100000"""
        output = self.call('expand', '--golden', '--x', '0.6180339887498949', '--digits', '6')
        self.assertEqual(output.splitlines()[0], '100000')

    def test_expand_zero(self):
        """0 expands to zeros"""
        output = self.call('expand', '--pseudo-golden', '3', '--x', '0', '--digits', '5')
        self.assertEqual(output.splitlines()[0], '00000')

    def test_expand_csv(self):
        """CSV output has a header and one row"""
        output = self.call('expand', '--integer', '2', '--x', '0.625', '--digits', '4', '--format', 'csv')
        header, row = output.strip().splitlines()
        self.assertEqual(header, 'beta,x,digits,residual,bound,legal')
        self.assertEqual(row.split(',')[2], '1010')

    def test_expand_domain_error(self):
        """x outside [0,1) exits with code 3"""
        with self.assertRaises(CommandError) as ctx:
            self.call('expand', '--golden', '--x', '1.5', '--digits', '4')
        self.assertEqual(ctx.exception.returncode, 3)

    def test_expand_bad_digits(self):
        """Non-positive digit counts exit with code 2"""
        with self.assertRaises(CommandError) as ctx:
            self.call('expand', '--golden', '--x', '0.5', '--digits', '0')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_beta_prints_root(self):
        """beta --pseudo-golden 3 prints the root to 15 digits"""
        output = self.call('beta', '--pseudo-golden', '3')
        self.assertEqual(output.splitlines()[0], '1.839286755214161')
        self.assertIn('eps_one       11100000000000000000', output)

    def test_deterministic_output(self):
        """Identical arguments give identical output"""
        args = ('expand', '--pseudo-golden', '4', '--x', '0.377', '--digits', '30', '--format', 'json')
        self.assertEqual(self.call(*args), self.call(*args))
