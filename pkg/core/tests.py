import json
from io import StringIO
from unittest import mock

from django.core.exceptions import ImproperlyConfigured
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from .config import Config
from .exceptions import DomainError, LengthMismatchError, UnsupportedBetaError, error_message
from .formatting import format_float, jsonable, render
from .services.verification_service import CheckResult, VerificationService


class ConfigTest(SimpleTestCase):
    """Test cases for run configuration"""

    def test_defaults(self):
        """Settings defaults match the documented values"""
        config = Config.from_settings()
        self.assertEqual(config.tol, 1e-12)
        self.assertEqual(config.n_max, 5000)
        self.assertEqual(config.output_format, 'text')

    @override_settings(BETAFREQ={'TOL': 1e-9, 'N_MAX': 100, 'FORMAT': 'json', 'SEED': 1, 'WORKERS': 2, 'MAX_GRID': 7})
    def test_from_settings(self):
        """BETAFREQ settings feed the config"""
        config = Config.from_settings()
        self.assertEqual((config.tol, config.n_max, config.output_format, config.seed, config.workers, config.max_grid),
                         (1e-9, 100, 'json', 1, 2, 7))

    def test_invariants(self):
        """tol > 0, n_max >= 10 and a known format"""
        for kwargs in ({'tol': 0.0}, {'n_max': 9}, {'output_format': 'xml'}, {'workers': 0}, {'max_grid': 0}):
            with self.assertRaises(ImproperlyConfigured):
                Config(**kwargs)

    def test_override(self):
        """None leaves a value unchanged"""
        config = Config().override(tol=1e-8, output_format=None)
        self.assertEqual(config.tol, 1e-8)
        self.assertEqual(config.output_format, 'text')


class FormattingTest(SimpleTestCase):
    """Test cases for output rendering"""

    def test_format_float(self):
        """Twelve significant digits, bare zero"""
        self.assertEqual(format_float(0.0), '0')
        self.assertEqual(format_float(1 / 3), '0.333333333333')
        self.assertEqual(format_float(1.839286755214161), '1.83928675521')
        self.assertEqual(format_float(float('inf')), 'inf')

    def test_jsonable(self):
        """Floats are rounded to the printed precision"""
        self.assertEqual(jsonable({'x': 1 / 3, 'n': 2 ** 70, 'w': (0.5, None)}),
                         {'x': 0.333333333333, 'n': 2 ** 70, 'w': [0.5, None]})

    def test_render_formats(self):
        """Single-row text, CSV and JSON"""
        rows = [{'a': 0.5, 'dim': 1.0}]
        self.assertEqual(render(['a', 'dim'], rows, 'text'), 'a    0.5\ndim  1')
        self.assertEqual(render(['a', 'dim'], rows, 'csv'), 'a,dim\n0.5,1')
        self.assertEqual(json.loads(render(['a', 'dim'], rows, 'json')), {'a': 0.5, 'dim': 1.0})

    def test_render_table(self):
        """Several rows are aligned in columns"""
        rows = [{'k': 0, 'count': 1}, {'k': 1, 'count': 12}]
        self.assertEqual(render(['k', 'count'], rows, 'text'), 'k  count\n0  1\n1  12')


class ExceptionsTest(SimpleTestCase):
    """Test cases for the error hierarchy"""

    def test_codes(self):
        """Each error carries its code and a flat message"""
        self.assertEqual(DomainError('x out of range').code, 'domain')
        self.assertEqual(LengthMismatchError('lengths differ').code, 'length_mismatch')
        self.assertIsInstance(LengthMismatchError('lengths differ'), DomainError)
        self.assertEqual(error_message(UnsupportedBetaError('no graph')), 'no graph')


class VerifyCommandTest(SimpleTestCase):
    """Test cases for the verify command"""

    def call(self, *args):
        out = StringIO()
        call_command('verify', *args, stdout=out, stderr=StringIO())
        return out.getvalue().strip()

    def test_expansion_suite(self):
        """Expansion invariants pass on a clean build"""
        lines = self.call('--suite', 'expansion', '--format', 'csv').splitlines()
        self.assertEqual(lines[0], 'status,suite,name,residual,limit,detail')
        self.assertTrue(all(line.startswith('PASS') for line in lines[1:]))
        self.assertEqual(len(lines), 4)

    def test_counting_suite(self):
        """Counting invariants pass"""
        rows = json.loads(self.call('--suite', 'counting', '--format', 'json'))
        self.assertEqual({row['status'] for row in rows}, {'PASS'})

    def test_dimension_suite(self):
        """Dimension invariants pass, including the vertex comparison"""
        rows = json.loads(self.call('--suite', 'dimension', '--format', 'json'))
        self.assertEqual({row['status'] for row in rows}, {'PASS'})
        self.assertIn('maximizer_vs_vertices', [row['name'] for row in rows])

    def test_seed_reproducible(self):
        """Same seed, same report"""
        self.assertEqual(self.call('--suite', 'expansion', '--seed', '5'),
                         self.call('--suite', 'expansion', '--seed', '5'))

    def test_failure_exit_code(self):
        """A failing invariant exits with code 1"""
        failing = [CheckResult('expansion', 'round_trip', 2.0, 1.0)]
        with mock.patch.object(VerificationService, 'expansion_checks', return_value=failing):
            with self.assertRaises(CommandError) as ctx:
                self.call('--suite', 'expansion')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_check_result(self):
        """Residual at the limit passes"""
        self.assertTrue(CheckResult('s', 'n', 1.0, 1.0).passed)
        self.assertFalse(CheckResult('s', 'n', 1.5, 1.0).passed)
        self.assertEqual(CheckResult('s', 'n', 0, 0).as_row()['status'], 'PASS')
