from django.test import SimpleTestCase, override_settings
from django.urls import reverse


class ApiTest(SimpleTestCase):
    """Test cases for the read-only API"""

    def get(self, name, **params):
        return self.client.get(reverse(f'api:{name}'), params)

    def test_health_check(self):
        """Health endpoint answers without parameters"""
        response = self.get('health_check')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()['status'], 'healthy')

    def test_beta_detail(self):
        """Tribonacci root with its finite expansion of one"""
        data = self.get('beta_detail', pseudo_golden=3).json()
        self.assertAlmostEqual(data['beta'], 1.839286755214161, delta=1e-10)
        self.assertEqual(data['finite_length'], 3)
        self.assertTrue(data['eps_one'].startswith('111000'))
        self.assertTrue(data['certified'])

    def test_expand(self):
        """Binary digits of 0.625"""
        data = self.get('expand', integer=2, x=0.625, digits=4).json()
        self.assertEqual(data['digits'], '1010')
        self.assertTrue(data['legal'])

    def test_count(self):
        """Counts come back as exact decimal strings"""
        self.assertEqual(self.get('count', pseudo_golden=3, n=4).json()['count'], '13')
        self.assertEqual(self.get('count', pseudo_golden=3, n=3, zeros=1).json()['count'], '3')
        self.assertEqual(self.get('count', integer=2, n=100).json()['count'], str(2 ** 100))

    def test_dim(self):
        """Order 3 at a=1/2"""
        data = self.get('dim', pseudo_golden=3, a=0.5).json()
        self.assertAlmostEqual(data['dim'], 0.9014212, delta=1e-6)
        self.assertEqual(data['method'], 'closed-m3')
        self.assertEqual(self.get('dim', pseudo_golden=3, a=0.2).json()['flag'], 'empty_set')

    def test_spectrum(self):
        """Rows in grid order with a continuity estimate"""
        data = self.get('spectrum', golden='true', a_grid='0.5:0.9:0.1').json()
        self.assertEqual([row['a'] for row in data['rows']], [0.5, 0.6, 0.7, 0.8, 0.9])
        self.assertEqual(data['rows'][0]['dim'], 0.0)
        self.assertIn('continuity', data)

    def test_invalid_query(self):
        """Missing or conflicting beta parameters give 400"""
        for params in ({'a': 0.5}, {'golden': 'true', 'pseudo_golden': 3, 'a': 0.5}):
            response = self.get('dim', **params)
            self.assertEqual(response.status_code, 400)
            self.assertEqual(response.json()['code'], 'invalid_query')

    def test_domain_error(self):
        """Service errors map to 400 with their code"""
        response = self.get('dim', golden='true', a=1.5)
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.json()['code'], 'domain')
        response = self.get('count', beta=1.5, n=4)
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.json()['code'], 'unsupported_beta')

    @override_settings(BETAFREQ={'N_MAX': 100, 'MAX_GRID': 3})
    def test_request_limits(self):
        """Counting lengths above n_max and grids above max_grid are refused"""
        response = self.get('dim', golden='true', a=0.6, method='counting', n=101)
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.json()['code'], 'domain')
        response = self.get('spectrum', golden='true', a_grid='0.6,0.7', method='counting', n=5000)
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.json()['code'], 'domain')
        for grid in ('0.5:0.9:0.1', '0:1:1e-12', '0.6,0.7,0.8,0.9'):
            response = self.get('spectrum', golden='true', a_grid=grid)
            self.assertEqual(response.status_code, 400)
            self.assertEqual(response.json()['code'], 'invalid_query')
        self.assertEqual(self.get('spectrum', golden='true', a_grid='0.6,0.7,0.8').status_code, 200)
        self.assertEqual(self.get('dim', golden='true', a=0.6, method='counting', n=100).status_code, 200)
