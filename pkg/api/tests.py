"""
Tests for the simulation API

Tests cover:
- API key authentication
- Point evaluation, drive.theta and error mapping
- Scenario listing and sweeps
- Sweep result caching
"""
import math
import os
from dataclasses import replace
from unittest.mock import patch

from django.core.cache import cache
from rest_framework import status
from rest_framework.test import APIClient, APIRequestFactory, APISimpleTestCase

from optomech.config import default_config
from optomech.exceptions import NumericalError
from optomech.linear_model import eigen_stability as real_eigen_stability
from sweeps.pipeline import DERIVED_FIELDS

from .authentication import APIKeyAuthentication, configured_api_keys, key_fingerprint


def unstable_report(model, margin=None):
    return replace(real_eigen_stability(model, margin), stable_by_eigen=False)


class AuthenticationTests(APISimpleTestCase):
    """Test API key authentication"""

    def setUp(self):
        self.client = APIClient()
        self.test_api_key = 'test-api-key-12345'

    def test_status_is_public(self):
        """Test status endpoint needs no key"""
        response = self.client.get('/api/v1/status/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['status'], 'online')
        self.assertIn('version', response.data)

    def test_status_lists_endpoints(self):
        """Test status advertises every endpoint and which need a key"""
        response = self.client.get('/api/v1/status/')

        endpoints = {entry['path']: entry for entry in response.data['endpoints']}
        self.assertEqual(
            set(endpoints),
            {'/api/v1/status/', '/api/v1/scenarios/', '/api/v1/point/', '/api/v1/sweeps/'},
        )
        self.assertFalse(endpoints['/api/v1/status/']['auth'])
        self.assertTrue(endpoints['/api/v1/point/']['auth'])
        self.assertEqual(endpoints['/api/v1/sweeps/']['method'], 'POST')

    @patch.dict(os.environ, {'WGMSIM_API_KEYS': 'test-api-key-12345,another-key'})
    def test_valid_api_key_bearer(self):
        """Test authentication with Bearer token"""
        response = self.client.get(
            '/api/v1/scenarios/',
            HTTP_AUTHORIZATION=f'Bearer {self.test_api_key}'
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK)

    @patch.dict(os.environ, {'WGMSIM_API_KEYS': 'test-api-key-12345'})
    def test_valid_api_key_header(self):
        """Test authentication with X-API-Key header"""
        response = self.client.get('/api/v1/scenarios/', HTTP_X_API_KEY=self.test_api_key)
        self.assertEqual(response.status_code, status.HTTP_200_OK)

    @patch.dict(os.environ, {'WGMSIM_API_KEYS': 'test-api-key-12345'})
    def test_invalid_api_key(self):
        """Test rejection of an unknown key, logged by fingerprint only"""
        with self.assertLogs('api.authentication', level='WARNING') as logs:
            response = self.client.get('/api/v1/scenarios/', HTTP_AUTHORIZATION='Bearer invalid-key-999')
        self.assertEqual(response.status_code, status.HTTP_401_UNAUTHORIZED)
        self.assertIn(key_fingerprint('invalid-key-999'), logs.output[0])
        self.assertNotIn('invalid-key-999', logs.output[0])

    @patch.dict(os.environ, {'WGMSIM_API_KEYS': ' first-key , ,second-key,'})
    def test_configured_keys(self):
        """Test key parsing drops blanks and surrounding spaces"""
        self.assertEqual(configured_api_keys(), ['first-key', 'second-key'])
        request = APIRequestFactory().get('/api/v1/scenarios/', HTTP_X_API_KEY='second-key')
        user, key = APIKeyAuthentication().authenticate(request)
        self.assertEqual(key, 'second-key')
        self.assertEqual(str(user), f'api-key:{key_fingerprint("second-key")}')
        self.assertNotIn('second-key', str(user))

    def test_missing_api_key(self):
        """Test rejection without any key"""
        response = self.client.get('/api/v1/scenarios/')
        self.assertEqual(response.status_code, status.HTTP_401_UNAUTHORIZED)

    @patch.dict(os.environ, {'WGMSIM_API_KEYS': ''})
    def test_unconfigured_keys_reject_everything(self):
        """Test that no configured keys means no access"""
        response = self.client.get('/api/v1/scenarios/', HTTP_X_API_KEY='anything')
        self.assertEqual(response.status_code, status.HTTP_401_UNAUTHORIZED)


class AuthenticatedAPITestCase(APISimpleTestCase):
    """Client with a valid key and an empty cache"""

    def setUp(self):
        self.test_api_key = 'test-api-key-12345'
        self.env_patcher = patch.dict(os.environ, {'WGMSIM_API_KEYS': self.test_api_key})
        self.env_patcher.start()
        self.client = APIClient()
        self.client.credentials(HTTP_AUTHORIZATION=f'Bearer {self.test_api_key}')
        cache.clear()

    def tearDown(self):
        self.env_patcher.stop()
        cache.clear()


class PointAPITests(AuthenticatedAPITestCase):
    """Test single point evaluation"""

    def test_default_point(self):
        """Test the reference point returns every section of the report"""
        response = self.client.post('/api/v1/point/', {}, format='json')

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        data = response.data
        self.assertEqual(
            set(data),
            {'status', 'coordinates', 'derived', 'steady_state', 'stability',
             'entanglement', 'ellipses', 'notes', 'resolved_config'},
        )
        self.assertEqual(data['status'], 'ok')
        self.assertAlmostEqual(data['coordinates']['detuning_ratio'], 0.4)
        self.assertIn('system', data['resolved_config'])

        derived = default_config().derive()
        for name in DERIVED_FIELDS:
            self.assertAlmostEqual(data['derived'][name] / getattr(derived, name), 1.0, places=9, msg=name)

        state = data['steady_state']
        self.assertEqual(len(state['alpha_cw']), 2)
        self.assertGreater(state['photons_cw'], 0.0)
        self.assertIn('q_s', state)

        stability = data['stability']
        self.assertTrue(stability['stable'])
        self.assertLess(stability['max_real_part'], 0.0)
        self.assertEqual(len(stability['eigenvalues']), 6)
        self.assertEqual(len(stability['hurwitz']), 6)

        self.assertEqual(set(data['entanglement']), {'cw', 'ccw'})
        for result in data['entanglement'].values():
            self.assertGreaterEqual(result['E_N'], 0.0)
        self.assertEqual(set(data['ellipses']), {'q_X_cw', 'q_X_ccw'})
        for ellipse in data['ellipses'].values():
            self.assertEqual(set(ellipse), {'major', 'minor', 'angle', 'squeezed'})
            self.assertGreaterEqual(ellipse['major'], ellipse['minor'])

    def test_body_is_partial_config(self):
        """Test keys in the body override the reference point"""
        response = self.client.post('/api/v1/point/', {'system': {'temperature': 1.0}}, format='json')

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['resolved_config']['system']['temperature'], 1.0)
        self.assertGreater(response.data['derived']['n_m'], default_config().derive().n_m)

    def test_drive_theta(self):
        """Test drive.theta sets phase_cw relative to phase_ccw"""
        data = {'drive': {'phase_ccw': 1.0, 'theta': math.pi / 5}}
        response = self.client.post('/api/v1/point/', data, format='json')

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        drive = response.data['resolved_config']['drive']
        self.assertAlmostEqual(drive['phase_ccw'], 1.0)
        self.assertAlmostEqual(drive['phase_cw'], 1.0 + math.pi / 5)
        self.assertAlmostEqual(response.data['coordinates']['theta'], math.pi / 5)

    def test_drive_theta_conflict(self):
        """Test theta together with phase_cw maps to 400"""
        data = {'drive': {'phase_cw': 0.5, 'theta': 1.0}}
        response = self.client.post('/api/v1/point/', data, format='json')

        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['field'], 'drive.theta')

    @patch('sweeps.pipeline.eigen_stability', side_effect=unstable_report)
    def test_unstable_point(self, mock_stability):
        """Test an unstable point keeps the stability report and drops the measures"""
        response = self.client.post('/api/v1/point/', {}, format='json')

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['status'], 'unstable')
        self.assertFalse(response.data['stability']['stable'])
        self.assertEqual(response.data['entanglement'], {})
        self.assertEqual(response.data['ellipses'], {})
        self.assertIn('G0', response.data['derived'])

    def test_unknown_config_key(self):
        """Test an unknown config key maps to 400 with its path"""
        response = self.client.post('/api/v1/point/', {'drive': {'bogus': 1.0}}, format='json')

        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['field'], 'drive.bogus')

    def test_unknown_section(self):
        """Test an unknown top-level key maps to 400"""
        response = self.client.post('/api/v1/point/', {'outputs': ['E_N_cw']}, format='json')

        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['field'], 'outputs')

    def test_invalid_value(self):
        """Test a non-positive mass maps to 400"""
        response = self.client.post('/api/v1/point/', {'system': {'mass': -1.0}}, format='json')

        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('mass', response.data['field'])

    @patch('api.views.analyse_point', side_effect=NumericalError('eigenvalue solver failed'))
    def test_numerical_failure(self, mock_analyse):
        """Test numerical failures map to 422"""
        response = self.client.post('/api/v1/point/', {}, format='json')

        self.assertEqual(response.status_code, status.HTTP_422_UNPROCESSABLE_ENTITY)
        self.assertEqual(response.data['error'], 'NumericalError')
        mock_analyse.assert_called_once()


class SweepAPITests(AuthenticatedAPITestCase):
    """Test scenario listing and sweeps"""

    def small_spec(self):
        return {
            'spec': {
                'name': 'api-test',
                'axes': [{'name': 'detuning_ratio', 'min': 0.2, 'max': 0.6, 'count': 3}],
                'outputs': ['E_N_cw', 'stable'],
            }
        }

    def test_list_scenarios(self):
        """Test every preset is listed"""
        response = self.client.get('/api/v1/scenarios/')

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        names = [entry['name'] for entry in response.data['scenarios']]
        self.assertIn('fig2a', names)
        self.assertIn('fig6', names)

    def test_custom_sweep(self):
        """Test a three-point detuning sweep"""
        response = self.client.post('/api/v1/sweeps/', self.small_spec(), format='json')

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['columns'], ['detuning_ratio', 'E_N_cw', 'stable', 'status'])
        rows = response.data['rows']
        self.assertEqual(len(rows), 3)
        self.assertTrue(math.isclose(rows[1]['detuning_ratio'], 0.4))
        self.assertEqual(response.data['provenance']['scenario'], 'api-test')

    def test_sweep_is_cached(self):
        """Test a repeated sweep is served from cache"""
        first = self.client.post('/api/v1/sweeps/', self.small_spec(), format='json')
        with patch('api.views.run_sweep') as mock_run:
            second = self.client.post('/api/v1/sweeps/', self.small_spec(), format='json')

        self.assertEqual(second.status_code, status.HTTP_200_OK)
        mock_run.assert_not_called()
        self.assertEqual(first.data['rows'], second.data['rows'])

    def test_scenario_over_budget(self):
        """Test presets larger than the API budget are rejected"""
        response = self.client.post('/api/v1/sweeps/', {'scenario': 'fig3ab'}, format='json')

        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['field'], 'axes')

    def test_scenario_and_spec_exclusive(self):
        """Test giving both a scenario and a spec is rejected"""
        data = {'scenario': 'fig2a', **self.small_spec()}
        response = self.client.post('/api/v1/sweeps/', data, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_bad_axis_name(self):
        """Test an unknown axis path is rejected"""
        data = self.small_spec()
        data['spec']['axes'][0]['name'] = 'system.bogus'
        response = self.client.post('/api/v1/sweeps/', data, format='json')

        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('axes', response.data['field'])
