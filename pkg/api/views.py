"""
API views for running simulations over HTTP.

All endpoints except status/ require API key authentication. Sweeps run
in-process on a single worker and are capped at API_MAX_POINTS grid nodes.
"""
import logging

from django.conf import settings
from django.core.cache import cache
from django.urls import reverse
from django.utils import timezone
from rest_framework import status
from rest_framework.decorators import api_view, authentication_classes, permission_classes
from rest_framework.permissions import AllowAny
from rest_framework.response import Response
from rest_framework.views import exception_handler

import wgmsim
from gaussian.squeezing import ASYMMETRY_PAIRS, pair_name
from optomech.config import build_config, validation_error
from optomech.exceptions import ParameterValidationError, SimulationError
from optomech.utils import get_setting
from sweeps.engine import run_sweep
from sweeps.export import clean_value, table_records
from sweeps.pipeline import DERIVED_FIELDS, analyse_point, coordinates
from sweeps.scenarios import list_scenarios, scenario
from sweeps.serializers import SweepSpecSerializer

from .serializers import SweepRequestSerializer

logger = logging.getLogger(__name__)

# (url name, method, needs an API key, summary)
ENDPOINTS = (
    ('api-status', 'GET', False, 'service status and endpoint list'),
    ('api-scenarios', 'GET', True, 'named sweep presets and their grid sizes'),
    ('api-point', 'POST', True, 'evaluate one parameter point from a partial config'),
    ('api-sweeps', 'POST', True, 'run a named scenario or a custom sweep spec'),
)


def simulation_exception_handler(exc, context):
    """DRF exception handler that also understands pipeline errors.

    ParameterValidationError → 400, any other SimulationError → 422.
    """
    if isinstance(exc, ParameterValidationError):
        return Response(
            {'status': 'error', 'field': exc.field, 'message': str(exc)},
            status=status.HTTP_400_BAD_REQUEST,
        )
    if isinstance(exc, SimulationError):
        logger.warning(f"Simulation failed ({type(exc).__name__}): {exc}")
        return Response(
            {'status': 'error', 'error': type(exc).__name__, 'message': str(exc)},
            status=status.HTTP_422_UNPROCESSABLE_ENTITY,
        )
    return exception_handler(exc, context)


def _validated(serializer):
    if not serializer.is_valid():
        raise validation_error(serializer.errors)
    return serializer.validated_data


def _complex(value):
    return [float(value.real), float(value.imag)]


def _derived_payload(derived):
    payload = {name: float(getattr(derived, name)) for name in DERIVED_FIELDS}
    payload['J_over_Gamma'] = float(derived.J_over_Gamma)
    payload['detuning_ratio'] = float(derived.detuning_ratio)
    return payload


def _state_payload(state):
    return {
        'alpha_cw': _complex(state.alpha_cw),
        'alpha_ccw': _complex(state.alpha_ccw),
        'photons_cw': float(state.photons_cw),
        'photons_ccw': float(state.photons_ccw),
        'q_s': float(state.q_s),
        'p_s': float(state.p_s),
        'delta_eff': float(state.delta_eff),
        'residual': float(state.residual),
        'iterations': int(state.iterations),
        'method': state.method,
        'roots': [float(root) for root in state.roots],
    }


def _stability_payload(report):
    eigenvalues = sorted(report.eigenvalues, key=lambda z: (z.real, z.imag))
    return {
        'stable': bool(report.stable),
        'stable_by_rh': bool(report.stable_by_rh),
        'max_real_part': float(report.max_real_part),
        'margin': float(report.margin),
        'lambda6': report.lambda6,
        'char_coeffs': [float(value) for value in report.char_coeffs],
        'hurwitz': [float(value) for value in report.hurwitz],
        'eigenvalues': [_complex(value) for value in eigenvalues],
    }


@api_view(['GET'])
@authentication_classes([])
@permission_classes([AllowAny])
def api_status(request):
    """
    GET /api/v1/status/

    Public health check with the endpoint list.
    """
    endpoints = [
        {'path': reverse(name), 'method': method, 'auth': auth, 'description': summary}
        for name, method, auth, summary in ENDPOINTS
    ]
    return Response({
        'status': 'online',
        'version': wgmsim.__version__,
        'timestamp': timezone.now().isoformat(),
        'max_points': get_setting('API_MAX_POINTS'),
        'endpoints': endpoints,
    }, status=status.HTTP_200_OK)


@api_view(['GET'])
def scenarios(request):
    """
    GET /api/v1/scenarios/

    Named sweep presets with their grid sizes.
    """
    listing = cache.get('scenario_list')
    if listing is None:
        listing = list_scenarios()
        cache.set('scenario_list', listing, settings.CACHE_TTL['scenario_list'])
    return Response({'scenarios': listing}, status=status.HTTP_200_OK)


@api_view(['POST'])
def point(request):
    """
    POST /api/v1/point/

    Evaluate one parameter point. The body is a partial config; missing
    keys take the reference operating point.
    Request body:
        {"drive": {"detuning_ratio": 0.8, "theta": 0.6283}, "system": {"temperature": 1.0}}

    An unstable point still returns derived constants, steady state and the
    stability report, with status "unstable" and empty measures.
    """
    config = build_config(request.data)
    analysis = analyse_point(config, pairs=ASYMMETRY_PAIRS)
    entanglement = {
        name: {'E_N': float(result.E_N), 'nu_minus': float(result.nu_minus), 'entangled': bool(result.entangled)}
        for name, result in analysis.entanglement.items()
    }
    ellipses = {
        pair_name(pair): {
            'major': float(ellipse.major),
            'minor': float(ellipse.minor),
            'angle': float(ellipse.angle),
            'squeezed': bool(ellipse.squeezed),
        }
        for pair, ellipse in analysis.ellipses.items()
    }
    return Response(clean_value({
        'status': analysis.status,
        'coordinates': coordinates(config, analysis.derived),
        'derived': _derived_payload(analysis.derived),
        'steady_state': _state_payload(analysis.state),
        'stability': _stability_payload(analysis.stability),
        'entanglement': entanglement,
        'ellipses': ellipses,
        'notes': list(analysis.warnings),
        'resolved_config': config.as_dict(),
    }), status=status.HTTP_200_OK)


@api_view(['POST'])
def sweeps(request):
    """
    POST /api/v1/sweeps/

    Run a named scenario or a custom sweep spec.
    Request body:
        {"scenario": "fig4b", "base": {"system": {"temperature": 1.0}}}
    or
        {"spec": {"axes": [{"name": "detuning_ratio", "min": 0, "max": 2, "count": 41}]}}

    Results are cached per resolved spec for CACHE_TTL['sweep_results'] seconds.
    """
    data = _validated(SweepRequestSerializer(data=request.data))
    base = data['base']
    if 'scenario' in data:
        spec = scenario(data['scenario'], base=build_config(base) if base else None)
    else:
        spec_serializer = SweepSpecSerializer(data=data['spec'])
        _validated(spec_serializer)
        spec = spec_serializer.create_spec(base)

    max_points = get_setting('API_MAX_POINTS')
    spec.validate(max_points)
    key = spec.cache_key()
    document = cache.get(key)
    if document is None:
        result = run_sweep(spec, workers=1, max_points=max_points)
        document = {
            'provenance': clean_value(result.provenance),
            'columns': list(result.frame.columns),
            'rows': table_records(result.frame),
        }
        cache.set(key, document, settings.CACHE_TTL['sweep_results'])
        logger.info(
            f"API sweep '{spec.name}' computed for {request.user}: "
            f"{len(result.frame)} rows in {result.elapsed:.2f}s"
        )
    else:
        logger.debug(f"API sweep '{spec.name}' served from cache")
    return Response(document, status=status.HTTP_200_OK)
