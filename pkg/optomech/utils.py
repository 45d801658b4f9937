from django.conf import settings


DEFAULTS = {
    'STEADY_STATE_TOLERANCE': 1e-10,
    'STEADY_STATE_MAX_ITERATIONS': 10_000,
    'STEADY_STATE_DAMPING': 0.5,
    'BISECTION_SCAN_POINTS': 2001,
    'STABILITY_MARGIN': 1e-6,
    'LYAPUNOV_RESIDUAL_TOLERANCE': 1e-10,
    'PHYSICALITY_TOLERANCE': 1e-8,
    'SWEEP_MAX_POINTS': 1_000_000,
    'SWEEP_WORKERS': '',
    'SWEEP_CHUNK_SIZE': 64,
    'CSV_SIGNIFICANT_DIGITS': 12,
    'API_MAX_POINTS': 2500,
}


def get_setting(name):
    """Read a key of settings.SIMULATION, falling back to the module default.

    Works without configured settings so the numerical modules can be
    imported from plain scripts and worker processes.
    """
    if settings.configured:
        value = getattr(settings, 'SIMULATION', {}).get(name)
        if value is not None:
            return value
    return DEFAULTS[name]
