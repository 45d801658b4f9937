"""
Named sweep presets.

Each preset starts from the reference operating point (or a caller-supplied
base config), pins the parameters the preset holds fixed and declares the
swept axes. Axis ranges chosen here are recorded in the spec notes and end
up in the provenance header.
"""
import math
from dataclasses import replace

from optomech.exceptions import ParameterValidationError

from .engine import Axis, SweepSpec

TWO_PI = 2.0 * math.pi

SINGLE_PUMP = (('drive.power_ccw', 0.0), ('drive.phase_cw', 0.0), ('drive.phase_ccw', 0.0))
DOUBLE_PUMP_THETA0 = (('drive.phase_ccw', 0.0), ('theta', 0.0))

DETUNING_AXIS = Axis('detuning_ratio', 0.0, 2.0, 201)
COUPLING_AXIS = Axis('J_over_Gamma', 0.0, 1.0, 3)
THETA_AXIS = Axis('theta', 0.0, TWO_PI, 200, endpoint=False)
TEMPERATURE_AXIS = Axis('temperature', 0.01, 10.0, 41, scale='log')
QUALITY_AXIS = Axis('quality_c', 1e6, 1e9, 31, scale='log')

ENTANGLEMENT = ('E_N_cw', 'E_N_ccw', 'stable')
RANGE_NOTE = 'axis range chosen to bracket the reference operating point'


def _fig2(name, description, fixed, outputs):
    return SweepSpec(
        name=name,
        description=description,
        fixed=fixed,
        axes=(COUPLING_AXIS, DETUNING_AXIS),
        outputs=outputs + ('photons_cw', 'photons_ccw'),
    )


def _fig6(name, description, fixed):
    return SweepSpec(
        name=name,
        description=description,
        fixed=fixed + (('J_over_Gamma', 1.0),),
        axes=(TEMPERATURE_AXIS, QUALITY_AXIS),
        outputs=ENTANGLEMENT,
        notes=(RANGE_NOTE,),
    )


SCENARIOS = {
    'fig2a': lambda: _fig2(
        'fig2a', 'Single pump: E_N(cw-mech) vs detuning for J/Gamma in {0, 0.5, 1}',
        SINGLE_PUMP, ('E_N_cw', 'E_N_ccw', 'stable'),
    ),
    'fig2b': lambda: _fig2(
        'fig2b', 'Single pump: E_N(ccw-mech) vs detuning for J/Gamma in {0, 0.5, 1}',
        SINGLE_PUMP, ('E_N_ccw', 'E_N_cw', 'stable'),
    ),
    'fig2c': lambda: _fig2(
        'fig2c', 'Double pump, theta = 0: E_N(cw-mech) vs detuning for J/Gamma in {0, 0.5, 1}',
        DOUBLE_PUMP_THETA0, ('E_N_cw', 'E_N_ccw', 'stable'),
    ),
    'fig2d': lambda: _fig2(
        'fig2d', 'Double pump, theta = 0: E_N(ccw-mech) vs detuning for J/Gamma in {0, 0.5, 1}',
        DOUBLE_PUMP_THETA0, ('E_N_ccw', 'E_N_cw', 'stable'),
    ),
    'fig3ab': lambda: SweepSpec(
        name='fig3ab',
        description='Double pump, J/Gamma = 1: E_N of both bipartitions over (theta, detuning)',
        fixed=(('J_over_Gamma', 1.0),),
        axes=(THETA_AXIS, DETUNING_AXIS),
        outputs=ENTANGLEMENT,
        notes=(RANGE_NOTE,),
    ),
    'fig3c': lambda: SweepSpec(
        name='fig3c',
        description='Double pump, J/Gamma = 1: E_N vs theta at detuning 0.4 and 0.8 omega_m',
        fixed=(('J_over_Gamma', 1.0),),
        axes=(Axis('detuning_ratio', 0.4, 0.8, 2), Axis('theta', 0.0, TWO_PI, 360, endpoint=False)),
        outputs=ENTANGLEMENT,
    ),
    'fig4a': lambda: SweepSpec(
        name='fig4a',
        description='Double pump, J/Gamma = 1: Routh-Hurwitz Lambda_6 over (theta, detuning)',
        fixed=(('J_over_Gamma', 1.0),),
        axes=(THETA_AXIS, DETUNING_AXIS),
        outputs=('lambda6', 'max_real_part', 'stable'),
        notes=(RANGE_NOTE,),
    ),
    'fig4b': lambda: SweepSpec(
        name='fig4b',
        description='Double pump, J/Gamma = 1: E_N vs detuning at theta = 0 and pi/5',
        fixed=(('J_over_Gamma', 1.0), ('drive.phase_ccw', 0.0)),
        axes=(Axis('theta', 0.0, math.pi / 5, 2), DETUNING_AXIS),
        outputs=ENTANGLEMENT,
    ),
    'fig5': lambda: SweepSpec(
        name='fig5',
        description='Wigner 1/e ellipses of (q, X_cw) and (q, X_ccw) at detuning 0.4, theta = pi/5 and 9pi/5',
        fixed=(('J_over_Gamma', 1.0), ('detuning_ratio', 0.4), ('drive.phase_ccw', 0.0)),
        axes=(Axis('theta', math.pi / 5, 9 * math.pi / 5, 2),),
        outputs=('ellipse_q_X_cw', 'ellipse_q_X_ccw', 'E_N_cw', 'E_N_ccw'),
    ),
    'fig6': lambda: _fig6(
        'fig6', 'Single pump at detuning 1.1: E_N over (T, Q_c)',
        SINGLE_PUMP + (('detuning_ratio', 1.1),),
    ),
    'fig6_double_theta0': lambda: _fig6(
        'fig6_double_theta0', 'Double pump, theta = 0, detuning 0.27: E_N over (T, Q_c)',
        DOUBLE_PUMP_THETA0 + (('detuning_ratio', 0.27),),
    ),
    'fig6_double_theta_pi5': lambda: _fig6(
        'fig6_double_theta_pi5', 'Double pump, theta = pi/5, detuning 0.4: E_N over (T, Q_c)',
        (('drive.phase_ccw', 0.0), ('theta', math.pi / 5), ('detuning_ratio', 0.4)),
    ),
}


def scenario(name, base=None):
    """The frozen spec of a named preset, optionally on top of ``base``."""
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise ParameterValidationError(
            'scenario', f"unknown scenario {name!r}; available: {', '.join(SCENARIOS)}"
        )
    spec = factory()
    if base is not None:
        spec = replace(spec, base=base)
    return spec


def list_scenarios():
    """(name, description, grid size) of every preset."""
    listing = []
    for name, factory in SCENARIOS.items():
        spec = factory()
        listing.append({'name': name, 'description': spec.description, 'grid_size': spec.grid_size})
    return listing
