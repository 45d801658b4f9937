"""
Full evaluation of one parameter point:
derive → steady state → linear model → stability → Lyapunov → measures.

evaluate_point is the unit of work shipped to sweep workers, so it takes
every tolerance explicitly and returns a flat row of plain values.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from gaussian.covariance import solve_lyapunov
from gaussian.entanglement import entanglement_pair
from gaussian.squeezing import ALLOWED_PAIRS, ASYMMETRY_PAIRS, pair_name, wigner_ellipse
from optomech.exceptions import ParameterValidationError, SimulationError
from optomech.linear_model import build_linear_model, eigen_stability
from optomech.steady_state import intracavity_photons, solve_steady_state
from optomech.utils import get_setting

logger = logging.getLogger(__name__)

STATUS_OK = 'ok'
STATUS_UNSTABLE = 'unstable'
STATUS_NO_CONVERGE = 'no_converge'
STATUSES = (STATUS_OK, STATUS_UNSTABLE, STATUS_NO_CONVERGE)

# NumPy/SciPy errors that escape the pipeline checks; rows report no_converge
NUMERICAL_FAILURES = (np.linalg.LinAlgError, ValueError, FloatingPointError)

STATE_OUTPUTS = ('photons_cw', 'photons_ccw', 'q_s', 'delta_eff')
STABILITY_OUTPUTS = ('lambda6', 'max_real_part', 'stable')
ENTANGLEMENT_OUTPUTS = ('E_N_cw', 'E_N_ccw', 'nu_minus_cw', 'nu_minus_ccw')
ELLIPSE_OUTPUTS = tuple(f"ellipse_{pair_name(pair)}" for pair in ALLOWED_PAIRS)
ELLIPSE_FIELDS = ('major', 'minor', 'angle', 'squeezed')
OUTPUTS = STATE_OUTPUTS + STABILITY_OUTPUTS + ENTANGLEMENT_OUTPUTS + ELLIPSE_OUTPUTS

DEFAULT_OUTPUTS = ('E_N_cw', 'E_N_ccw', 'stable')

DERIVED_FIELDS = (
    'omega_c', 'omega_l', 'omega_m', 'gamma_m', 'kappa_0', 'kappa_ex', 'Gamma',
    'J', 'delta_c', 'G0', 'eps_cw', 'eps_ccw', 'n_m',
)


def validate_outputs(outputs):
    outputs = tuple(outputs)
    if not outputs:
        raise ParameterValidationError('outputs', "request at least one output")
    unknown = [name for name in outputs if name not in OUTPUTS]
    if unknown:
        raise ParameterValidationError(
            'outputs', f"unknown output(s) {', '.join(unknown)}; available: {', '.join(OUTPUTS)}"
        )
    return outputs


def output_columns(outputs):
    """Column names produced by ``outputs``; ellipse outputs expand to four columns each."""
    columns = []
    for name in outputs:
        if name in ELLIPSE_OUTPUTS:
            columns += [f"{name}_{suffix}" for suffix in ELLIPSE_FIELDS]
        else:
            columns.append(name)
    return columns


def resolve_tolerances():
    """Snapshot of the numerical tolerances, taken once in the parent process."""
    return {
        'stability_margin': get_setting('STABILITY_MARGIN'),
        'lyapunov_tolerance': get_setting('LYAPUNOV_RESIDUAL_TOLERANCE'),
        'physicality_tolerance': get_setting('PHYSICALITY_TOLERANCE'),
    }


@dataclass
class PointAnalysis:
    """Every intermediate object of one evaluated point."""

    config: object
    derived: object = None
    state: object = None
    model: object = None
    stability: object = None
    covariance: object = None
    entanglement: dict = field(default_factory=dict)
    ellipses: dict = field(default_factory=dict)
    status: str = STATUS_OK

    @property
    def warnings(self):
        notes = list(self.derived.notes) if self.derived else []
        if self.state:
            notes += list(self.state.warnings)
        return tuple(notes)


def analyse_point(config, pairs=ASYMMETRY_PAIRS, tolerances=None):
    """Run the pipeline and keep every intermediate.

    An unstable drift matrix is not an error here: the analysis stops after
    the stability report with status 'unstable'. Pipeline exceptions
    propagate.
    """
    tolerances = tolerances or resolve_tolerances()
    analysis = PointAnalysis(config=config)
    analysis.derived = config.derive()
    analysis.state = solve_steady_state(analysis.derived, config.system, config.drive, config.solver)
    analysis.model = build_linear_model(analysis.state, analysis.derived, config.system)
    analysis.stability = eigen_stability(analysis.model, tolerances['stability_margin'])
    if not analysis.stability.stable:
        analysis.status = STATUS_UNSTABLE
        return analysis

    analysis.covariance = solve_lyapunov(
        analysis.model,
        stability=analysis.stability,
        tolerance=tolerances['lyapunov_tolerance'],
        physicality_tolerance=tolerances['physicality_tolerance'],
    )
    analysis.entanglement = entanglement_pair(analysis.covariance, tolerances['physicality_tolerance'])
    for pair in pairs:
        analysis.ellipses[pair] = wigner_ellipse(
            analysis.covariance, pair, tolerances['physicality_tolerance']
        )
    return analysis


def coordinates(config, derived=None):
    """Dimensionless coordinates used by the single-point commands."""
    derived = derived or config.derive()
    return {
        'theta': config.drive.theta,
        'detuning_ratio': derived.detuning_ratio,
        'J_over_Gamma': derived.J_over_Gamma,
    }


def _empty_row(columns):
    return {column: math.nan for column in columns}


def evaluate_point(config, outputs=DEFAULT_OUTPUTS, tolerances=None):
    """One sweep row: requested outputs plus 'status'.

    Failures never escape: unstable points keep their stability columns and
    leave the Gaussian measures NaN; solver failures leave everything NaN.
    """
    pairs = [tuple(p) for p in ALLOWED_PAIRS if f"ellipse_{pair_name(p)}" in outputs]
    try:
        analysis = analyse_point(config, pairs=pairs, tolerances=tolerances)
    except SimulationError as exc:
        logger.warning(f"Point failed ({type(exc).__name__}): {exc}")
    except NUMERICAL_FAILURES as exc:
        logger.warning(f"Numerical failure ({type(exc).__name__}) at theta={config.drive.theta:.4f}: {exc}")
    else:
        return row_from_analysis(analysis, outputs)
    row = _empty_row(output_columns(outputs))
    row['status'] = STATUS_NO_CONVERGE
    return row


def row_from_analysis(analysis, outputs):
    """Flatten a PointAnalysis into the requested output columns plus 'status'."""
    columns = output_columns(outputs)
    row = _empty_row(columns)
    state, stability = analysis.state, analysis.stability
    photons = intracavity_photons(state)
    values = {
        'photons_cw': photons[0],
        'photons_ccw': photons[1],
        'q_s': state.q_s,
        'delta_eff': state.delta_eff,
        'lambda6': stability.lambda6,
        'max_real_part': stability.max_real_part,
        'stable': stability.stable,
    }
    if analysis.status == STATUS_OK:
        for name, result in analysis.entanglement.items():
            values[f"E_N_{name}"] = result.E_N
            values[f"nu_minus_{name}"] = result.nu_minus
        for pair, ellipse in analysis.ellipses.items():
            prefix = f"ellipse_{pair_name(pair)}"
            values[f"{prefix}_major"] = ellipse.major
            values[f"{prefix}_minor"] = ellipse.minor
            values[f"{prefix}_angle"] = ellipse.angle
            values[f"{prefix}_squeezed"] = ellipse.squeezed

    for column in columns:
        if column in values:
            row[column] = values[column]
    row['status'] = analysis.status
    return row
