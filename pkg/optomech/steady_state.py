"""
Self-consistent classical steady state of the two driven optical modes and
the mechanical displacement.

The closed-form cavity amplitudes depend on the effective detuning
Δ = Δ_c − G₀ q_s, which in turn depends on the photon numbers, so the
steady state is the fixed point of q ↦ G₀(|α_cw(q)|² + |α_ccw(q)|²)/ω_m.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .exceptions import ConvergenceError
from .utils import get_setting

logger = logging.getLogger(__name__)

# Window used to decide that the damped iteration is no longer contracting
STALL_WINDOW = 100
OSCILLATION_WINDOW = 20


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = None
    max_iterations: int = None
    damping: float = None
    scan_points: int = None

    def __post_init__(self):
        defaults = {
            'tolerance': 'STEADY_STATE_TOLERANCE',
            'max_iterations': 'STEADY_STATE_MAX_ITERATIONS',
            'damping': 'STEADY_STATE_DAMPING',
            'scan_points': 'BISECTION_SCAN_POINTS',
        }
        for name, key in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, get_setting(key))


@dataclass(frozen=True)
class SteadyState:
    alpha_cw: complex
    alpha_ccw: complex
    q_s: float
    delta_eff: float
    p_s: float = 0.0
    residual: float = 0.0
    iterations: int = 0
    method: str = 'fixed_point'
    roots: tuple = ()
    warnings: tuple = field(default=(), compare=False)

    @property
    def photons_cw(self):
        return abs(self.alpha_cw) ** 2

    @property
    def photons_ccw(self):
        return abs(self.alpha_ccw) ** 2

    @property
    def is_multistable(self):
        return len(self.roots) > 1


def drive_fields(derived, drive):
    """Complex drive terms ε_j e^{-iθ_j}."""
    return (
        derived.eps_cw * np.exp(-1j * drive.phase_cw),
        derived.eps_ccw * np.exp(-1j * drive.phase_ccw),
    )


def cavity_amplitudes(derived, drive, delta):
    """Closed-form α_cw, α_ccw at effective detuning ``delta``.

    Written symmetrically in the two modes (the common e^{-iθ_ccw} factor is
    distributed) so that relabelling cw↔ccw swaps the outputs bit for bit.
    ``delta`` may be an array.
    """
    f_cw, f_ccw = drive_fields(derived, drive)
    loss = 1j * delta + derived.Gamma
    denominator = loss * loss + derived.J ** 2
    alpha_cw = (f_cw * loss - 1j * derived.J * f_ccw) / denominator
    alpha_ccw = (f_ccw * loss - 1j * derived.J * f_cw) / denominator
    return alpha_cw, alpha_ccw


def radiation_pressure_displacement(derived, drive, q):
    """G₀(|α_cw|² + |α_ccw|²)/ω_m with the amplitudes evaluated at q."""
    alpha_cw, alpha_ccw = cavity_amplitudes(derived, drive, derived.delta_c - derived.G0 * q)
    photons = np.abs(alpha_cw) ** 2 + np.abs(alpha_ccw) ** 2
    return derived.G0 * photons / derived.omega_m


def _converged(q, residual, tolerance):
    return residual <= tolerance * max(1.0, abs(q))


def _damped_iteration(derived, drive, options):
    """Damped fixed-point iteration from q = 0.

    Returns (q, residual, history, iterations, reason) where reason is
    'converged', 'oscillating', 'stalled' or 'budget'.
    """
    beta = options.damping
    q = 0.0
    history = []
    steps = []
    for iteration in range(1, options.max_iterations + 1):
        target = float(radiation_pressure_displacement(derived, drive, q))
        step = target - q
        residual = abs(step)
        history.append(residual)
        if _converged(q, residual, options.tolerance):
            return q, residual, history, iteration, 'converged'

        steps.append(step)
        if len(steps) > OSCILLATION_WINDOW:
            recent = steps[-OSCILLATION_WINDOW:]
            alternating = all(a * b < 0.0 for a, b in zip(recent, recent[1:]))
            if alternating and history[-1] >= 0.999 * history[-3]:
                return q, residual, history, iteration, 'oscillating'
        if iteration > STALL_WINDOW and residual > 0.99 * history[-STALL_WINDOW]:
            return q, residual, history, iteration, 'stalled'

        q = (1.0 - beta) * q + beta * target
    return q, history[-1], history, options.max_iterations, 'budget'


def _bracket_roots(derived, drive, q_max, scan_points):
    """All sign changes of f(q) = q − G₀N(q)/ω_m on [0, q_max], refined by bisection."""
    grid = np.linspace(0.0, q_max, scan_points)
    values = grid - radiation_pressure_displacement(derived, drive, grid)

    def residual(q):
        return q - float(radiation_pressure_displacement(derived, drive, q))

    roots = []
    for left, right, f_left, f_right in zip(grid, grid[1:], values, values[1:]):
        if f_left == 0.0:
            roots.append(float(left))
        elif f_left * f_right < 0.0:
            roots.append(optimize.bisect(residual, left, right, xtol=1e-15 * max(1.0, q_max), maxiter=400))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _zero_state(derived):
    return SteadyState(alpha_cw=0j, alpha_ccw=0j, q_s=0.0, delta_eff=derived.delta_c, iterations=0)


def solve_steady_state(derived, params, drive, options=None):
    """Fixed point of {α_j(Δ), q_s(α), Δ(q_s)}.

    Uses damped iteration from q_s = 0; when that oscillates or stalls it
    falls back to scanning and bisecting the scalar residual and returns the
    smallest root, attaching a multistability warning if there are several.
    ``params`` is accepted for call symmetry with the other pipeline stages.
    """
    options = options or SolverOptions()
    if derived.eps_cw == 0.0 and derived.eps_ccw == 0.0:
        return _zero_state(derived)

    q, residual, history, iterations, reason = _damped_iteration(derived, drive, options)
    warnings = []
    roots = ()
    method = 'fixed_point'

    if reason != 'converged':
        logger.debug(f"Fixed-point iteration {reason} after {iterations} steps; bisecting")
        eps_max = max(derived.eps_cw, derived.eps_ccw)
        q_max = 2.0 * derived.G0 * (eps_max ** 2 / derived.Gamma ** 2) * 2.0 / derived.omega_m
        found = _bracket_roots(derived, drive, q_max, options.scan_points)
        if not found:
            raise ConvergenceError(
                f"no steady state found on [0, {q_max:.6g}] (iteration {reason})",
                residual_history=history,
            )
        roots = tuple(found)
        q = roots[0]
        residual = abs(q - float(radiation_pressure_displacement(derived, drive, q)))
        method = 'bisection'
        if reason == 'oscillating':
            warnings.append('fixed-point iteration oscillated between branches')
        if len(roots) > 1:
            message = (
                f"multistable steady state: {len(roots)} roots q_s = "
                + ', '.join(f"{root:.10g}" for root in roots)
                + "; returning the smallest"
            )
            logger.warning(message)
            warnings.append(message)
        if not _converged(q, residual, options.tolerance):
            raise ConvergenceError(
                f"bisection residual {residual:.3e} above tolerance {options.tolerance:.1e}",
                residual_history=history + [residual],
            )
    else:
        logger.debug(f"Steady state converged in {iterations} iterations (q_s = {q:.6g})")

    delta_eff = derived.delta_c - derived.G0 * q
    alpha_cw, alpha_ccw = cavity_amplitudes(derived, drive, delta_eff)
    return SteadyState(
        alpha_cw=complex(alpha_cw),
        alpha_ccw=complex(alpha_ccw),
        q_s=float(q),
        delta_eff=float(delta_eff),
        residual=float(residual),
        iterations=iterations,
        method=method,
        roots=roots,
        warnings=tuple(warnings),
    )


def intracavity_photons(state):
    """Photon numbers (|α_cw|², |α_ccw|²)."""
    return state.photons_cw, state.photons_ccw

