"""
Independent routes to the steady-state covariance, used to cross-check the
Lyapunov solver:

* the moment equation dV/dt = A V + V Aᵀ + D integrated with classical
  fixed-step RK4;
* the integral V = ∫₀^∞ M(τ) D M(τ)ᵀ dτ with M(τ) = exp(Aτ), truncated and
  evaluated with composite Simpson.

Neither path touches gaussian.covariance.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from optomech.exceptions import NumericalError, ParameterValidationError, StabilityError

logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6
MAX_STEP_FRACTION = 0.1
DEFAULT_STEP_FRACTION = 0.05
MOMENT_HORIZON = 20.0
INTEGRAL_HORIZON = 30.0
EIGEN_CONDITION_LIMIT = 1e8
SIMPSON_CHUNK = 4096
MAX_QUADRATURE_NODES = 20_000_001


@dataclass(frozen=True, eq=False)
class MomentTrajectory:
    times: np.ndarray
    cms: np.ndarray
    dt: float
    steps: int

    @property
    def final(self):
        return self.cms[-1]

    def increments(self):
        """Frobenius distance between consecutive recorded V(t)."""
        return np.array([linalg.norm(b - a, 'fro') for a, b in zip(self.cms, self.cms[1:])])


def _slowest_rate(drift):
    max_real = float(np.max(linalg.eigvals(drift).real))
    if max_real == 0.0:
        raise NumericalError("drift matrix has a neutral eigenvalue; no decay time scale")
    return max_real


def _rk4_affine_step(drift, diffusion, dt):
    """One RK4 step of dV/dt = AV + VAᵀ + D as vec(V) ↦ P vec(V) + q."""
    n = drift.shape[0]
    identity = np.eye(n)
    generator = dt * (np.kron(identity, drift) + np.kron(drift, identity))
    eye = np.eye(n * n)
    g2 = generator @ generator
    g3 = g2 @ generator
    g4 = g3 @ generator
    propagator = eye + generator + g2 / 2.0 + g3 / 6.0 + g4 / 24.0
    forcing = dt * (eye + generator / 2.0 + g2 / 6.0 + g3 / 24.0) @ diffusion.flatten(order='F')
    return propagator, forcing


def _compose_power(propagator, forcing, count):
    """The affine step applied ``count`` times, by repeated squaring."""
    size = propagator.shape[0]
    result_p, result_q = np.eye(size), np.zeros(size)
    base_p, base_q = propagator, forcing
    while count:
        if count & 1:
            result_p, result_q = base_p @ result_p, base_p @ result_q + base_q
        count >>= 1
        if count:
            base_p, base_q = base_p @ base_p, base_p @ base_q + base_q
    return result_p, result_q


def integrate_moment_equation(drift, diffusion, initial=None, t_final=None, dt=None, records=200):
    """Fixed-step RK4 solution of the moment equation for any square A, D."""
    drift = np.asarray(drift, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    n = drift.shape[0]
    norm_a = linalg.norm(drift, 2)
    if initial is None:
        initial = np.zeros((n, n))
    initial = np.asarray(initial, dtype=float)

    if dt is None:
        dt = DEFAULT_STEP_FRACTION / norm_a
    elif dt * norm_a >= MAX_STEP_FRACTION:
        raise ParameterValidationError('dt', f"must be below {MAX_STEP_FRACTION}/||A|| = {MAX_STEP_FRACTION / norm_a:.3e}")
    if t_final is None:
        t_final = MOMENT_HORIZON / abs(_slowest_rate(drift))
    elif t_final <= 0.0:
        raise ParameterValidationError('t_final', "must be positive")

    steps = max(records, int(math.ceil(t_final / dt)))
    stride = int(math.ceil(steps / records))
    steps = stride * records
    dt = t_final / steps

    propagator, forcing = _rk4_affine_step(drift, diffusion, dt)
    stride_p, stride_q = _compose_power(propagator, forcing, stride)

    reference = max(linalg.norm(initial, 'fro'), linalg.norm(diffusion, 'fro') * t_final, np.finfo(float).tiny)
    state = initial.flatten(order='F')
    cms = [initial.copy()]
    for _ in range(records):
        state = stride_p @ state + stride_q
        current = state.reshape((n, n), order='F')
        size = linalg.norm(current, 'fro')
        if not np.isfinite(size) or size > DIVERGENCE_FACTOR * reference:
            raise NumericalError(f"moment integration diverged (||V|| = {size:.3e})")
        cms.append(0.5 * (current + current.T))

    times = np.linspace(0.0, t_final, records + 1)
    logger.debug(f"Moment equation: {steps} RK4 steps of {dt:.3e} s to t = {t_final:.3e} s")
    return MomentTrajectory(times=times, cms=np.array(cms), dt=dt, steps=steps)


def integrate_moments(model, V0=None, t_final=None, dt=None, records=200):
    """Moment-equation oracle for a LinearModel; V(t_final) approximates the steady state."""
    initial = V0.matrix if hasattr(V0, 'matrix') else V0
    return integrate_moment_equation(model.drift, model.diffusion, initial, t_final, dt, records)


def _exponential_sampler(drift):
    """Callable τ-array → stack of exp(Aτ); eigendecomposition when well conditioned."""
    eigenvalues, vectors = linalg.eig(drift)
    if np.linalg.cond(vectors) < EIGEN_CONDITION_LIMIT:
        inverse = linalg.inv(vectors)

        def sample(taus):
            phases = np.exp(np.outer(taus, eigenvalues))
            return np.einsum('ij,kj,jl->kil', vectors, phases, inverse).real

        return sample

    logger.debug("Eigenvectors ill-conditioned; propagating with expm")

    def sample(taus):
        step = taus[1] - taus[0] if len(taus) > 1 else 0.0
        current = linalg.expm(drift * taus[0])
        advance = linalg.expm(drift * step)
        stack = []
        for _ in taus:
            stack.append(current)
            current = advance @ current
        return np.array(stack)

    return sample


def quadrature_grid(drift, t_max=None, n_steps=None):
    """Default (t_max, n_steps) of the integral form; n_steps is even."""
    drift = np.asarray(drift, dtype=float)
    max_real = _slowest_rate(drift)
    if max_real >= 0.0:
        raise StabilityError(
            f"integral form requires a stable drift matrix (max Re eta = {max_real:.6g})",
            max_real_part=max_real,
        )
    if t_max is None:
        t_max = INTEGRAL_HORIZON / abs(max_real)
    if n_steps is None:
        n_steps = int(math.ceil(t_max * linalg.norm(drift, 2) / DEFAULT_STEP_FRACTION))
    return t_max, n_steps + n_steps % 2


def integral_covariance(drift, diffusion, t_max=None, n_steps=None):
    """∫₀^t_max exp(Aτ) D exp(Aᵀτ) dτ by composite Simpson on an even number of intervals."""
    drift = np.asarray(drift, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    t_max, n_steps = quadrature_grid(drift, t_max, n_steps)
    if n_steps + 1 > MAX_QUADRATURE_NODES:
        raise NumericalError(
            f"integral form needs {n_steps} steps; pass t_max/n_steps explicitly for this model"
        )

    h = t_max / n_steps
    sample = _exponential_sampler(drift)
    total = np.zeros_like(diffusion)
    for start in range(0, n_steps, SIMPSON_CHUNK):
        stop = min(start + SIMPSON_CHUNK, n_steps)
        taus = h * np.arange(start, stop + 1)
        propagators = sample(taus)
        integrand = np.einsum('kij,jl,kml->kim', propagators, diffusion, propagators)
        total += integrate.simpson(integrand, dx=h, axis=0)
    return 0.5 * (total + total.T)


def integral_form_cm(model, t_max=None, n_steps=None):
    """Integral-form oracle for a LinearModel."""
    return integral_covariance(model.drift, model.diffusion, t_max, n_steps)


def relative_difference(first, second):
    """‖first − second‖_F / ‖second‖_F."""
    first = first.matrix if hasattr(first, 'matrix') else first
    second = second.matrix if hasattr(second, 'matrix') else second
    return float(linalg.norm(first - second, 'fro') / linalg.norm(second, 'fro'))
