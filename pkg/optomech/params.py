"""
Experimental parameters and the physical constants derived from them.

All rates are stored as given and converted to angular frequency (rad/s)
only inside derive_constants, so the frequency convention of a config file
is applied in exactly one place.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from .exceptions import ParameterValidationError

logger = logging.getLogger(__name__)

HBAR = constants.hbar
K_B = constants.k
C_LIGHT = constants.c
TWO_PI = 2.0 * math.pi

FREQUENCY_CONVENTIONS = ('angular', 'ordinary')

# Below this the delta-correlated Brownian noise model is questionable
MIN_MECHANICAL_Q = 100.0


def reduce_phase(phase):
    """Map an angle onto [0, 2π)."""
    reduced = math.fmod(float(phase), TWO_PI)
    if reduced < 0.0:
        reduced += TWO_PI
    if reduced >= TWO_PI:
        reduced = 0.0
    return reduced


def _require_positive(name, value):
    if value is None or not math.isfinite(value) or value <= 0.0:
        raise ParameterValidationError(name, f"must be a finite positive number, got {value!r}")


def _require_non_negative(name, value):
    if value is None or not math.isfinite(value) or value < 0.0:
        raise ParameterValidationError(name, f"must be a finite non-negative number, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Resonator and mechanical-mode parameters in SI units."""

    omega_m: float
    gamma_m: float
    temperature: float
    mass: float
    wavelength: float
    quality_c: float
    radius: float
    kappa_ex: float | None = None
    coupling_J: float | None = None
    coupling_ratio: float | None = None
    frequency_convention: str = 'angular'

    def __post_init__(self):
        for name in ('omega_m', 'gamma_m', 'mass', 'wavelength', 'quality_c', 'radius'):
            _require_positive(name, getattr(self, name))
        _require_non_negative('temperature', self.temperature)
        if self.kappa_ex is not None:
            _require_positive('kappa_ex', self.kappa_ex)
        if self.coupling_J is not None and self.coupling_ratio is not None:
            raise ParameterValidationError(
                'coupling_J', "give either coupling_J or coupling_ratio, not both"
            )
        if self.coupling_J is not None:
            _require_non_negative('coupling_J', self.coupling_J)
        if self.coupling_ratio is not None:
            _require_non_negative('coupling_ratio', self.coupling_ratio)
        if self.frequency_convention not in FREQUENCY_CONVENTIONS:
            raise ParameterValidationError(
                'frequency_convention',
                f"must be one of {', '.join(FREQUENCY_CONVENTIONS)}, got {self.frequency_convention!r}",
            )

    @property
    def rate_factor(self):
        """Multiplier turning the stored rates into rad/s."""
        return TWO_PI if self.frequency_convention == 'ordinary' else 1.0

    @property
    def quality_m(self):
        return self.omega_m / self.gamma_m


@dataclass(frozen=True)
class DriveConfig:
    """Input powers, phases and laser detuning of the two pumps."""

    power_cw: float
    power_ccw: float
    phase_cw: float = 0.0
    phase_ccw: float = 0.0
    detuning: float | None = None
    detuning_ratio: float | None = None

    def __post_init__(self):
        _require_non_negative('power_cw', self.power_cw)
        _require_non_negative('power_ccw', self.power_ccw)
        for name in ('phase_cw', 'phase_ccw'):
            value = getattr(self, name)
            if value is None or not math.isfinite(value):
                raise ParameterValidationError(name, f"must be a finite angle, got {value!r}")
            object.__setattr__(self, name, reduce_phase(value))
        if (self.detuning is None) == (self.detuning_ratio is None):
            raise ParameterValidationError(
                'detuning', "give exactly one of detuning or detuning_ratio"
            )
        value = self.detuning if self.detuning is not None else self.detuning_ratio
        if not math.isfinite(value):
            raise ParameterValidationError('detuning', f"must be finite, got {value!r}")

    @property
    def theta(self):
        """Phase difference θ = θ_cw − θ_ccw on [0, 2π)."""
        return reduce_phase(self.phase_cw - self.phase_ccw)

    @property
    def is_double_pump(self):
        return self.power_cw > 0.0 and self.power_ccw > 0.0

    def with_theta(self, theta):
        """Same drive with θ_cw moved so that θ_cw − θ_ccw equals ``theta``."""
        return replace(self, phase_cw=self.phase_ccw + theta)

    def with_detuning_ratio(self, ratio):
        return replace(self, detuning=None, detuning_ratio=ratio)

    def mirrored(self):
        """Relabel cw and ccw."""
        return replace(
            self,
            power_cw=self.power_ccw,
            power_ccw=self.power_cw,
            phase_cw=self.phase_ccw,
            phase_ccw=self.phase_cw,
        )


@dataclass(frozen=True)
class DerivedParams:
    """Every quantity downstream equations consume, in rad/s unless noted."""

    omega_c: float
    omega_l: float
    omega_m: float
    gamma_m: float
    kappa_0: float
    kappa_ex: float
    Gamma: float
    J: float
    delta_c: float
    G0: float
    eps_cw: float
    eps_ccw: float
    n_m: float
    notes: tuple = field(default=(), compare=False)

    @property
    def J_over_Gamma(self):
        return self.J / self.Gamma

    @property
    def detuning_ratio(self):
        return self.delta_c / self.omega_m


def thermal_occupation(omega_m, temperature):
    """Bose-Einstein phonon number; exactly zero at T = 0."""
    if temperature == 0.0:
        return 0.0
    return float(1.0 / np.expm1(HBAR * omega_m / (K_B * temperature)))


def derive_constants(params, drive):
    """Evaluate ω_c, κ₀, Γ, G₀, |ε_j| and n_m for one parameter point."""
    factor = params.rate_factor
    notes = []

    omega_m = params.omega_m * factor
    gamma_m = params.gamma_m * factor
    omega_c = TWO_PI * C_LIGHT / params.wavelength
    kappa_0 = omega_c / params.quality_c

    if params.kappa_ex is None:
        kappa_ex = kappa_0
        notes.append('kappa_ex defaulted to critical coupling (kappa_ex = kappa_0)')
    else:
        kappa_ex = params.kappa_ex * factor
    Gamma = kappa_0 + kappa_ex

    if params.coupling_ratio is not None:
        J = params.coupling_ratio * Gamma
    elif params.coupling_J is not None:
        J = params.coupling_J * factor
    else:
        J = 0.0

    if drive.detuning_ratio is not None:
        delta_c = drive.detuning_ratio * omega_m
    else:
        delta_c = drive.detuning * factor
    omega_l = omega_c - delta_c
    if omega_l <= 0.0:
        raise ParameterValidationError('detuning', "laser frequency omega_c - detuning must be positive")

    G0 = (omega_c / params.radius) * math.sqrt(HBAR / (params.mass * omega_m))

    # sqrt(P) factored out so that scaling P by s scales eps by sqrt(s)
    drive_scale = math.sqrt(2.0 * kappa_ex / (HBAR * omega_l))
    eps_cw = math.sqrt(drive.power_cw) * drive_scale
    eps_ccw = math.sqrt(drive.power_ccw) * drive_scale

    n_m = thermal_occupation(omega_m, params.temperature)

    if params.quality_m < MIN_MECHANICAL_Q:
        message = (
            f"mechanical Q = {params.quality_m:.3g} < {MIN_MECHANICAL_Q:g}; "
            "the delta-correlated thermal noise limit is not reliable"
        )
        logger.warning(message)
        notes.append(message)

    return DerivedParams(
        omega_c=omega_c,
        omega_l=omega_l,
        omega_m=omega_m,
        gamma_m=gamma_m,
        kappa_0=kappa_0,
        kappa_ex=kappa_ex,
        Gamma=Gamma,
        J=J,
        delta_c=delta_c,
        G0=G0,
        eps_cw=eps_cw,
        eps_ccw=eps_ccw,
        n_m=n_m,
        notes=tuple(notes),
    )


# Operating point of the experimentally feasible parameter table
REFERENCE_POWER = 28e-3

REFERENCE_SYSTEM = SystemParams(
    omega_m=63e6,
    gamma_m=500.0,
    temperature=130e-3,
    mass=10e-12,
    wavelength=1550e-9,
    quality_c=6.4e7,
    radius=1.1e-3,
    coupling_ratio=1.0,
)

REFERENCE_DRIVE = DriveConfig(
    power_cw=REFERENCE_POWER,
    power_ccw=REFERENCE_POWER,
    phase_cw=math.pi / 5,
    phase_ccw=0.0,
    detuning_ratio=0.4,
)
