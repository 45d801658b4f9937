"""
Linearised fluctuation dynamics u̇ = A u + v around the steady state and the
two stability certificates used before any covariance is computed: the
eigenvalues of A and the Routh-Hurwitz determinants of its characteristic
polynomial.

Quadrature ordering everywhere: (δX_cw, δY_cw, δX_ccw, δY_ccw, δq, δp).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import NumericalError
from .utils import get_setting

logger = logging.getLogger(__name__)

QUADRATURES = ('X_cw', 'Y_cw', 'X_ccw', 'Y_ccw', 'q', 'p')


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LinearModel:
    drift: np.ndarray
    diffusion: np.ndarray
    G_cw: complex
    G_ccw: complex
    delta_eff: float
    Gamma: float
    J: float
    omega_m: float
    gamma_m: float
    n_m: float

    @classmethod
    def from_rates(cls, *, Gamma, delta, J, G_cw, G_ccw, omega_m, gamma_m, n_m):
        """Assemble A and D from the effective rates."""
        gx_cw, gy_cw = G_cw.real, G_cw.imag
        gx_ccw, gy_ccw = G_ccw.real, G_ccw.imag
        drift = np.array([
            [-Gamma, delta, 0.0, J, -gy_cw, 0.0],
            [-delta, -Gamma, -J, 0.0, gx_cw, 0.0],
            [0.0, J, -Gamma, delta, -gy_ccw, 0.0],
            [-J, 0.0, -delta, -Gamma, gx_ccw, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, omega_m],
            [gx_cw, gy_cw, gx_ccw, gy_ccw, -omega_m, -gamma_m],
        ])
        diffusion = np.diag([Gamma, Gamma, Gamma, Gamma, 0.0, gamma_m * (2.0 * n_m + 1.0)])
        return cls(
            drift=_frozen(drift),
            diffusion=_frozen(diffusion),
            G_cw=complex(G_cw),
            G_ccw=complex(G_ccw),
            delta_eff=float(delta),
            Gamma=float(Gamma),
            J=float(J),
            omega_m=float(omega_m),
            gamma_m=float(gamma_m),
            n_m=float(n_m),
        )

    @property
    def dimension(self):
        return self.drift.shape[0]


@dataclass(frozen=True, eq=False)
class StabilityReport:
    eigenvalues: np.ndarray
    max_real_part: float
    char_coeffs: np.ndarray
    hurwitz: np.ndarray
    stable_by_eigen: bool
    stable_by_rh: bool
    margin: float

    @property
    def stable(self):
        return self.stable_by_eigen

    @property
    def lambda6(self):
        return float(self.hurwitz[-1])

    @property
    def certifiers_agree(self):
        return self.stable_by_eigen == self.stable_by_rh


def build_linear_model(state, derived, params=None):
    """Drift and diffusion matrices at a solved steady state.

    G_j = √2 G₀ α_j; D = Diag[Γ, Γ, Γ, Γ, 0, γ_m(2n_m + 1)].
    """
    scale = math.sqrt(2.0) * derived.G0
    return LinearModel.from_rates(
        Gamma=derived.Gamma,
        delta=state.delta_eff,
        J=derived.J,
        G_cw=scale * state.alpha_cw,
        G_ccw=scale * state.alpha_ccw,
        omega_m=derived.omega_m,
        gamma_m=derived.gamma_m,
        n_m=derived.n_m,
    )


def characteristic_coefficients(model):
    """Coefficients a₀…a₆ of det(ηI − A) = Σ a_{6−n} ηⁿ, written out term by term."""
    G = model.Gamma
    D = model.delta_eff
    J = model.J
    w = model.omega_m
    g = model.gamma_m
    xa, ya = model.G_cw.real, model.G_cw.imag
    xb, yb = model.G_ccw.real, model.G_ccw.imag

    a0 = 1.0
    a1 = 4 * G + g
    a2 = 2 * J**2 + 2 * D**2 + 4 * g * G + 6 * G**2 + w**2
    a3 = (2 * J**2 * g + 2 * g * D**2 + 4 * J**2 * G + 4 * D**2 * G
          + 6 * g * G**2 + 4 * G**3 + 4 * G * w**2)
    a4 = (J**4 - 2 * J**2 * D**2 + D**4 + 4 * J**2 * g * G + 4 * g * D**2 * G
          + 2 * J**2 * G**2 + 2 * D**2 * G**2 + 4 * g * G**3
          - 2 * xa * xb * J * w - 2 * ya * yb * J * w
          - xb**2 * D * w - xa**2 * D * w - yb**2 * D * w - ya**2 * D * w
          + G**4 + 6 * G**2 * w**2 + 2 * D**2 * w**2 + 2 * J**2 * w**2)
    a5 = (J**4 * g - 2 * J**2 * g * D**2 + g * D**4 + 2 * J**2 * g * G**2
          - 4 * ya * yb * J * G * w + 2 * g * D**2 * G**2 + g * G**4
          - 4 * xa * xb * J * G * w + 4 * J**2 * G * w**2
          - 2 * xb**2 * D * G * w - 2 * xa**2 * D * G * w + 4 * D**2 * G * w**2
          - 2 * yb**2 * D * G * w - 2 * ya**2 * D * G * w + 4 * G**3 * w**2)
    a6 = (-2 * ya * yb * J * G**2 * w - xb**2 * G**2 * D * w - 2 * J**2 * D**2 * w**2
          - ya**2 * D**3 * w - 2 * xa * xb * J * G**2 * w + D**4 * w**2
          + 2 * J**2 * w**2 * G**2
          + 2 * xa * xb * J * D**2 * w + 2 * ya * yb * J * D**2 * w - yb**2 * D**3 * w
          - 2 * xa * xb * J**3 * w - 2 * ya * yb * J**3 * w + ya**2 * J**2 * D * w
          + xb**2 * J**2 * D * w + xa**2 * J**2 * D * w + yb**2 * J**2 * D * w
          + 2 * D**2 * G**2 * w**2 - xb**2 * D**3 * w - xa**2 * D**3 * w + w**2 * G**4
          + J**4 * w**2 - xa**2 * G**2 * D * w - yb**2 * G**2 * D * w - ya**2 * G**2 * D * w)
    return np.array([a0, a1, a2, a3, a4, a5, a6])


def normalized_coefficients(coeffs, omega):
    """Coefficients of the same polynomial in η/ω (a_k / ω^k); root signs are unchanged."""
    coeffs = np.asarray(coeffs, dtype=float)
    return coeffs / omega ** np.arange(len(coeffs))


def hurwitz_matrix(coeffs, n):
    """n×n leading block of the Hurwitz matrix, entry (i, j) = a_{2i−j} (1-based)."""
    degree = len(coeffs) - 1

    def a(k):
        return coeffs[k] if 0 <= k <= degree else 0.0

    return np.array([[a(2 * i - j) for j in range(1, n + 1)] for i in range(1, n + 1)], dtype=float)


def routh_hurwitz(coeffs):
    """Hurwitz determinants Λ₁…Λ_n and whether they are all positive."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs[0] != 1.0:
        coeffs = coeffs / coeffs[0]
    degree = len(coeffs) - 1
    lambdas = np.array([linalg.det(hurwitz_matrix(coeffs, n)) for n in range(1, degree + 1)])
    return lambdas, bool(np.all(lambdas > 0.0))


def eigen_stability(model, margin=None):
    """Certify stability by eigenvalues and by Routh-Hurwitz.

    The Hurwitz determinants are evaluated for the polynomial in η/ω_m so
    they are dimensionless and well scaled; their signs are those of the
    raw determinants.
    """
    if margin is None:
        margin = get_setting('STABILITY_MARGIN')
    try:
        eigenvalues = linalg.eigvals(model.drift)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(eigenvalues)):
        raise NumericalError("eigenvalue computation returned non-finite values")

    max_real_part = float(np.max(eigenvalues.real))
    coeffs = characteristic_coefficients(model)
    lambdas, stable_by_rh = routh_hurwitz(normalized_coefficients(coeffs, model.omega_m))
    tol_margin = margin * model.omega_m
    report = StabilityReport(
        eigenvalues=eigenvalues,
        max_real_part=max_real_part,
        char_coeffs=coeffs,
        hurwitz=lambdas,
        stable_by_eigen=bool(max_real_part < -tol_margin),
        stable_by_rh=stable_by_rh,
        margin=tol_margin,
    )
    if not report.certifiers_agree and abs(max_real_part) >= tol_margin:
        logger.warning(
            f"Stability certifiers disagree: max Re(eta) = {max_real_part:.6g}, "
            f"min Lambda = {lambdas.min():.6g}"
        )
    return report
