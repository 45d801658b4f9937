"""
Steady-state covariance matrix of the fluctuations.

Convention: V_ij = <u_i u_j + u_j u_i>/2 with vacuum variance 1/2 per
quadrature, ordered (X_cw, Y_cw, X_ccw, Y_ccw, q, p).
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from optomech.exceptions import NumericalError, PhysicalityError, StabilityError
from optomech.linear_model import QUADRATURES, eigen_stability
from optomech.utils import get_setting

logger = logging.getLogger(__name__)

VACUUM_VARIANCE = 0.5
SYMMETRY_TOLERANCE = 1e-12


def symplectic_form(n_modes):
    """Ω = ⊕ [[0, 1], [-1, 0]] over ``n_modes`` modes."""
    return linalg.block_diag(*([np.array([[0.0, 1.0], [-1.0, 0.0]])] * n_modes))


def physicality_margin(matrix):
    """Smallest eigenvalue of V + (i/2)Ω; non-negative for a physical state."""
    n_modes = matrix.shape[0] // 2
    return float(linalg.eigvalsh(matrix + 0.5j * symplectic_form(n_modes))[0])


def check_physical(matrix, tolerance=None):
    if tolerance is None:
        tolerance = get_setting('PHYSICALITY_TOLERANCE')
    margin = physicality_margin(matrix)
    if margin < -tolerance:
        raise PhysicalityError(
            f"covariance matrix violates the uncertainty principle "
            f"(min eig of V + i/2 Omega = {margin:.3e})"
        )
    return margin


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    matrix: np.ndarray
    residual: float = 0.0
    labels: tuple = QUADRATURES

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise ValueError(f"covariance matrix must be square with even size, got {matrix.shape}")
        if len(self.labels) != matrix.shape[0]:
            raise ValueError("one label per quadrature is required")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown quadrature {label!r}; expected one of {', '.join(self.labels)}")

    def variance(self, label):
        i = self.index(label)
        return float(self.matrix[i, i])

    def submatrix(self, labels):
        indices = [self.index(label) for label in labels]
        return self.matrix[np.ix_(indices, indices)]

    def is_physical(self, tolerance=None):
        if tolerance is None:
            tolerance = get_setting('PHYSICALITY_TOLERANCE')
        return physicality_margin(self.matrix) >= -tolerance


def solve_lyapunov_matrix(drift, diffusion):
    """Solve A V + V Aᵀ = −D as one dense linear system.

    With column-major vec, vec(A V + V Aᵀ) = (I ⊗ A + A ⊗ I) vec(V). The
    operator is divided by ‖A‖₂ before factorisation.
    """
    drift = np.asarray(drift, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    n = drift.shape[0]
    scale = linalg.norm(drift, 2) or 1.0
    identity = np.eye(n)
    operator = (np.kron(identity, drift) + np.kron(drift, identity)) / scale
    rhs = -diffusion.flatten(order='F') / scale
    try:
        lu, piv = linalg.lu_factor(operator)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Lyapunov factorisation failed: {exc}") from exc
    if np.any(np.diag(lu) == 0.0):
        raise NumericalError("Lyapunov operator is singular")
    solution = linalg.lu_solve((lu, piv), rhs).reshape((n, n), order='F')
    if not np.all(np.isfinite(solution)):
        raise NumericalError("Lyapunov solve produced non-finite entries")
    return 0.5 * (solution + solution.T)


def lyapunov_residual(drift, diffusion, matrix):
    """‖A V + V Aᵀ + D‖_F / ‖D‖_F (absolute when D = 0)."""
    residual = linalg.norm(drift @ matrix + matrix @ drift.T + diffusion, 'fro')
    reference = linalg.norm(diffusion, 'fro')
    return float(residual / reference) if reference > 0.0 else float(residual)


def solve_lyapunov(model, stability=None, tolerance=None, physicality_tolerance=None):
    """Steady-state covariance of a certified-stable linear model."""
    if tolerance is None:
        tolerance = get_setting('LYAPUNOV_RESIDUAL_TOLERANCE')
    report = stability if stability is not None else eigen_stability(model)
    if not report.stable:
        raise StabilityError(
            f"drift matrix is not stable (max Re eta = {report.max_real_part:.6g})",
            max_real_part=report.max_real_part,
        )

    matrix = solve_lyapunov_matrix(model.drift, model.diffusion)
    residual = lyapunov_residual(model.drift, model.diffusion, matrix)
    if residual > tolerance:
        raise NumericalError(f"Lyapunov residual {residual:.3e} exceeds {tolerance:.1e}")
    check_physical(matrix, physicality_tolerance)
    logger.debug(f"Lyapunov solve residual {residual:.3e}")
    return CovarianceMatrix(matrix=matrix, residual=residual)
