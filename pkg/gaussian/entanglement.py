"""
Bipartite entanglement between one optical mode and the mechanics.

Uses the logarithmic negativity of the reduced two-mode covariance matrix,
computed from the smallest symplectic eigenvalue of its partial transpose.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from optomech.exceptions import PhysicalityError
from optomech.utils import get_setting

from .covariance import CovarianceMatrix

logger = logging.getLogger(__name__)

# Optical mode followed by the mechanical mode
BIPARTITIONS = {
    'cw': ('X_cw', 'Y_cw', 'q', 'p'),
    'ccw': ('X_ccw', 'Y_ccw', 'q', 'p'),
}


@dataclass(frozen=True, eq=False)
class ReducedCM(CovarianceMatrix):
    bipartition: str = 'cw'

    @property
    def block_a(self):
        return self.matrix[:2, :2]

    @property
    def block_b(self):
        return self.matrix[2:, 2:]

    @property
    def block_c(self):
        return self.matrix[:2, 2:]


@dataclass(frozen=True)
class EntanglementResult:
    E_N: float
    nu_minus: float
    sigma: float
    bipartition: str = 'cw'

    @property
    def entangled(self):
        return self.E_N > 0.0


def reduce_cm(cm, bipartition):
    """4×4 principal submatrix for the optical mode ``bipartition`` and the mechanics."""
    try:
        labels = BIPARTITIONS[bipartition]
    except KeyError:
        raise ValueError(f"unknown bipartition {bipartition!r}; expected one of {', '.join(BIPARTITIONS)}")
    return ReducedCM(matrix=cm.submatrix(labels), labels=labels, bipartition=bipartition)


def log_negativity(reduced, tolerance=None):
    """E_N = max(0, −ln 2ν⁻) with Σ = det𝒜 + detℬ − 2det𝒞.

    ν⁻² is taken from the smaller root of x² − Σx + detV′ written as
    2detV′ / (Σ + √(Σ² − 4detV′)) so it stays accurate when ν⁻ ≪ 1.
    """
    if tolerance is None:
        tolerance = get_setting('PHYSICALITY_TOLERANCE')
    det_a = linalg.det(reduced.block_a)
    det_b = linalg.det(reduced.block_b)
    det_c = linalg.det(reduced.block_c)
    det_v = linalg.det(reduced.matrix)
    sigma = float(det_a + det_b - 2.0 * det_c)

    if det_v <= 0.0 or sigma <= 0.0:
        raise PhysicalityError(
            f"reduced covariance matrix is not positive definite (det = {det_v:.3e}, sigma = {sigma:.3e})"
        )
    discriminant = sigma * sigma - 4.0 * det_v
    if discriminant < 0.0:
        if discriminant < -tolerance * sigma * sigma:
            raise PhysicalityError(
                f"negative discriminant {discriminant:.3e} in symplectic spectrum of the partial transpose"
            )
        discriminant = 0.0

    nu_minus = math.sqrt(2.0 * det_v / (sigma + math.sqrt(discriminant)))
    E_N = max(0.0, -math.log(2.0 * nu_minus))
    return EntanglementResult(E_N=E_N, nu_minus=nu_minus, sigma=sigma, bipartition=reduced.bipartition)


def entanglement_pair(cm, tolerance=None):
    """E_N for both optical-mechanical bipartitions, keyed by 'cw' and 'ccw'."""
    return {name: log_negativity(reduce_cm(cm, name), tolerance) for name in BIPARTITIONS}


def two_mode_squeezed_vacuum(r):
    """Reduced CM of a two-mode squeezed vacuum; E_N = 2r."""
    c, s = math.cosh(2.0 * r) / 2.0, math.sinh(2.0 * r) / 2.0
    matrix = np.array([
        [c, 0.0, s, 0.0],
        [0.0, c, 0.0, -s],
        [s, 0.0, c, 0.0],
        [0.0, -s, 0.0, c],
    ])
    return ReducedCM(matrix=matrix, labels=BIPARTITIONS['cw'], bipartition='cw')
