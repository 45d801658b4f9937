"""
Two-mode squeezing read off the Gaussian Wigner function.

The marginal Wigner function of a quadrature pair is a 2D Gaussian with the
pair's 2×2 sub-covariance S; its 1/e contour is the ellipse xᵀS⁻¹x = 2. The
vacuum contour under the 1/2-variance convention is the unit circle.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from optomech.exceptions import PhysicalityError
from optomech.utils import get_setting

from .covariance import VACUUM_VARIANCE

logger = logging.getLogger(__name__)

OPTICAL_MODES = ('cw', 'ccw')


def allowed_pairs():
    pairs = [('q', 'p')]
    for mode in OPTICAL_MODES:
        pairs += [('q', f'X_{mode}'), ('q', f'Y_{mode}'), (f'X_{mode}', f'Y_{mode}')]
    return tuple(pairs)


ALLOWED_PAIRS = allowed_pairs()

# The two pairs compared against each other for the squeezing asymmetry
ASYMMETRY_PAIRS = (('q', 'X_cw'), ('q', 'X_ccw'))


@dataclass(frozen=True, eq=False)
class SqueezingEllipse:
    pair: tuple
    sub_cm: np.ndarray
    semi_axes: tuple
    angle: float
    squeezed: bool

    @property
    def major(self):
        return self.semi_axes[0]

    @property
    def minor(self):
        return self.semi_axes[1]

    @property
    def name(self):
        return pair_name(self.pair)


def pair_name(pair):
    return f"{pair[0]}_{pair[1]}"


def parse_pair(text):
    """'q,X_cw' or 'q_X_cw' → ('q', 'X_cw')."""
    if ',' in text:
        first, second = (part.strip() for part in text.split(',', 1))
        pair = (first, second)
    else:
        matches = [p for p in ALLOWED_PAIRS if pair_name(p) == text]
        pair = matches[0] if matches else (text, '')
    validate_pair(pair)
    return pair


def validate_pair(pair):
    if tuple(pair) not in ALLOWED_PAIRS:
        names = ', '.join(pair_name(p) for p in ALLOWED_PAIRS)
        raise ValueError(f"unsupported quadrature pair {pair!r}; expected one of {names}")


def ellipse_from_sub_cm(sub_cm, pair=('', ''), tolerance=None):
    if tolerance is None:
        tolerance = get_setting('PHYSICALITY_TOLERANCE')
    sub_cm = np.array(sub_cm, dtype=float)
    sub_cm = 0.5 * (sub_cm + sub_cm.T)
    eigenvalues, eigenvectors = linalg.eigh(sub_cm)
    if eigenvalues[0] <= 0.0:
        raise PhysicalityError(f"sub-covariance for {pair!r} is not positive definite")

    major_vector = eigenvectors[:, 1]
    angle = math.atan2(major_vector[1], major_vector[0])
    # Axis direction is defined modulo π
    if angle <= -math.pi / 2:
        angle += math.pi
    elif angle > math.pi / 2:
        angle -= math.pi

    sub_cm.setflags(write=False)
    return SqueezingEllipse(
        pair=tuple(pair),
        sub_cm=sub_cm,
        semi_axes=(math.sqrt(2.0 * eigenvalues[1]), math.sqrt(2.0 * eigenvalues[0])),
        angle=angle,
        squeezed=bool(eigenvalues[0] < VACUUM_VARIANCE - tolerance),
    )


def wigner_ellipse(cm, pair, tolerance=None):
    """1/e contour of the marginal Wigner function of ``pair``.

    ``cm`` is a CovarianceMatrix or a ReducedCM containing both quadratures.
    """
    pair = tuple(pair)
    validate_pair(pair)
    return ellipse_from_sub_cm(cm.submatrix(pair), pair, tolerance)


def wigner_grid(source, extent=3.0, points=101):
    """Normalised marginal Wigner function on a square grid.

    ``source`` is a SqueezingEllipse or a 2×2 sub-covariance. Returns
    (x, y, W) with W[i, j] evaluated at (x[j], y[i]).
    """
    sub_cm = source.sub_cm if isinstance(source, SqueezingEllipse) else np.asarray(source, dtype=float)
    axis = np.linspace(-extent, extent, points)
    x, y = np.meshgrid(axis, axis)
    grid = np.stack([x, y], axis=-1)
    inverse = linalg.inv(sub_cm)
    exponent = -0.5 * np.einsum('...i,ij,...j->...', grid, inverse, grid)
    values = np.exp(exponent) / (2.0 * math.pi * math.sqrt(linalg.det(sub_cm)))
    return axis, axis.copy(), values


def wigner_density(reduced, psi):
    """Two-mode Wigner function W(ψ) of a reduced CM at one or more points ψ.

    Normalised to unit integral: exp(−ψ V′⁻¹ ψᵀ / 2) / ((2π)² √det V′).
    """
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    matrix = reduced.matrix
    inverse = linalg.inv(matrix)
    exponent = -0.5 * np.einsum('ki,ij,kj->k', psi, inverse, psi)
    norm = (2.0 * math.pi) ** (matrix.shape[0] // 2) * math.sqrt(linalg.det(matrix))
    return np.exp(exponent) / norm
