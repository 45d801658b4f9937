"""
Tests for the Gaussian-state layer

Tests cover:
- Lyapunov solve against closed forms and its residual
- Physicality checks
- Logarithmic negativity of reduced covariance matrices
- Wigner ellipses and densities
- Moment-equation and integral-form oracles
"""
import math
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from optomech.config import default_config
from optomech.exceptions import NumericalError, ParameterValidationError, PhysicalityError, StabilityError
from optomech.linear_model import LinearModel, build_linear_model, eigen_stability
from optomech.steady_state import solve_steady_state

from .covariance import (
    CovarianceMatrix,
    check_physical,
    lyapunov_residual,
    physicality_margin,
    solve_lyapunov,
    solve_lyapunov_matrix,
    symplectic_form,
)
from .entanglement import (
    BIPARTITIONS,
    ReducedCM,
    entanglement_pair,
    log_negativity,
    reduce_cm,
    two_mode_squeezed_vacuum,
)
from .oracle import (
    integral_covariance,
    integral_form_cm,
    integrate_moment_equation,
    integrate_moments,
    quadrature_grid,
    relative_difference,
)
from .squeezing import (
    ALLOWED_PAIRS,
    ellipse_from_sub_cm,
    parse_pair,
    wigner_density,
    wigner_ellipse,
    wigner_grid,
)


def model_for(config):
    derived = config.derive()
    state = solve_steady_state(derived, config.system, config.drive, config.solver)
    return build_linear_model(state, derived, config.system)


def stable_models(rng, count, min_decay=0.02):
    """Dimensionless stable draws (omega_m = 1) decaying at least at ``min_decay``"""
    models = []
    while len(models) < count:
        model = LinearModel.from_rates(
            Gamma=rng.uniform(0.2, 1.5),
            delta=rng.uniform(-1.5, 1.5),
            J=rng.uniform(0.0, 1.0),
            G_cw=complex(*rng.uniform(-0.4, 0.4, 2)),
            G_ccw=complex(*rng.uniform(-0.4, 0.4, 2)),
            omega_m=1.0,
            gamma_m=rng.uniform(0.05, 0.3),
            n_m=rng.uniform(0.0, 20.0),
        )
        if eigen_stability(model).max_real_part < -min_decay:
            models.append(model)
    return models


def partial_transpose_nu_minus(matrix):
    """Smallest symplectic eigenvalue of the partially transposed 4x4 CM"""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    transposed = flip @ matrix @ flip
    spectrum = np.abs(np.linalg.eigvals(1j * symplectic_form(2) @ transposed))
    return float(spectrum.min())


class LyapunovTests(SimpleTestCase):
    """Test the steady-state covariance solve"""

    def test_vacuum_and_thermal_closed_form(self):
        """Test optical vacuum and thermal mechanics without optomechanical coupling"""
        model = LinearModel.from_rates(
            Gamma=0.5, delta=0.8, J=0.3, G_cw=0j, G_ccw=0j, omega_m=1.0, gamma_m=0.01, n_m=7.0,
        )
        cm = solve_lyapunov(model)

        np.testing.assert_allclose(cm.matrix[:4, :4], 0.5 * np.eye(4), atol=1e-12)
        self.assertAlmostEqual(cm.variance('q'), 7.5, places=9)
        self.assertAlmostEqual(cm.variance('p'), 7.5, places=9)
        self.assertAlmostEqual(cm.matrix[4, 5], 0.0, places=9)
        np.testing.assert_allclose(cm.matrix[:4, 4:], 0.0, atol=1e-12)
        self.assertLessEqual(cm.residual, 1e-10)

    def test_reference_point(self):
        """Test residual, symmetry and physicality at the reference point"""
        model = model_for(default_config())
        cm = solve_lyapunov(model)

        self.assertLessEqual(lyapunov_residual(model.drift, model.diffusion, cm.matrix), 1e-10)
        np.testing.assert_array_equal(cm.matrix, cm.matrix.T)
        self.assertTrue(cm.is_physical())
        self.assertEqual(cm.n_modes, 3)

    def test_random_residuals(self):
        """Test the residual bound on random stable models"""
        rng = np.random.default_rng(7)
        for model in stable_models(rng, 50, min_decay=1e-3):
            cm = solve_lyapunov(model)
            self.assertLessEqual(cm.residual, 1e-10)
            self.assertGreaterEqual(physicality_margin(cm.matrix), -1e-8)

    def test_zero_diffusion(self):
        """Test D = 0 gives V = 0"""
        drift = np.array([[-1.0, 2.0], [-2.0, -1.0]])
        matrix = solve_lyapunov_matrix(drift, np.zeros((2, 2)))
        np.testing.assert_array_equal(matrix, np.zeros((2, 2)))
        self.assertEqual(lyapunov_residual(drift, np.zeros((2, 2)), matrix), 0.0)

    def test_unstable_model(self):
        """Test an unstable drift matrix is refused"""
        model = LinearModel.from_rates(
            Gamma=-0.1, delta=0.0, J=0.0, G_cw=0j, G_ccw=0j, omega_m=1.0, gamma_m=0.01, n_m=0.0,
        )
        with self.assertRaises(StabilityError) as ctx:
            solve_lyapunov(model)
        self.assertGreater(ctx.exception.max_real_part, 0.0)

    def test_physicality(self):
        """Test sub-vacuum states are rejected"""
        self.assertAlmostEqual(physicality_margin(0.5 * np.eye(4)), 0.0, places=12)
        self.assertEqual(check_physical(0.5 * np.eye(2)), physicality_margin(0.5 * np.eye(2)))
        with self.assertRaises(PhysicalityError):
            check_physical(0.1 * np.eye(4))
        self.assertFalse(CovarianceMatrix(matrix=0.1 * np.eye(6)).is_physical())

    def test_covariance_matrix_access(self):
        """Test labelled access and immutability"""
        matrix = np.arange(36, dtype=float).reshape(6, 6)
        cm = CovarianceMatrix(matrix=matrix + matrix.T)
        self.assertEqual(cm.variance('q'), 2.0 * matrix[4, 4])
        np.testing.assert_array_equal(cm.submatrix(('q', 'X_cw')), [[cm.matrix[4, 4], cm.matrix[4, 0]],
                                                                     [cm.matrix[0, 4], cm.matrix[0, 0]]])
        with self.assertRaises(ValueError):
            cm.index('Z')
        with self.assertRaises(ValueError):
            cm.matrix[0, 0] = 1.0
        with self.assertRaises(ValueError):
            CovarianceMatrix(matrix=np.eye(3), labels=('a', 'b', 'c'))


class EntanglementTests(SimpleTestCase):
    """Test reduced CMs and logarithmic negativity"""

    def test_two_mode_squeezed_vacuum(self):
        """Test E_N = 2r"""
        for r in (0.1, 0.5, 1.0, 2.0):
            with self.subTest(r=r):
                # c^2 - s^2 = 1/4 is computed from entries of size cosh(4r)
                tolerance = 1e-10 * math.cosh(4.0 * r)
                result = log_negativity(two_mode_squeezed_vacuum(r))
                self.assertAlmostEqual(result.E_N, 2.0 * r, delta=tolerance)
                self.assertAlmostEqual(result.nu_minus / (math.exp(-2.0 * r) / 2.0), 1.0, delta=tolerance)
                self.assertTrue(result.entangled)

    def test_product_state(self):
        """Test a direct sum of vacuum and thermal state is separable"""
        matrix = np.diag([0.5, 0.5, 3.5, 3.5])
        reduced = ReducedCM(matrix=matrix, labels=BIPARTITIONS['cw'])
        result = log_negativity(reduced)
        self.assertEqual(result.E_N, 0.0)
        self.assertFalse(result.entangled)
        self.assertGreaterEqual(result.nu_minus, 0.5 - 1e-12)

    def test_reduce_cm_blocks(self):
        """Test the reduced CM picks optical then mechanical quadratures"""
        matrix = np.arange(36, dtype=float).reshape(6, 6)
        cm = CovarianceMatrix(matrix=matrix + matrix.T)
        reduced = reduce_cm(cm, 'ccw')
        indices = [2, 3, 4, 5]
        np.testing.assert_array_equal(reduced.matrix, cm.matrix[np.ix_(indices, indices)])
        np.testing.assert_array_equal(reduced.block_a, cm.matrix[2:4, 2:4])
        np.testing.assert_array_equal(reduced.block_b, cm.matrix[4:, 4:])
        np.testing.assert_array_equal(reduced.block_c, cm.matrix[2:4, 4:])
        self.assertEqual(reduced.bipartition, 'ccw')
        with self.assertRaises(ValueError):
            reduce_cm(cm, 'both')

    def test_matches_partial_transpose_spectrum(self):
        """Test nu_minus against the symplectic spectrum of the partial transpose"""
        rng = np.random.default_rng(11)
        for model in stable_models(rng, 30, min_decay=1e-3):
            cm = solve_lyapunov(model)
            for name, result in entanglement_pair(cm).items():
                expected = partial_transpose_nu_minus(reduce_cm(cm, name).matrix)
                self.assertAlmostEqual(result.nu_minus / expected, 1.0, places=7)

    def test_non_positive_matrix(self):
        """Test a singular reduced CM is rejected"""
        reduced = ReducedCM(matrix=np.zeros((4, 4)), labels=BIPARTITIONS['cw'])
        with self.assertRaises(PhysicalityError):
            log_negativity(reduced)

    def test_mirror_symmetry_over_theta(self):
        """Test E_N_cw(theta) = E_N_ccw(2 pi - theta)"""
        base = default_config()
        for theta in np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False):
            with self.subTest(theta=theta):
                config = base.with_value('theta', theta)
                mirror = base.with_value('theta', 2.0 * math.pi - theta)
                first, second = model_for(config), model_for(mirror)
                stable = eigen_stability(first).stable
                self.assertEqual(stable, eigen_stability(second).stable)
                if not stable:
                    continue
                first = entanglement_pair(solve_lyapunov(first))
                second = entanglement_pair(solve_lyapunov(second))
                self.assertAlmostEqual(first['cw'].E_N, second['ccw'].E_N, delta=1e-7)
                self.assertAlmostEqual(first['ccw'].E_N, second['cw'].E_N, delta=1e-7)

    def test_global_phase_invariance(self):
        """Test a common pump phase does not change E_N"""
        config = default_config()
        reference = entanglement_pair(solve_lyapunov(model_for(config)))
        for phi in np.linspace(0.1, 2.0 * math.pi, 10):
            with self.subTest(phi=phi):
                drive = replace(
                    config.drive, phase_cw=config.drive.phase_cw + phi, phase_ccw=config.drive.phase_ccw + phi,
                )
                shifted = entanglement_pair(solve_lyapunov(model_for(replace(config, drive=drive))))
                for name in BIPARTITIONS:
                    self.assertAlmostEqual(shifted[name].E_N, reference[name].E_N, delta=1e-8)


class SqueezingTests(SimpleTestCase):
    """Test Wigner ellipses and densities"""

    def test_vacuum_circle(self):
        """Test the vacuum contour is the unit circle"""
        ellipse = ellipse_from_sub_cm(0.5 * np.eye(2), ('q', 'p'))
        self.assertAlmostEqual(ellipse.major, 1.0)
        self.assertAlmostEqual(ellipse.minor, 1.0)
        self.assertFalse(ellipse.squeezed)

    def test_squeezed_along_axis(self):
        """Test a squeezed x variance gives a vertical major axis"""
        ellipse = ellipse_from_sub_cm(np.diag([0.25, 1.0]), ('q', 'p'))
        self.assertAlmostEqual(ellipse.major, math.sqrt(2.0))
        self.assertAlmostEqual(ellipse.minor, math.sqrt(0.5))
        self.assertAlmostEqual(abs(ellipse.angle), math.pi / 2)
        self.assertTrue(ellipse.squeezed)

    def test_rotated_ellipse(self):
        """Test a positive correlation tilts the major axis by pi/4"""
        ellipse = ellipse_from_sub_cm(np.array([[1.0, 0.6], [0.6, 1.0]]), ('q', 'X_cw'))
        self.assertAlmostEqual(ellipse.angle, math.pi / 4)
        self.assertAlmostEqual(ellipse.major, math.sqrt(3.2))
        self.assertAlmostEqual(ellipse.minor, math.sqrt(0.8))
        self.assertTrue(ellipse.squeezed)
        self.assertEqual(ellipse.name, 'q_X_cw')

    def test_pairs(self):
        """Test pair parsing and validation"""
        self.assertEqual(len(ALLOWED_PAIRS), 7)
        self.assertEqual(parse_pair('q,X_cw'), ('q', 'X_cw'))
        self.assertEqual(parse_pair('X_ccw_Y_ccw'), ('X_ccw', 'Y_ccw'))
        for text in ('p,q', 'X_cw,X_ccw', 'bogus'):
            with self.subTest(text=text):
                with self.assertRaises(ValueError):
                    parse_pair(text)

    def test_mirrored_drive_swaps_ellipses(self):
        """Test (q, X_cw) at theta matches (q, X_ccw) with the pumps relabelled"""
        config = default_config()
        mirrored = replace(config, drive=config.drive.mirrored())
        self.assertAlmostEqual(mirrored.drive.theta, 9 * math.pi / 5)

        first = solve_lyapunov(model_for(config))
        second = solve_lyapunov(model_for(mirrored))
        for pair, mirror_pair in ((('q', 'X_cw'), ('q', 'X_ccw')), (('q', 'X_ccw'), ('q', 'X_cw'))):
            with self.subTest(pair=pair):
                a = wigner_ellipse(first, pair)
                b = wigner_ellipse(second, mirror_pair)
                np.testing.assert_allclose(a.semi_axes, b.semi_axes, rtol=1e-7)
                if a.major - a.minor > 1e-3:
                    self.assertAlmostEqual(a.angle, b.angle, places=6)
                self.assertEqual(a.squeezed, b.squeezed)

    def test_wigner_grid_normalised(self):
        """Test the marginal Wigner function integrates to one"""
        x, y, values = wigner_grid(np.array([[0.8, 0.3], [0.3, 0.4]]), extent=8.0, points=321)
        dx = x[1] - x[0]
        self.assertAlmostEqual(values.sum() * dx * dx, 1.0, places=6)
        self.assertEqual(values.shape, (321, 321))
        self.assertEqual(values.argmax(), values.size // 2)

    def test_wigner_density_vacuum(self):
        """Test the two-mode vacuum peak value"""
        reduced = ReducedCM(matrix=0.5 * np.eye(4), labels=BIPARTITIONS['cw'])
        peak = wigner_density(reduced, np.zeros(4))
        self.assertAlmostEqual(peak[0], 1.0 / math.pi ** 2)
        far = wigner_density(reduced, [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
        np.testing.assert_allclose(far, np.exp(-1.0) / math.pi ** 2)


class OracleTests(SimpleTestCase):
    """Test the independent covariance oracles"""

    def test_scalar_integral(self):
        """Test the integral form on dV/dt = -2V + 2"""
        value = integral_covariance(np.array([[-1.0]]), np.array([[2.0]]), t_max=30.0, n_steps=3000)
        self.assertAlmostEqual(value[0, 0], 1.0, delta=1e-8)

    def test_quadrature_grid(self):
        """Test the default horizon and even step count"""
        t_max, n_steps = quadrature_grid(np.diag([-1.0, -2.0]))
        self.assertAlmostEqual(t_max, 30.0)
        self.assertEqual(n_steps % 2, 0)
        self.assertTrue(1200 <= n_steps <= 1202)
        self.assertEqual(quadrature_grid(np.diag([-1.0, -2.0]), t_max=5.0, n_steps=7), (5.0, 8))
        with self.assertRaises(StabilityError):
            quadrature_grid(np.diag([-1.0, 0.5]))

    def test_scalar_moments(self):
        """Test the moment equation relaxes to the exact steady state"""
        trajectory = integrate_moment_equation(np.array([[-1.0]]), np.array([[2.0]]))
        self.assertAlmostEqual(trajectory.final[0, 0], 1.0, delta=1e-10)
        self.assertEqual(len(trajectory.times), len(trajectory.cms))
        self.assertEqual(trajectory.times[0], 0.0)
        midpoint = len(trajectory.times) // 4
        exact = 1.0 - math.exp(-2.0 * trajectory.times[midpoint])
        self.assertAlmostEqual(trajectory.cms[midpoint][0, 0], exact, delta=1e-6)

    def test_zero_diffusion(self):
        """Test both oracles return zero for D = 0"""
        drift = np.array([[-1.0, 2.0], [-2.0, -1.0]])
        zero = np.zeros((2, 2))
        np.testing.assert_array_equal(integral_covariance(drift, zero, t_max=10.0, n_steps=200), zero)
        np.testing.assert_array_equal(integrate_moment_equation(drift, zero).final, zero)

    def test_three_way_agreement(self):
        """Test Lyapunov, moment-equation and integral-form covariances agree"""
        rng = np.random.default_rng(3)
        for model in stable_models(rng, 25):
            lyapunov = solve_lyapunov(model)
            moment = integrate_moments(model).final
            integral = integral_form_cm(model)
            self.assertLess(relative_difference(moment, lyapunov), 1e-6)
            self.assertLess(relative_difference(integral, lyapunov), 1e-5)

    def test_initial_condition_independence(self):
        """Test the long-time moment solution forgets V(0)"""
        model = stable_models(np.random.default_rng(5), 1, min_decay=0.05)[0]
        from_zero = integrate_moments(model).final
        from_thermal = integrate_moments(model, V0=CovarianceMatrix(matrix=10.0 * np.eye(6))).final
        self.assertLess(relative_difference(from_thermal, from_zero), 1e-8)

    def test_converging_increments(self):
        """Test the recorded trajectory settles"""
        model = stable_models(np.random.default_rng(9), 1, min_decay=0.05)[0]
        increments = integrate_moments(model).increments()
        self.assertLess(increments[-1], 1e-6 * max(increments.max(), 1e-300))

    def test_divergence(self):
        """Test an unstable moment equation is reported"""
        with self.assertRaises(NumericalError):
            integrate_moment_equation(0.5 * np.eye(2), np.eye(2), t_final=40.0)

    def test_step_limit(self):
        """Test steps above 0.1/||A|| are refused"""
        with self.assertRaises(ParameterValidationError):
            integrate_moment_equation(-np.eye(2), np.eye(2), dt=0.2)

    def test_unstable_integral(self):
        """Test the integral form refuses unstable drift matrices"""
        with self.assertRaises(StabilityError):
            integral_covariance(0.5 * np.eye(2), np.eye(2))
