"""
Tests for the optomechanical model

Tests cover:
- Derived constants at the reference operating point
- Parameter validation and frequency conventions
- Self-consistent steady state
- Drift/diffusion layout and stability certificates
- Config loading, overrides and parameter paths
"""
import json
import math
import os
import tempfile
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from .config import apply_overrides, build_config, default_config, load_config, parse_override
from .exceptions import ParameterValidationError
from .linear_model import (
    QUADRATURES,
    LinearModel,
    build_linear_model,
    characteristic_coefficients,
    eigen_stability,
    routh_hurwitz,
)
from .params import (
    REFERENCE_DRIVE,
    REFERENCE_SYSTEM,
    DriveConfig,
    derive_constants,
    reduce_phase,
    thermal_occupation,
)
from .steady_state import SolverOptions, intracavity_photons, solve_steady_state


def solve(config):
    derived = config.derive()
    return derived, solve_steady_state(derived, config.system, config.drive, config.solver)


def random_model(rng):
    """Dimensionless draw with omega_m = 1"""
    return LinearModel.from_rates(
        Gamma=rng.uniform(0.05, 2.0),
        delta=rng.uniform(-2.0, 2.0),
        J=rng.uniform(0.0, 2.0),
        G_cw=complex(*rng.uniform(-1.0, 1.0, 2)),
        G_ccw=complex(*rng.uniform(-1.0, 1.0, 2)),
        omega_m=1.0,
        gamma_m=rng.uniform(1e-4, 0.1),
        n_m=rng.uniform(0.0, 100.0),
    )


class DerivedConstantsTests(SimpleTestCase):
    """Test derive_constants"""

    def setUp(self):
        self.derived = derive_constants(REFERENCE_SYSTEM, REFERENCE_DRIVE)

    def test_reference_values(self):
        """Test constants at the reference operating point"""
        expected = {
            'omega_c': 1.21526e15,
            'kappa_0': 1.89884e7,
            'G0': 452.0,
            'eps_cw': 2.8805e12,
            'n_m': 269.65,
        }
        for name, value in expected.items():
            with self.subTest(name=name):
                self.assertLess(abs(getattr(self.derived, name) / value - 1.0), 1e-3)

    def test_critical_coupling_default(self):
        """Test kappa_ex defaults to kappa_0 and is reported"""
        self.assertEqual(self.derived.kappa_ex, self.derived.kappa_0)
        self.assertEqual(self.derived.Gamma, 2.0 * self.derived.kappa_0)
        self.assertTrue(any('critical coupling' in note for note in self.derived.notes))

    def test_explicit_kappa_ex(self):
        """Test an explicit kappa_ex is used and no note is attached"""
        system = replace(REFERENCE_SYSTEM, kappa_ex=1e7)
        derived = derive_constants(system, REFERENCE_DRIVE)
        self.assertEqual(derived.kappa_ex, 1e7)
        self.assertEqual(derived.Gamma, derived.kappa_0 + 1e7)
        self.assertFalse(any('critical coupling' in note for note in derived.notes))

    def test_coupling_ratio(self):
        """Test J = ratio * Gamma"""
        self.assertAlmostEqual(self.derived.J_over_Gamma, 1.0)
        self.assertAlmostEqual(self.derived.detuning_ratio, 0.4)

    def test_zero_temperature(self):
        """Test n_m is exactly zero at T = 0"""
        self.assertEqual(thermal_occupation(63e6, 0.0), 0.0)
        derived = derive_constants(replace(REFERENCE_SYSTEM, temperature=0.0), REFERENCE_DRIVE)
        self.assertEqual(derived.n_m, 0.0)

    def test_thermal_occupation_increases_with_temperature(self):
        """Test n_m is monotone in T"""
        temperatures = np.geomspace(1e-3, 10.0, 50)
        occupations = [thermal_occupation(63e6, t) for t in temperatures]
        self.assertTrue(all(b > a for a, b in zip(occupations, occupations[1:])))

    def test_drive_scales_with_root_power(self):
        """Test eps scales as sqrt of the pump power"""
        for s in (0.25, 2.0, 9.0):
            with self.subTest(s=s):
                drive = replace(REFERENCE_DRIVE, power_cw=REFERENCE_DRIVE.power_cw * s)
                scaled = derive_constants(REFERENCE_SYSTEM, drive)
                self.assertAlmostEqual(scaled.eps_cw / self.derived.eps_cw, math.sqrt(s), places=12)
                self.assertEqual(scaled.eps_ccw, self.derived.eps_ccw)

    def test_ordinary_frequency_convention(self):
        """Test rates given in Hz are converted to rad/s once"""
        two_pi = 2.0 * math.pi
        system = replace(
            REFERENCE_SYSTEM,
            omega_m=REFERENCE_SYSTEM.omega_m / two_pi,
            gamma_m=REFERENCE_SYSTEM.gamma_m / two_pi,
            frequency_convention='ordinary',
        )
        derived = derive_constants(system, REFERENCE_DRIVE)
        self.assertAlmostEqual(derived.omega_m / self.derived.omega_m, 1.0, places=12)
        self.assertAlmostEqual(derived.gamma_m / self.derived.gamma_m, 1.0, places=12)
        self.assertAlmostEqual(derived.G0 / self.derived.G0, 1.0, places=12)

    def test_low_mechanical_q_warning(self):
        """Test a warning for mechanical Q below 100"""
        system = replace(REFERENCE_SYSTEM, gamma_m=REFERENCE_SYSTEM.omega_m / 50.0)
        with self.assertLogs('optomech.params', level='WARNING') as logs:
            derived = derive_constants(system, REFERENCE_DRIVE)
        self.assertIn('mechanical Q', logs.output[0])
        self.assertTrue(any('mechanical Q' in note for note in derived.notes))

    def test_negative_laser_frequency(self):
        """Test a detuning above omega_c is rejected"""
        drive = replace(REFERENCE_DRIVE, detuning_ratio=None, detuning=2e15)
        with self.assertRaises(ParameterValidationError) as ctx:
            derive_constants(REFERENCE_SYSTEM, drive)
        self.assertEqual(ctx.exception.field, 'detuning')


class ParameterValidationTests(SimpleTestCase):
    """Test SystemParams and DriveConfig validation"""

    def test_non_positive_values(self):
        """Test each positive field names itself on failure"""
        for name in ('omega_m', 'gamma_m', 'mass', 'wavelength', 'quality_c', 'radius'):
            for value in (0.0, -1.0, math.nan, math.inf):
                with self.subTest(name=name, value=value):
                    with self.assertRaises(ParameterValidationError) as ctx:
                        replace(REFERENCE_SYSTEM, **{name: value})
                    self.assertEqual(ctx.exception.field, name)

    def test_negative_temperature(self):
        """Test T < 0 is rejected"""
        with self.assertRaises(ParameterValidationError) as ctx:
            replace(REFERENCE_SYSTEM, temperature=-0.1)
        self.assertEqual(ctx.exception.field, 'temperature')

    def test_coupling_conflict(self):
        """Test coupling_J and coupling_ratio are exclusive"""
        with self.assertRaises(ParameterValidationError) as ctx:
            replace(REFERENCE_SYSTEM, coupling_J=1e6)
        self.assertEqual(ctx.exception.field, 'coupling_J')

    def test_unknown_convention(self):
        """Test an unknown frequency convention"""
        with self.assertRaises(ParameterValidationError):
            replace(REFERENCE_SYSTEM, frequency_convention='kelvin')

    def test_detuning_exactly_one(self):
        """Test detuning and detuning_ratio are exclusive and required"""
        with self.assertRaises(ParameterValidationError):
            DriveConfig(power_cw=1e-3, power_ccw=1e-3, detuning=1e6, detuning_ratio=0.4)
        with self.assertRaises(ParameterValidationError):
            DriveConfig(power_cw=1e-3, power_ccw=1e-3)

    def test_negative_power(self):
        """Test negative pump power is rejected"""
        with self.assertRaises(ParameterValidationError) as ctx:
            replace(REFERENCE_DRIVE, power_ccw=-1e-3)
        self.assertEqual(ctx.exception.field, 'power_ccw')

    def test_phases_reduced(self):
        """Test phases are mapped onto [0, 2pi)"""
        drive = replace(REFERENCE_DRIVE, phase_cw=-math.pi / 2, phase_ccw=5 * math.pi)
        self.assertAlmostEqual(drive.phase_cw, 1.5 * math.pi)
        self.assertAlmostEqual(drive.phase_ccw, math.pi)
        self.assertEqual(reduce_phase(2 * math.pi), 0.0)

    def test_theta(self):
        """Test theta is the phase difference and with_theta keeps phase_ccw"""
        self.assertAlmostEqual(REFERENCE_DRIVE.theta, math.pi / 5)
        drive = replace(REFERENCE_DRIVE, phase_ccw=1.0).with_theta(0.3)
        self.assertAlmostEqual(drive.theta, 0.3)
        self.assertAlmostEqual(drive.phase_ccw, 1.0)

    def test_single_pump(self):
        """Test is_double_pump"""
        self.assertTrue(REFERENCE_DRIVE.is_double_pump)
        self.assertFalse(replace(REFERENCE_DRIVE, power_ccw=0.0).is_double_pump)


class SteadyStateTests(SimpleTestCase):
    """Test the self-consistent steady state"""

    def setUp(self):
        self.config = default_config()
        self.derived, self.state = solve(self.config)

    def test_self_consistency(self):
        """Test amplitudes and displacement against a direct linear solve"""
        derived, state = self.derived, self.state
        drive = self.config.drive
        loss = 1j * state.delta_eff + derived.Gamma
        matrix = np.array([[loss, 1j * derived.J], [1j * derived.J, loss]])
        fields = np.array([
            derived.eps_cw * np.exp(-1j * drive.phase_cw),
            derived.eps_ccw * np.exp(-1j * drive.phase_ccw),
        ])
        alpha = np.linalg.solve(matrix, fields)

        self.assertLess(abs(alpha[0] - state.alpha_cw), 1e-9 * abs(alpha[0]))
        self.assertLess(abs(alpha[1] - state.alpha_ccw), 1e-9 * abs(alpha[1]))
        q = derived.G0 * np.sum(np.abs(alpha) ** 2) / derived.omega_m
        self.assertLess(abs(q - state.q_s), 1e-8 * q)
        self.assertAlmostEqual(state.delta_eff, derived.delta_c - derived.G0 * state.q_s, delta=1e-6)

    def test_reference_displacement(self):
        """Test the radiation-pressure shift at the reference point"""
        self.assertGreater(self.state.q_s, 1e4)
        self.assertLess(self.state.q_s, 1e5)
        self.assertLess(self.state.delta_eff, self.derived.delta_c)
        self.assertEqual(self.state.p_s, 0.0)

    def test_decoupled_single_pump(self):
        """Test no ccw field without backscattering or ccw pump"""
        config = self.config.with_value('J_over_Gamma', 0.0).with_value('power_ccw', 0.0)
        derived, state = solve(config)
        self.assertEqual(state.alpha_ccw, 0j)
        expected = derived.eps_cw * np.exp(-1j * config.drive.phase_cw) / (derived.Gamma + 1j * state.delta_eff)
        self.assertLess(abs(expected - state.alpha_cw), 1e-9 * abs(expected))

    def test_zero_power(self):
        """Test no pumps gives the trivial state"""
        config = self.config.with_value('drive.power_cw', 0.0).with_value('power_ccw', 0.0)
        derived, state = solve(config)
        self.assertEqual(state.q_s, 0.0)
        self.assertEqual(state.alpha_cw, 0j)
        self.assertEqual(state.delta_eff, derived.delta_c)
        self.assertEqual(intracavity_photons(state), (0.0, 0.0))

    def test_photon_numbers(self):
        """Test photon numbers are |alpha|^2 per mode"""
        _, state = solve(self.config)
        photons_cw, photons_ccw = intracavity_photons(state)
        self.assertAlmostEqual(photons_cw / abs(state.alpha_cw) ** 2, 1.0, places=12)
        self.assertAlmostEqual(photons_ccw / abs(state.alpha_ccw) ** 2, 1.0, places=12)
        self.assertGreater(photons_cw, 0.0)

    def test_mirror_symmetry(self):
        """Test relabelling cw and ccw swaps the amplitudes"""
        mirrored = replace(self.config, drive=self.config.drive.mirrored())
        _, state = solve(mirrored)
        self.assertLess(abs(state.alpha_cw - self.state.alpha_ccw), 1e-9 * abs(self.state.alpha_ccw))
        self.assertLess(abs(state.alpha_ccw - self.state.alpha_cw), 1e-9 * abs(self.state.alpha_cw))
        self.assertAlmostEqual(state.q_s / self.state.q_s, 1.0, places=10)

    def test_global_phase(self):
        """Test a common phase shift rotates both amplitudes"""
        phi = 1.3
        drive = replace(
            self.config.drive,
            phase_cw=self.config.drive.phase_cw + phi,
            phase_ccw=self.config.drive.phase_ccw + phi,
        )
        _, state = solve(replace(self.config, drive=drive))
        rotation = np.exp(-1j * phi)
        self.assertLess(abs(state.alpha_cw - rotation * self.state.alpha_cw), 1e-8 * abs(state.alpha_cw))
        self.assertAlmostEqual(state.q_s / self.state.q_s, 1.0, places=9)

    def test_bisection_matches_iteration(self):
        """Test the bracketing fallback lands on the same root"""
        options = SolverOptions(max_iterations=1)
        config = replace(self.config, solver=options)
        _, state = solve(config)
        self.assertEqual(state.method, 'bisection')
        self.assertLess(abs(state.roots[0] - self.state.q_s), 1e-8 * self.state.q_s)


class LinearModelTests(SimpleTestCase):
    """Test drift/diffusion assembly and stability"""

    def setUp(self):
        self.rng = np.random.default_rng(20240611)

    def test_matrix_layout(self):
        """Test drift and diffusion entries"""
        model = LinearModel.from_rates(
            Gamma=2.0, delta=0.3, J=0.7, G_cw=0.5 + 0.2j, G_ccw=-0.1 + 0.4j,
            omega_m=1.0, gamma_m=0.01, n_m=3.0,
        )
        A = model.drift
        self.assertEqual(A.shape, (6, 6))
        self.assertEqual(len(QUADRATURES), 6)
        np.testing.assert_array_equal(np.diag(A), [-2.0, -2.0, -2.0, -2.0, 0.0, -0.01])
        self.assertEqual(A[0, 1], 0.3)
        self.assertEqual(A[1, 0], -0.3)
        self.assertEqual(A[0, 3], 0.7)
        self.assertEqual(A[1, 2], -0.7)
        self.assertEqual(A[0, 4], -0.2)
        self.assertEqual(A[1, 4], 0.5)
        self.assertEqual(A[2, 4], -0.4)
        self.assertEqual(A[3, 4], -0.1)
        np.testing.assert_array_equal(A[5], [0.5, 0.2, -0.1, 0.4, -1.0, -0.01])
        self.assertEqual(A[4, 5], 1.0)
        np.testing.assert_array_equal(np.diag(model.diffusion), [2.0, 2.0, 2.0, 2.0, 0.0, 0.07])
        self.assertEqual(np.count_nonzero(model.diffusion - np.diag(np.diag(model.diffusion))), 0)

    def test_matrices_read_only(self):
        """Test model matrices cannot be modified in place"""
        model = random_model(self.rng)
        with self.assertRaises(ValueError):
            model.drift[0, 0] = 1.0

    def test_coefficients_match_characteristic_polynomial(self):
        """Test a0..a6 against numpy's characteristic polynomial"""
        for _ in range(1000):
            model = random_model(self.rng)
            expected = np.poly(model.drift).real
            scale = 1.0 + np.abs(model.drift).max()
            atol = 1e-9 * scale ** np.arange(7)
            np.testing.assert_allclose(characteristic_coefficients(model), expected, rtol=1e-8, atol=atol)

    def test_trace_and_determinant(self):
        """Test a1 = -trace(A) and a6 = det(A) at the reference point"""
        config = default_config()
        derived, state = solve(config)
        model = build_linear_model(state, derived, config.system)
        coeffs = characteristic_coefficients(model)
        self.assertAlmostEqual(coeffs[1] / -np.trace(model.drift), 1.0, places=12)
        self.assertAlmostEqual(coeffs[6] / np.linalg.det(model.drift), 1.0, places=6)

    def test_routh_hurwitz_known_polynomials(self):
        """Test RH on (eta + 1)^6 and (eta - 1)(eta + 1)^5"""
        lambdas, stable = routh_hurwitz(np.poly([-1.0] * 6))
        self.assertTrue(stable)
        self.assertAlmostEqual(lambdas[0], 6.0)
        self.assertEqual(len(lambdas), 6)

        _, stable = routh_hurwitz(np.poly([1.0] + [-1.0] * 5))
        self.assertFalse(stable)

    def test_certifiers_agree(self):
        """Test eigenvalue and RH verdicts agree away from the boundary"""
        checked = 0
        for _ in range(500):
            report = eigen_stability(random_model(self.rng))
            if abs(report.max_real_part) > 1e-5:
                checked += 1
                self.assertEqual(report.stable_by_eigen, report.stable_by_rh)
        self.assertGreater(checked, 100)

    def test_reference_point_stable(self):
        """Test the reference operating point is stable"""
        config = default_config()
        derived, state = solve(config)
        model = build_linear_model(state, derived, config.system)
        report = eigen_stability(model)
        self.assertTrue(report.stable)
        self.assertTrue(report.stable_by_rh)
        self.assertGreater(report.lambda6, 0.0)
        self.assertLess(report.max_real_part, 0.0)

    def test_coupling_from_amplitudes(self):
        """Test G_j = sqrt(2) G0 alpha_j"""
        config = default_config()
        derived, state = solve(config)
        model = build_linear_model(state, derived)
        expected = math.sqrt(2.0) * derived.G0 * state.alpha_cw
        self.assertLess(abs(model.G_cw - expected), 1e-12 * abs(expected))
        self.assertEqual(model.diffusion[5, 5], derived.gamma_m * (2.0 * derived.n_m + 1.0))

    def test_global_phase_invariance(self):
        """Test a common rotation of the couplings leaves the spectrum unchanged"""
        model = random_model(self.rng)
        rotation = np.exp(0.7j)
        rotated = LinearModel.from_rates(
            Gamma=model.Gamma, delta=model.delta_eff, J=model.J,
            G_cw=model.G_cw * rotation, G_ccw=model.G_ccw * rotation,
            omega_m=model.omega_m, gamma_m=model.gamma_m, n_m=model.n_m,
        )
        np.testing.assert_allclose(
            characteristic_coefficients(rotated), characteristic_coefficients(model), rtol=1e-10, atol=1e-12
        )


class ConfigTests(SimpleTestCase):
    """Test config loading"""

    def test_defaults(self):
        """Test an empty config resolves to the reference point"""
        self.assertEqual(load_config(), default_config())
        self.assertEqual(build_config({}), default_config())

    def test_unknown_key(self):
        """Test unknown keys name their path"""
        with self.assertRaises(ParameterValidationError) as ctx:
            build_config({'system': {'bogus': 1.0}})
        self.assertEqual(ctx.exception.field, 'system.bogus')

        with self.assertRaises(ParameterValidationError) as ctx:
            build_config({'extra': {}})
        self.assertEqual(ctx.exception.field, 'extra')

    def test_coupling_conflict(self):
        """Test coupling_J with coupling_ratio is rejected"""
        with self.assertRaises(ParameterValidationError) as ctx:
            build_config({'system': {'coupling_J': 1e6, 'coupling_ratio': 1.0}})
        self.assertEqual(ctx.exception.field, 'system.coupling_J')

    def test_explicit_coupling_j(self):
        """Test coupling_J alone clears the default ratio"""
        config = build_config({'system': {'coupling_J': 1e6}})
        self.assertIsNone(config.system.coupling_ratio)
        self.assertEqual(config.derive().J, 1e6)

    def test_drive_theta(self):
        """Test drive.theta places phase_cw relative to phase_ccw"""
        config = build_config({'drive': {'theta': math.pi / 2, 'phase_ccw': 1.0}})
        self.assertAlmostEqual(config.drive.phase_ccw, 1.0)
        self.assertAlmostEqual(config.drive.phase_cw, 1.0 + math.pi / 2)
        self.assertAlmostEqual(config.drive.theta, math.pi / 2)

        config = load_config(overrides=['drive.theta=0'])
        self.assertAlmostEqual(config.drive.theta, 0.0)
        self.assertAlmostEqual(config.drive.phase_cw, config.drive.phase_ccw)

    def test_drive_theta_conflict(self):
        """Test theta with an explicit phase_cw is rejected"""
        with self.assertRaises(ParameterValidationError) as ctx:
            build_config({'drive': {'theta': 1.0, 'phase_cw': 0.5}})
        self.assertEqual(ctx.exception.field, 'drive.theta')

        with self.assertRaises(ParameterValidationError) as ctx:
            build_config({'drive': {'theta': float('inf')}})
        self.assertEqual(ctx.exception.field, 'drive.theta')

    def test_overrides(self):
        """Test --set style overrides"""
        config = load_config(overrides=['drive.detuning_ratio=0.8', 'system.temperature=1.5'])
        self.assertEqual(config.drive.detuning_ratio, 0.8)
        self.assertEqual(config.system.temperature, 1.5)

    def test_parse_override(self):
        """Test JSON values and bare strings"""
        self.assertEqual(parse_override('system.coupling_J=null'), ('system.coupling_J', None))
        self.assertEqual(
            parse_override('system.frequency_convention=ordinary'),
            ('system.frequency_convention', 'ordinary'),
        )
        with self.assertRaises(ParameterValidationError):
            parse_override('drive.theta')

    def test_apply_overrides_copies(self):
        """Test the raw mapping is not modified"""
        raw = {'drive': {'power_cw': 0.01}}
        resolved = apply_overrides(raw, ['drive.power_cw=0.02'])
        self.assertEqual(raw['drive']['power_cw'], 0.01)
        self.assertEqual(resolved['drive']['power_cw'], 0.02)

    def test_with_value(self):
        """Test parameter paths and aliases"""
        config = default_config()
        self.assertAlmostEqual(config.with_value('theta', 1.0).drive.theta, 1.0)
        self.assertEqual(config.with_value('J_over_Gamma', 0.5).system.coupling_ratio, 0.5)

        explicit = config.with_value('system.coupling_J', 2e6)
        self.assertEqual(explicit.system.coupling_J, 2e6)
        self.assertIsNone(explicit.system.coupling_ratio)

        absolute = config.with_value('drive.detuning', 5e7)
        self.assertIsNone(absolute.drive.detuning_ratio)
        self.assertEqual(absolute.with_value('detuning_ratio', 0.6).drive.detuning_ratio, 0.6)

        for name in ('system.frequency_convention', 'system.bogus', 'solver.tolerance'):
            with self.subTest(name=name):
                with self.assertRaises(ParameterValidationError):
                    config.with_value(name, 1.0)

    def test_config_file(self):
        """Test reading a JSON config file"""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'config.json')
            with open(path, 'w', encoding='utf-8') as handle:
                json.dump({'system': {'temperature': 0.5}, 'drive': {'detuning_ratio': 1.0}}, handle)
            config = load_config(path)

        self.assertEqual(config.system.temperature, 0.5)
        self.assertEqual(config.drive.detuning_ratio, 1.0)
        self.assertEqual(config.system.mass, REFERENCE_SYSTEM.mass)

    def test_bad_config_file(self):
        """Test missing and malformed files"""
        with self.assertRaises(ParameterValidationError) as ctx:
            load_config('/nonexistent/config.json')
        self.assertEqual(ctx.exception.field, 'config')

        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'config.json')
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write('{not json')
            with self.assertRaises(ParameterValidationError):
                load_config(path)

    def test_solver_section(self):
        """Test solver options fall back to settings"""
        config = build_config({'solver': {'damping': 0.25}})
        self.assertEqual(config.solver.damping, 0.25)
        self.assertEqual(config.solver.tolerance, SolverOptions().tolerance)
        with self.assertRaises(ParameterValidationError):
            build_config({'solver': {'damping': 0.0}})
