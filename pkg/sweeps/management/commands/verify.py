import numpy as np

from gaussian.oracle import integral_form_cm, integrate_moments, relative_difference
from optomech.exceptions import NumericalError, StabilityError
from sweeps.analysis import enhancement_ratios
from sweeps.cli import SimulationCommand
from sweeps.pipeline import analyse_point

MOMENT_TOLERANCE = 1e-6
INTEGRAL_TOLERANCE = 1e-5


class Command(SimulationCommand):
    help = 'Cross-check the Lyapunov covariance against the moment-equation and integral-form oracles'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--enhancement',
            action='store_true',
            help='Report double-pump vs single-pump peak E_N ratios instead',
        )
        parser.add_argument(
            '--detuning-points',
            type=int,
            default=201,
            help='Detuning grid size on [0, 2] omega_m for --enhancement',
        )

    def run(self, options):
        config = self.load(options)
        if options['enhancement']:
            self.report_enhancement(config, options)
            return

        analysis = analyse_point(config, pairs=())
        if analysis.covariance is None:
            raise StabilityError(
                'drift matrix is unstable; nothing to verify',
                max_real_part=analysis.stability.max_real_part,
            )
        lyapunov = analysis.covariance
        moment = integrate_moments(analysis.model).final
        integral = integral_form_cm(analysis.model)

        row = {
            'lyapunov_residual': lyapunov.residual,
            'moment_vs_lyapunov': relative_difference(moment, lyapunov),
            'integral_vs_lyapunov': relative_difference(integral, lyapunov),
            'moment_vs_integral': relative_difference(moment, integral),
        }
        row['passed'] = (
            row['moment_vs_lyapunov'] <= MOMENT_TOLERANCE
            and row['integral_vs_lyapunov'] <= INTEGRAL_TOLERANCE
        )
        self.emit([row], self.provenance(config, analysis.warnings), options)
        if not row['passed']:
            raise NumericalError(
                f"oracle disagreement: moment {row['moment_vs_lyapunov']:.3e}, "
                f"integral {row['integral_vs_lyapunov']:.3e}"
            )

    def report_enhancement(self, config, options):
        grid = np.linspace(0.0, 2.0, options['detuning_points'])
        report = enhancement_ratios(config, grid)
        rows = []
        for name, peak in report['peaks'].items():
            ratio = 1.0 if name == 'single' else report[f"ratio_{name.removeprefix('double_')}"]
            rows.append({
                'case': name,
                'peak_E_N_cw': peak['E_N_cw'],
                'detuning_ratio': peak['detuning_ratio'],
                'ratio_to_single': ratio,
            })
        provenance = self.provenance(config)
        provenance['conventions'] = report['conventions']
        self.emit(rows, provenance, options)
