from optomech.linear_model import build_linear_model, eigen_stability
from optomech.steady_state import solve_steady_state
from sweeps.cli import SimulationCommand


class Command(SimulationCommand):
    help = 'Stability of the linearised dynamics by eigenvalues and Routh-Hurwitz determinants'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--full',
            action='store_true',
            help='Also emit a_0..a_6, Lambda_1..Lambda_6 and the eigenvalues of A',
        )

    def run(self, options):
        config = self.load(options)
        derived = config.derive()
        state = solve_steady_state(derived, config.system, config.drive, config.solver)
        report = eigen_stability(build_linear_model(state, derived, config.system))

        row = {
            'theta': config.drive.theta,
            'detuning_ratio': derived.detuning_ratio,
            'lambda6': report.lambda6,
            'max_real_part': report.max_real_part,
            'stable': report.stable,
        }
        if options['full']:
            row['stable_by_rh'] = report.stable_by_rh
            row.update({f"a{k}": value for k, value in enumerate(report.char_coeffs)})
            row.update({f"Lambda{k}": value for k, value in enumerate(report.hurwitz, start=1)})
            for k, eigenvalue in enumerate(sorted(report.eigenvalues, key=lambda z: (z.real, z.imag)), start=1):
                row[f"eta{k}_re"] = eigenvalue.real
                row[f"eta{k}_im"] = eigenvalue.imag
        if not report.certifiers_agree:
            self.stderr.write(self.style.WARNING('Eigenvalue and Routh-Hurwitz verdicts differ at this point'))
        self.emit([row], self.provenance(config, derived.notes + state.warnings), options)
