from sweeps.cli import SimulationCommand
from sweeps.pipeline import analyse_point, coordinates, row_from_analysis

OUTPUTS = ('E_N_cw', 'E_N_ccw', 'nu_minus_cw', 'nu_minus_ccw', 'stable')


class Command(SimulationCommand):
    help = 'Logarithmic negativity of the cw-mechanics and ccw-mechanics bipartitions'

    def run(self, options):
        config = self.load(options)
        analysis = analyse_point(config, pairs=())
        row = coordinates(config, analysis.derived)
        row.update(row_from_analysis(analysis, OUTPUTS))
        if analysis.status != 'ok':
            self.stderr.write(self.style.WARNING('Drift matrix is unstable; no steady-state covariance exists'))
        self.emit([row], self.provenance(config, analysis.warnings), options)
