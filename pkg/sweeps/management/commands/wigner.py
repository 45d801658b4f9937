from gaussian.squeezing import ASYMMETRY_PAIRS, pair_name, parse_pair, wigner_grid
from optomech.exceptions import ParameterValidationError, StabilityError
from sweeps.cli import SimulationCommand
from sweeps.pipeline import analyse_point


class Command(SimulationCommand):
    help = 'Wigner 1/e ellipses of quadrature pairs; optionally the gridded marginal W'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--pair',
            dest='pairs',
            action='append',
            default=[],
            help="Quadrature pair such as 'q,X_cw' (repeatable; default q,X_cw and q,X_ccw)",
        )
        parser.add_argument(
            '--grid',
            type=int,
            default=0,
            help='Emit W on an N x N grid per pair instead of the ellipse table',
        )
        parser.add_argument(
            '--extent',
            type=float,
            default=3.0,
            help='Half-width of the square grid (vacuum 1/e radius is 1)',
        )

    def run(self, options):
        try:
            pairs = [parse_pair(text) for text in options['pairs']] or list(ASYMMETRY_PAIRS)
        except ValueError as exc:
            raise ParameterValidationError('--pair', str(exc))
        if options['grid'] < 0 or options['grid'] == 1:
            raise ParameterValidationError('--grid', 'must be 0 or at least 2')

        config = self.load(options)
        analysis = analyse_point(config, pairs=pairs)
        if analysis.covariance is None:
            raise StabilityError(
                'drift matrix is unstable; no Wigner function exists',
                max_real_part=analysis.stability.max_real_part,
            )

        ellipses = []
        for pair in pairs:
            ellipse = analysis.ellipses[pair]
            ellipses.append({
                'pair': pair_name(pair),
                'major': ellipse.major,
                'minor': ellipse.minor,
                'angle': ellipse.angle,
                'squeezed': ellipse.squeezed,
                'var_first': ellipse.sub_cm[0, 0],
                'var_second': ellipse.sub_cm[1, 1],
                'covariance': ellipse.sub_cm[0, 1],
            })

        provenance = self.provenance(config, analysis.warnings)
        if not options['grid']:
            self.emit(ellipses, provenance, options)
            return

        provenance['ellipses'] = ellipses
        rows = []
        for pair in pairs:
            xs, ys, values = wigner_grid(analysis.ellipses[pair], options['extent'], options['grid'])
            for i, y in enumerate(ys):
                for j, x in enumerate(xs):
                    rows.append({'pair': pair_name(pair), 'x': x, 'y': y, 'W': values[i, j]})
        self.emit(rows, provenance, options)
