import sys

from tqdm import tqdm

from optomech.config import apply_overrides, load_config, read_config_file, validation_error
from optomech.exceptions import ParameterValidationError
from sweeps.cli import SimulationCommand
from sweeps.engine import run_sweep
from sweeps.scenarios import list_scenarios, scenario
from sweeps.serializers import SweepSpecSerializer


class Command(SimulationCommand):
    help = 'Run a parameter sweep from a named scenario or a JSON sweep spec'

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group()
        source.add_argument('--scenario', help='Named preset, e.g. fig3ab (see --list)')
        source.add_argument('--spec', help='JSON sweep spec file')
        source.add_argument('--list', action='store_true', help='List the named scenarios and exit')
        parser.add_argument(
            '--workers',
            type=int,
            default=None,
            help='Worker processes (default: WGMSIM_WORKERS or physical core count)',
        )
        parser.add_argument(
            '--no-progress',
            action='store_true',
            help='Disable the progress bar',
        )

    def run(self, options):
        if options['list']:
            for entry in list_scenarios():
                self.stdout.write(f"{entry['name']:<24} {entry['grid_size']:>8}  {entry['description']}")
            return

        if options['scenario']:
            base = None
            if options['config'] or options['overrides']:
                base = load_config(options['config'], options['overrides'])
            spec = scenario(options['scenario'], base)
        elif options['spec']:
            spec = self.load_spec(options)
        else:
            raise ParameterValidationError('--scenario', 'give --scenario NAME, --spec FILE or --list')

        with tqdm(
            total=spec.grid_size,
            desc=spec.name,
            unit='pt',
            file=sys.stderr,
            disable=options['no_progress'],
        ) as bar:
            result = run_sweep(spec, workers=options['workers'], progress=bar.update)

        counts = result.status_counts()
        self.emit(result.frame, result.provenance, options, default_format=spec.format)
        self.stderr.write(
            f"{len(result.frame)} points in {result.elapsed:.2f}s: "
            + ', '.join(f"{status}={count}" for status, count in counts.items())
        )

    def load_spec(self, options):
        raw_spec = read_config_file(options['spec'])
        base = read_config_file(options['config']) if options['config'] else {}
        base = apply_overrides(base, options['overrides'])
        serializer = SweepSpecSerializer(data=raw_spec)
        if not serializer.is_valid():
            raise validation_error(serializer.errors)
        return serializer.create_spec(base)
