"""
Shared plumbing for the simulation management commands.

Every command accepts --config, --set, --output and --format; exit code 1
means invalid input and exit code 2 a numerical failure.
"""
import io
import logging

import pandas as pd
from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone

import wgmsim
from optomech.config import load_config
from optomech.exceptions import ParameterValidationError, SimulationError

from .engine import FORMATS
from .export import write_table

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


class SimulationCommand(BaseCommand):
    """Base class: subclasses implement add_command_arguments() and run()."""

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            help='JSON config file with system/drive/solver sections (defaults: reference operating point)',
        )
        parser.add_argument(
            '--set',
            dest='overrides',
            action='append',
            default=[],
            metavar='SECTION.KEY=VALUE',
            help='Override one config value; repeatable (e.g. --set drive.detuning_ratio=0.8)',
        )
        parser.add_argument(
            '--output',
            help='Write the table to this file instead of stdout',
        )
        parser.add_argument(
            '--format',
            choices=FORMATS,
            default=None,
            help='Output format (default: csv)',
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            self.run(options)
        except ParameterValidationError as exc:
            raise CommandError(f"Invalid input: {exc}", returncode=EXIT_VALIDATION)
        except SimulationError as exc:
            logger.error(f"{type(exc).__name__}: {exc}")
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_NUMERICAL)

    def run(self, options):
        raise NotImplementedError

    def load(self, options):
        return load_config(options['config'], options['overrides'])

    def provenance(self, config, notes=()):
        return {
            'tool': 'wgmsim',
            'version': wgmsim.__version__,
            'generated_at': timezone.now().isoformat(),
            'command': self.command_name,
            'resolved_config': config.as_dict(),
            'notes': list(notes),
        }

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def emit(self, rows, provenance, options, default_format='csv'):
        """Write a table (DataFrame or list of dicts) to --output or stdout."""
        frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
        fmt = options['format'] or default_format
        path = options['output']
        if path:
            with open(path, 'w', encoding='utf-8', newline='') as handle:
                write_table(frame, provenance, handle, fmt)
            self.stderr.write(self.style.SUCCESS(f"Wrote {len(frame)} row(s) to {path}"))
        else:
            buffer = io.StringIO()
            write_table(frame, provenance, buffer, fmt)
            self.stdout.write(buffer.getvalue(), ending='')
