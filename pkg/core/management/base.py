"""
Shared plumbing for the betafreq management commands
"""
import logging

from django.core.exceptions import ImproperlyConfigured, ValidationError
from django.core.management.base import BaseCommand, CommandError

from core.config import OUTPUT_FORMATS, Config
from core.exceptions import error_message
from core.formatting import render
from services.expansions.services import BetaSystem

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3


class BetaCommand(BaseCommand):
    """
    Base class adding the global flags (--format, --tol, --seed) and the
    exit-code contract: 2 for bad arguments, 3 for domain errors.

    Subclasses implement `add_command_arguments` and `run(config, **options)`.
    """
    requires_system_checks = []
    beta_required = True

    def add_arguments(self, parser):
        parser.add_argument(
            '--format',
            dest='output_format',
            choices=OUTPUT_FORMATS,
            help='Output format (default: BETAFREQ_FORMAT or text)'
        )
        parser.add_argument(
            '--tol',
            type=float,
            help='Numerical tolerance (default: BETAFREQ_TOL or 1e-12)'
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Seed for randomized checks (default: BETAFREQ_SEED)'
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def add_beta_arguments(self, parser, required=None):
        group = parser.add_mutually_exclusive_group(
            required=self.beta_required if required is None else required
        )
        group.add_argument('--pseudo-golden', type=int, metavar='M', help='Pseudo-golden root of order M')
        group.add_argument('--golden', action='store_true', help='The golden ratio (order 2)')
        group.add_argument('--beta', type=float, metavar='VALUE', help='Any beta > 1')
        group.add_argument('--integer', type=int, metavar='N', help='Integer base N >= 2')

    def beta_system(self, options) -> BetaSystem:
        if options.get('pseudo_golden') is not None:
            return BetaSystem.pseudo_golden(options['pseudo_golden'])
        if options.get('golden'):
            return BetaSystem.golden()
        if options.get('integer') is not None:
            return BetaSystem.integer(options['integer'])
        if options.get('beta') is not None:
            system = BetaSystem.from_value(options['beta'])
            if not system.certified:
                message = f"{system.label} has no closed-form dimension; results are uncertified"
                logger.warning(message)
                self.stderr.write(self.style.WARNING(f"Warning: {message}"))
            return system
        raise CommandError('A beta must be given with --pseudo-golden, --golden, --beta or --integer',
                           returncode=EXIT_USAGE)

    def usage_error(self, message: str) -> CommandError:
        return CommandError(message, returncode=EXIT_USAGE)

    def handle(self, *args, **options):
        try:
            config = Config.from_settings().override(
                tol=options.get('tol'),
                output_format=options.get('output_format'),
                seed=options.get('seed'),
            )
        except ImproperlyConfigured as e:
            raise CommandError(str(e), returncode=EXIT_USAGE)

        try:
            self.run(config, **options)
        except ValidationError as e:
            logger.debug(f"{self.__class__.__module__} failed: {error_message(e)}")
            raise CommandError(error_message(e), returncode=EXIT_DOMAIN)

    def run(self, config: Config, **options):
        raise NotImplementedError('subclasses of BetaCommand must provide a run() method')

    def emit(self, config: Config, columns, rows, text=None):
        """Write rows in the configured format; `text` replaces the default text rendering"""
        if config.output_format == 'text' and text is not None:
            self.stdout.write(text)
        else:
            self.stdout.write(render(columns, rows, config.output_format))
