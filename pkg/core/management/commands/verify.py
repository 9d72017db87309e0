"""
Management command running the invariant suites
"""
from django.core.management.base import CommandError

from core.management.base import EXIT_FAILED, BetaCommand
from core.services.verification_service import VerificationService

COLUMNS = ['status', 'suite', 'name', 'residual', 'limit', 'detail']


class Command(BetaCommand):
    help = 'Check the numerical invariants and report residuals; exits 1 on any failure'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--suite',
            choices=('all',) + VerificationService.SUITES,
            default='all',
            help='Which suite to run (default: all)'
        )

    def run(self, config, **options):
        results = VerificationService(config).run(options['suite'])
        self.emit(config, COLUMNS, [result.as_row() for result in results])

        failed = [r for r in results if not r.passed]
        if failed:
            raise CommandError(
                f"{len(failed)} of {len(results)} checks failed: {', '.join(r.suite + '/' + r.name for r in failed)}",
                returncode=EXIT_FAILED,
            )
        if config.output_format == 'text':
            self.stderr.write(self.style.SUCCESS(f"All {len(results)} checks passed"))
