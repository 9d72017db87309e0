from core.formatting import format_float, render_json
from core.management.base import BetaCommand
from services.dimension.services import (
    DEFAULT_COUNTING_LENGTH,
    METHODS,
    DimensionService,
    FreqQuery,
    Spectrum,
    SpectrumRow,
    parse_grid,
)


class Command(BetaCommand):
    help = 'Hausdorff dimension of the set of points whose digit 0 has frequency a'

    def add_command_arguments(self, parser):
        self.add_beta_arguments(parser)
        frequency = parser.add_mutually_exclusive_group(required=True)
        frequency.add_argument(
            '--a',
            type=float,
            help='Frequency of the digit 0'
        )
        frequency.add_argument(
            '--a-grid',
            help='Frequencies as a comma list or start:stop:step'
        )
        parser.add_argument(
            '--method',
            choices=METHODS,
            default='auto',
            help='auto picks the exact formula for the beta; the others force a method'
        )
        parser.add_argument(
            '--n',
            type=int,
            default=DEFAULT_COUNTING_LENGTH,
            help=f'Word length for the counting method (default: {DEFAULT_COUNTING_LENGTH})'
        )
        parser.add_argument(
            '--workers',
            type=int,
            help='Threads for grid evaluation (default: BETAFREQ_WORKERS)'
        )

    def run(self, config, **options):
        if options['workers'] is not None and options['workers'] < 1:
            raise self.usage_error(f"--workers must be at least 1, got {options['workers']}")
        if options['method'] == 'counting' and not 10 <= options['n'] <= config.n_max:
            raise self.usage_error(f"--n must lie in [10, {config.n_max}], got {options['n']}")
        config = config.override(workers=options['workers'])
        system = self.beta_system(options)

        if options['a'] is not None:
            result = DimensionService.solve(
                FreqQuery(system, options['a']), options['method'], config.tol, options['n'], allow_uncertified=True
            )
            spectrum = Spectrum(system=system, rows=(SpectrumRow(a=options['a'], result=result),), continuity=0.0)
            self.emit_spectrum(config, spectrum)
            return

        try:
            grid = parse_grid(options['a_grid'])
        except ValueError as e:
            raise self.usage_error(f"Bad --a-grid: {e}")
        if not grid:
            raise self.usage_error('--a-grid is empty')
        spectrum = DimensionService.spectrum(
            system, grid, workers=config.workers, tol=config.tol, allow_uncertified=True,
            method=options['method'], counting_length=options['n'],
        )
        self.emit_spectrum(config, spectrum, grid=True)

    def emit_spectrum(self, config, spectrum: Spectrum, grid: bool = False):
        rows = spectrum.as_rows()
        if config.output_format == 'json':
            for record, row in zip(rows, spectrum.rows):
                if row.result is not None:
                    record['diagnostics'] = row.result.diagnostics
                    record['certified'] = row.result.certified
            payload = {'beta': spectrum.system.beta, 'rows': rows, 'continuity': spectrum.continuity} if grid \
                else rows[0]
            self.stdout.write(render_json(payload))
            return
        if config.output_format == 'text' and grid:
            self.emit(config, spectrum.columns, rows)
            self.stdout.write(f"continuity  {format_float(spectrum.continuity)}")
            return
        self.emit(config, spectrum.columns, rows)
