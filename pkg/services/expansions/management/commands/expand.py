from core.formatting import format_float
from core.management.base import BetaCommand
from services.expansions.services import ExpansionService


class Command(BetaCommand):
    help = 'Greedy beta-expansion of x with the round-trip residual |pi(w) - x|'

    def add_command_arguments(self, parser):
        self.add_beta_arguments(parser)
        parser.add_argument(
            '--x',
            type=float,
            required=True,
            help='Point in [0,1) to expand'
        )
        parser.add_argument(
            '--digits',
            type=int,
            default=20,
            help='Number of digits (default: 20)'
        )

    def run(self, config, **options):
        if options['digits'] < 1:
            raise self.usage_error(f"--digits must be positive, got {options['digits']}")
        if options['digits'] > config.n_max:
            raise self.usage_error(f"--digits exceeds the configured maximum {config.n_max}")

        system = self.beta_system(options)
        word = ExpansionService.greedy_expand(options['x'], system, options['digits'])
        residual = ExpansionService.expansion_residual(options['x'], word, system)
        bound = system.beta ** (-len(word))

        row = {
            'beta': system.beta,
            'x': options['x'],
            'digits': str(word),
            'residual': residual,
            'bound': bound,
            'legal': ExpansionService.is_legal_word(word, system),
        }
        text = f"{word}\nresidual  {format_float(residual)}"
        self.emit(config, list(row), [row], text=text)

