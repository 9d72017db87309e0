from core.formatting import format_value
from core.management.base import BetaCommand
from services.expansions.services import ExpansionService


class Command(BetaCommand):
    help = 'Show beta, its expansion of 1 and the quasi-greedy expansion of 1'

    def add_command_arguments(self, parser):
        self.add_beta_arguments(parser)
        parser.add_argument(
            '--digits',
            type=int,
            default=20,
            help='Prefix length of the expansions of 1 (default: 20)'
        )

    def run(self, config, **options):
        if options['digits'] < 1:
            raise self.usage_error(f"--digits must be positive, got {options['digits']}")

        system = self.beta_system(options)
        eps_one, finite = ExpansionService.expand_one(system, options['digits'])
        eps_star = ExpansionService.quasi_greedy_one(system, options['digits'])

        row = {
            'beta': f'{system.beta:.15f}',
            'kind': system.kind,
            'order': system.order,
            'alphabet_max': system.alphabet_max,
            'eps_one': str(eps_one),
            'finite_length': system.finite_length if finite else None,
            'eps_star': str(eps_star),
            'certified': system.certified,
        }
        lines = [row['beta']] + [f'{key.ljust(13)} {format_value(row[key])}' for key in list(row)[1:]]
        self.emit(config, list(row), [row], text='\n'.join(lines))
