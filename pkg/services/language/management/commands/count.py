from core.management.base import BetaCommand
from services.language.services import LanguageService


class Command(BetaCommand):
    help = 'Exact number of legal words of length n, optionally with exactly k zeros'

    def add_command_arguments(self, parser):
        self.add_beta_arguments(parser)
        parser.add_argument(
            '--n',
            type=int,
            required=True,
            help='Word length'
        )
        parser.add_argument(
            '--zeros',
            type=int,
            help='Count only words with exactly this many zeros'
        )
        parser.add_argument(
            '--table',
            action='store_true',
            help='Print the full table N(n,k), k = 0..n'
        )

    def run(self, config, **options):
        n = options['n']
        if n < 1:
            raise self.usage_error(f"--n must be positive, got {n}")
        if n > config.n_max:
            raise self.usage_error(f"--n={n} exceeds the configured maximum {config.n_max} (BETAFREQ_N_MAX)")
        if options['zeros'] is not None and not 0 <= options['zeros'] <= n:
            raise self.usage_error(f"--zeros must lie in [0, {n}], got {options['zeros']}")

        system = self.beta_system(options)
        graph = LanguageService.build_follower_graph(system)

        if options['table']:
            table = LanguageService.count_words_by_zeros(graph, n)
            rows = [{'n': n, 'k': k, 'count': count} for k, count in enumerate(table.counts)]
            text = '\n'.join(f"{row['k']} {row['count']}" for row in rows)
            self.emit(config, ['n', 'k', 'count'], rows, text=text)
            return

        if options['zeros'] is not None:
            count = LanguageService.count_words_by_zeros(graph, n)[options['zeros']]
            row = {'n': n, 'k': options['zeros'], 'count': count}
        else:
            count = LanguageService.count_words(graph, n)
            row = {'n': n, 'count': count}
        self.emit(config, list(row), [row], text=str(count))
