from pathlib import Path

from core.exceptions import DomainError
from core.management.base import BetaCommand
from services.dimension.services import DimensionService
from services.markov.services import MarkovMeasure, MarkovService


class Command(BetaCommand):
    help = 'Entropy and stationarity of a Markov measure read from JSON or built for maximal entropy'
    beta_required = False

    def add_command_arguments(self, parser):
        self.add_beta_arguments(parser)
        parser.add_argument(
            '--measure',
            metavar='FILE',
            help='Markov measure JSON ({"order", "states", "p", "P"})'
        )
        parser.add_argument(
            '--a',
            type=float,
            help='Zero frequency of the entropy-maximizing measure (needs a pseudo-golden beta)'
        )
        parser.add_argument(
            '--save',
            metavar='FILE',
            help='Write the measure as JSON'
        )

    def load(self, path: str) -> MarkovMeasure:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise self.usage_error(f"Cannot read measure file {path}: {e.strerror}")
        return MarkovMeasure.from_json(text)

    def build(self, config, options) -> MarkovMeasure:
        if options['a'] is None:
            raise self.usage_error('Give --measure FILE, or a beta together with --a')
        system = self.beta_system(options)
        if not system.is_pseudo_golden:
            raise self.usage_error(f"The maximal-entropy measure is built for pseudo-golden betas, not {system.label}")
        m, a = system.order, options['a']
        if not 1 / m <= a <= 1:
            raise DomainError(f"No measure has zero frequency {a} on {system.label}: need {1 / m:.6g} <= a <= 1")
        optimum = DimensionService.maximize_f(m, a, config.tol)
        return MarkovService.build_max_measure(m, a, optimum.argmax)

    def run(self, config, **options):
        if options['measure']:
            measure = self.load(options['measure'])
        else:
            measure = self.build(config, options)

        if options['save']:
            Path(options['save']).write_text(measure.to_json() + '\n')

        row = {
            'order': measure.order,
            'entropy': MarkovService.markov_entropy(measure),
            'stationarity_residual': measure.stationarity_residual,
            'zero_frequency': MarkovService.zero_frequency(measure),
        }
        self.emit(config, list(row), [row])
