"""
Invariant suites behind the verify command
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from core.config import Config
from services.dimension.services import DimensionService, FreqQuery
from services.expansions.services import BetaSystem, ExpansionService
from services.language.services import LanguageService
from services.markov.services import MarkovService

logger = logging.getLogger(__name__)

ROUND_TRIP_DIGITS = 60
MAX_COVERING_SAMPLE_ORDER = 14


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant: passes when residual <= limit"""
    suite: str
    name: str
    residual: float
    limit: float
    detail: str = ''

    @property
    def passed(self) -> bool:
        return self.residual <= self.limit

    def as_row(self) -> Dict:
        return {
            'status': 'PASS' if self.passed else 'FAIL',
            'suite': self.suite,
            'name': self.name,
            'residual': float(self.residual),
            'limit': float(self.limit),
            'detail': self.detail,
        }


class VerificationService:
    """Runs the invariant suites with a seeded generator"""

    SUITES = ('expansion', 'covering', 'markov', 'dimension', 'counting')

    def __init__(self, config: Config):
        self.config = config
        self.rng = np.random.default_rng(config.seed)

    def run(self, suite: str = 'all') -> List[CheckResult]:
        suites = self.SUITES if suite == 'all' else (suite,)
        handlers: Dict[str, Callable[[], List[CheckResult]]] = {
            'expansion': self.expansion_checks,
            'covering': self.covering_checks,
            'markov': self.markov_checks,
            'dimension': self.dimension_checks,
            'counting': self.counting_checks,
        }
        results = []
        for name in suites:
            results.extend(handlers[name]())
        for result in results:
            if not result.passed:
                logger.warning(f"{result.suite}/{result.name} failed: residual {result.residual!r} > {result.limit!r}")
        return results

    def expansion_checks(self) -> List[CheckResult]:
        suite = 'expansion'
        wrong = [m for m in range(2, 9)
                 if BetaSystem.pseudo_golden(m).finite_length != m
                 or str(BetaSystem.pseudo_golden(m).eps_one[:m + 3]) != '1' * m + '000']
        results = [CheckResult(suite, 'expansion_of_one', len(wrong), 0, f"orders {wrong}" if wrong else 'orders 2..8')]

        worst, illegal = 0.0, 0
        for system in (BetaSystem.golden(), BetaSystem.pseudo_golden(3), BetaSystem.integer(2)):
            for x in self.rng.random(100):
                word = ExpansionService.greedy_expand(float(x), system, ROUND_TRIP_DIGITS)
                residual = ExpansionService.expansion_residual(float(x), word, system)
                worst = max(worst, residual * system.beta ** ROUND_TRIP_DIGITS)
                illegal += not ExpansionService.is_legal_word(word, system)
        results.append(CheckResult(suite, 'round_trip', worst, 1.0, 'residual * beta^60, 300 points'))
        results.append(CheckResult(suite, 'greedy_legal', illegal, 0, 'illegal greedy words'))
        return results

    def covering_checks(self) -> List[CheckResult]:
        systems = (BetaSystem.golden(), BetaSystem.pseudo_golden(3), BetaSystem.pseudo_golden(4))
        worst = 0.0
        for _ in range(1000):
            system = systems[int(self.rng.integers(len(systems)))]
            x, n = float(self.rng.random()), int(self.rng.integers(1, MAX_COVERING_SAMPLE_ORDER + 1))
            worst = max(worst, ExpansionService.covering_count(x, n, system) / (4 * (n + 1)))
        return [CheckResult('covering', 'covering_bound', worst, 1.0, 'count / 4(n+1), 1000 samples')]

    def markov_checks(self) -> List[CheckResult]:
        suite = 'markov'
        entropy_gap = stationarity = additivity = 0.0
        for m in (3, 4, 5):
            for a in np.linspace(1 / m + 0.05, 0.95, 4):
                optimum = DimensionService.maximize_f(m, float(a), self.config.tol)
                mu = MarkovService.build_max_measure(m, float(a), optimum.argmax)
                entropy_gap = max(entropy_gap, abs(
                    MarkovService.markov_entropy(mu) - DimensionService.f_a_eval(m, float(a), optimum.argmax)
                ))
                stationarity = max(stationarity, mu.stationarity_residual)
                cm = MarkovService.cylinder_measure(mu, m + 1)
                diagnostics = MarkovService.validate_cylinder_measure(cm, BetaSystem.pseudo_golden(m))
                additivity = max(additivity, diagnostics.additivity)
        return [
            CheckResult(suite, 'entropy_realization', entropy_gap, 1e-10, '|h(mu) - f_a(y*)|'),
            CheckResult(suite, 'stationarity', stationarity, 1e-12),
            CheckResult(suite, 'additivity', additivity, 1e-14),
        ]

    def dimension_checks(self) -> List[CheckResult]:
        suite = 'dimension'
        tol = self.config.tol
        tribonacci = BetaSystem.pseudo_golden(3)
        closed = max(
            abs(DimensionService.closed_form_m3(tribonacci, float(a)) - DimensionService.maximize_f(3, float(a), tol).dim)
            for a in np.arange(0.34, 0.995, 0.05)
        )

        pressure = 0.0
        for m in (3, 4, 5):
            system = BetaSystem.pseudo_golden(m)
            graph = LanguageService.build_follower_graph(system)
            for a in np.linspace(1 / m + 0.02, 0.97, 5):
                pressure = max(pressure, abs(
                    DimensionService.dim_via_pressure(graph, float(a), system).dim
                    - DimensionService.maximize_f(m, float(a), tol).dim
                ))

        vertex_excess = 0.0
        for m in (4, 5, 6):
            for a in np.linspace(1 / m + 0.05, 0.95, 4):
                optimum = DimensionService.maximize_f(m, float(a), tol)
                for vertex in DimensionService.polytope_vertices(m, float(a)):
                    value = DimensionService.f_a_eval(m, float(a), vertex)
                    vertex_excess = max(vertex_excess, value - optimum.diagnostics['f'])

        endpoints = max(
            DimensionService.freq_dim(FreqQuery(BetaSystem.pseudo_golden(m), a)).dim
            for m in (3, 4, 5) for a in (1 / m, 1.0)
        )

        excess = -math.inf
        for _ in range(20):
            m = int(self.rng.integers(3, 5))
            system = BetaSystem.pseudo_golden(m)
            mu = MarkovService.random_markov_measure(system, m - 1, self.rng,
                                                     zero_bias=float(np.exp(self.rng.uniform(-2, 2))))
            a = min(max(MarkovService.zero_frequency(mu), 0.0), 1.0)
            bound = DimensionService.freq_dim(FreqQuery(system, a), tol).dim * system.log_beta
            excess = max(excess, MarkovService.markov_entropy(mu) - bound)

        golden = DimensionService.full_dimension_point(BetaSystem.golden())
        return [
            CheckResult(suite, 'closed_form_vs_maximizer', closed, 1e-9, 'order 3'),
            CheckResult(suite, 'maximizer_vs_pressure', pressure, 1e-7, 'orders 3, 4, 5'),
            CheckResult(suite, 'endpoint_zeros', endpoints, 0.0),
            CheckResult(suite, 'maximizer_vs_vertices', vertex_excess, 1e-12, 'f at every vertex of D_(m,a)'),
            CheckResult(suite, 'entropy_upper_bound', max(excess, 0.0), 1e-10, '20 random Markov measures'),
            CheckResult(suite, 'full_dimension', abs(golden.dim - 1.0), 1e-6, f"golden, a* = {golden.a:.6f}"),
        ]

    def counting_checks(self) -> List[CheckResult]:
        suite = 'counting'
        recurrence = support = transfer = 0
        growth = 0.0
        for m in (3, 4):
            graph = LanguageService.build_follower_graph(BetaSystem.pseudo_golden(m))
            counts = {n: LanguageService.count_words(graph, n) for n in range(m, 201)}
            recurrence += sum(counts[n] != sum(counts[n - j] for j in range(1, m + 1)) for n in range(2 * m, 201))
            growth = max(growth, abs(math.log(LanguageService.count_words(graph, 1000)) / 1000 - graph.system.log_beta))
            table = LanguageService.count_words_by_zeros(graph, 100)
            support += sum(table[k] != 0 for k in range(0, 100 // m - 1))
            transfer += sum(
                LanguageService.transfer_matrix_count(graph, n) != counts[n] for n in (m, 50, 200)
            )

        tribonacci = LanguageService.build_follower_graph(BetaSystem.pseudo_golden(3))
        table = LanguageService.count_words_by_zeros(tribonacci, 3000)
        convergence = max(
            abs(LanguageService.frequency_estimate(tribonacci, 3000, a, table=table).value
                - DimensionService.closed_form_m3(tribonacci.system, a))
            for a in (0.4, 0.5, 0.6, 0.7)
        )
        return [
            CheckResult(suite, 'recurrence', recurrence, 0, 'mismatches for n <= 200'),
            CheckResult(suite, 'growth', growth, 0.005, '|log N(1000)/1000 - log beta|'),
            CheckResult(suite, 'frequency_support', support, 0, 'words with fewer than n/m - 1 zeros'),
            CheckResult(suite, 'transfer_matrix', transfer, 0),
            CheckResult(suite, 'counting_convergence', convergence, 0.01, 'n = 3000'),
        ]
