"""
Cylinder measures and k-step Markov measures on binary beta-shifts:
validation, entropy, Markovization and the entropy-maximizing measure
"""
import json
import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr

from core.exceptions import DomainError, InvalidMeasureError
from services.expansions.services import BetaSystem, DigitWord, ExpansionService

logger = logging.getLogger(__name__)

MASS_TOL = 1e-9
MAX_RANDOM_ATTEMPTS = 200

WordLike = Union[DigitWord, str, Sequence[int]]


def _key(word: WordLike) -> str:
    if isinstance(word, str) and (not word or word.isdigit()):
        return word
    return str(DigitWord.coerce(word))


def binary_words(length: int) -> List[str]:
    """All binary words of the given length in lexicographic order"""
    return [''.join(bits) for bits in product('01', repeat=length)]


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """Masses mu[w] of all binary words of length <= max_order; absent words have mass 0"""
    max_order: int
    mass: Mapping[str, float]

    def __post_init__(self):
        if self.max_order < 0:
            raise InvalidMeasureError(f"max_order must be non-negative, got {self.max_order}")
        normalized = {_key(w): float(v) for w, v in self.mass.items()}
        too_long = [w for w in normalized if len(w) > self.max_order]
        if too_long:
            raise InvalidMeasureError(f"Words longer than max_order {self.max_order}: {too_long[:3]}")
        normalized.setdefault('', 1.0)
        object.__setattr__(self, 'mass', normalized)

    def __getitem__(self, word: WordLike) -> float:
        key = _key(word)
        if len(key) > self.max_order:
            raise DomainError(f"Word {key} is longer than the measure's order {self.max_order}")
        return self.mass.get(key, 0.0)

    def entropy_sum(self, length: int) -> float:
        """Sum of phi(mu[w]) over words of the given length"""
        masses = np.array([self[w] for w in binary_words(length)])
        return float(entr(np.clip(masses, 0.0, None)).sum())


@dataclass(frozen=True)
class MeasureDiagnostics:
    """Largest violations of the cylinder-measure axioms"""
    empty_word: float
    additivity: float
    shift: float
    support: float
    worst_word: Optional[str] = None

    def passes(self, tol: float = 1e-12) -> bool:
        return max(self.empty_word, self.additivity, self.shift, self.support) <= tol


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """
    k-step Markov measure: stationary vector p on k-words and a stochastic
    matrix P whose (s,t) entry is zero unless t continues s by one digit.
    """
    order: int
    states: Tuple[str, ...]
    p: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise InvalidMeasureError(f"Markov order must be at least 1, got {self.order}")
        if any(len(s) != self.order or set(s) - {'0', '1'} for s in self.states):
            raise InvalidMeasureError(f"States must be binary words of length {self.order}")
        if len(set(self.states)) != len(self.states):
            raise InvalidMeasureError('Duplicate states')
        size = len(self.states)
        p = np.asarray(self.p, dtype=float)
        P = np.asarray(self.P, dtype=float)
        if p.shape != (size,) or P.shape != (size, size):
            raise InvalidMeasureError(f"p must have shape ({size},) and P shape ({size}, {size})")
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'P', P)
        object.__setattr__(self, '_index', {s: i for i, s in enumerate(self.states)})

    def index(self, state: str) -> Optional[int]:
        return self._index.get(state)

    @property
    def stationarity_residual(self) -> float:
        return float(np.max(np.abs(self.p @ self.P - self.p)))

    def problems(self, tol: float = MASS_TOL) -> List[str]:
        """Violated invariants of p and P (empty when the measure is valid)"""
        problems = []
        if np.any(self.p < -tol) or abs(self.p.sum() - 1) > tol:
            problems.append(f"p is not a probability vector (sum {self.p.sum()!r})")
        if np.any(self.P < -tol):
            problems.append('P has negative entries')
        rows = np.abs(self.P.sum(axis=1) - 1)
        if np.any(rows > tol):
            problems.append(f"P rows do not sum to 1 (worst {self.states[int(rows.argmax())]})")
        for i, s in enumerate(self.states):
            for j, t in enumerate(self.states):
                if self.P[i, j] != 0 and s[1:] != t[:-1]:
                    problems.append(f"P[{s},{t}] is non-zero but {t} does not continue {s}")
        return problems

    def to_dict(self) -> Dict:
        transitions = {}
        for i, s in enumerate(self.states):
            row = {}
            for digit in '01':
                j = self.index(s[1:] + digit)
                if j is not None:
                    row[self.states[j]] = float(self.P[i, j])
            transitions[s] = row
        return {
            'order': self.order,
            'states': list(self.states),
            'p': {s: float(v) for s, v in zip(self.states, self.p)},
            'P': transitions,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> 'MarkovMeasure':
        try:
            order = int(payload['order'])
            states = tuple(str(s) for s in payload['states'])
            index = {s: i for i, s in enumerate(states)}
            p = np.array([float(payload['p'].get(s, 0.0)) for s in states])
            P = np.zeros((len(states), len(states)))
            for s, row in payload['P'].items():
                for t, value in row.items():
                    if s not in index or t not in index:
                        raise InvalidMeasureError(f"Transition {s}->{t} refers to an unknown state")
                    P[index[s], index[t]] = float(value)
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise InvalidMeasureError(f"Malformed Markov measure: {e!r}")
        measure = cls(order=order, states=states, p=p, P=P)
        problems = measure.problems()
        if problems:
            raise InvalidMeasureError('; '.join(problems))
        return measure

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> 'MarkovMeasure':
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidMeasureError(f"Markov measure is not valid JSON: {e}")
        if not isinstance(payload, dict):
            raise InvalidMeasureError('Markov measure JSON must be an object')
        return cls.from_dict(payload)


class MarkovService:
    """Validation, entropy and construction of Markov measures"""

    @staticmethod
    def phi(x: float) -> float:
        """phi(x) = -x log x with phi(0) = 0"""
        if x < 0:
            raise DomainError(f"phi is defined on [0, inf), got {x}")
        return float(entr(x))

    @staticmethod
    def validate_cylinder_measure(cm: CylinderMeasure, sys: BetaSystem) -> MeasureDiagnostics:
        worst = (0.0, None)
        additivity = shift = support = 0.0
        for length in range(cm.max_order):
            for w in binary_words(length):
                a = abs(cm[w + '0'] + cm[w + '1'] - cm[w])
                s = abs(cm['0' + w] + cm['1' + w] - cm[w])
                additivity, shift = max(additivity, a), max(shift, s)
                if max(a, s) > worst[0]:
                    worst = (max(a, s), w)
        for length in range(1, cm.max_order + 1):
            for w in binary_words(length):
                mass = cm[w]
                if mass != 0 and (mass < 0 or not ExpansionService.is_legal_word(w, sys)):
                    support = max(support, abs(mass))
                    if abs(mass) > worst[0]:
                        worst = (abs(mass), w)
        return MeasureDiagnostics(
            empty_word=abs(cm[''] - 1.0),
            additivity=additivity,
            shift=shift,
            support=support,
            worst_word=worst[1],
        )

    @staticmethod
    def markovize(cm: CylinderMeasure, m: int) -> MarkovMeasure:
        """(m-1)-step Markov measure agreeing with cm on all cylinders of order <= m"""
        if m < 2:
            raise DomainError(f"Markovization needs m >= 2, got {m}")
        if cm.max_order < m:
            raise InvalidMeasureError(f"Cylinder measure of order {cm.max_order} cannot be Markovized at m={m}")
        MarkovService._require_consistent(cm, m)

        states = tuple(binary_words(m - 1))
        index = {s: i for i, s in enumerate(states)}
        p = np.array([cm[s] for s in states])
        P = np.zeros((len(states), len(states)))
        for i, s in enumerate(states):
            if p[i] > 0:
                for digit in '01':
                    P[i, index[s[1:] + digit]] = cm[s + digit] / p[i]
            else:
                # zero-mass rows continue with 0
                P[i, index[s[1:] + '0']] = 1.0
        return MarkovMeasure(order=m - 1, states=states, p=p, P=P)

    @staticmethod
    def _require_consistent(cm: CylinderMeasure, m: int) -> None:
        if abs(cm[''] - 1.0) > MASS_TOL:
            raise InvalidMeasureError(f"Empty word has mass {cm['']!r}, expected 1")
        for length in range(m):
            for w in binary_words(length):
                if abs(cm[w + '0'] + cm[w + '1'] - cm[w]) > MASS_TOL:
                    raise InvalidMeasureError(f"Masses of {w}0 and {w}1 do not add up to mass of {w!r}")
                if abs(cm['0' + w] + cm['1' + w] - cm[w]) > MASS_TOL:
                    raise InvalidMeasureError(f"Masses of 0{w} and 1{w} do not add up to mass of {w!r}")
        if any(v < -MASS_TOL for v in cm.mass.values()):
            raise InvalidMeasureError('Cylinder measure has negative masses')

    @staticmethod
    def measure_of_word(mu: MarkovMeasure, w: WordLike) -> float:
        w = _key(w)
        if not w:
            raise DomainError('measure_of_word needs a non-empty word')
        k = mu.order
        if len(w) <= k:
            return float(sum(mu.p[i] for i, s in enumerate(mu.states) if s.startswith(w)))
        i = mu.index(w[:k])
        if i is None:
            return 0.0
        value = mu.p[i]
        for start in range(1, len(w) - k + 1):
            j = mu.index(w[start:start + k])
            if j is None or value == 0:
                return 0.0
            value *= mu.P[i, j]
            i = j
        return float(value)

    @staticmethod
    def zero_frequency(mu: MarkovMeasure) -> float:
        return MarkovService.measure_of_word(mu, '0')

    @staticmethod
    def markov_entropy(mu: MarkovMeasure) -> float:
        """-sum_s p_s sum_t P_st log P_st with 0 log 0 = 0"""
        problems = mu.problems()
        if problems:
            raise InvalidMeasureError('; '.join(problems))
        rows = entr(np.clip(mu.P, 0.0, None)).sum(axis=1)
        return float(max(np.dot(np.clip(mu.p, 0.0, None), rows), 0.0))

    @staticmethod
    def conditional_entropy(cm: CylinderMeasure, m: int) -> float:
        """H(x_m | x_1..x_{m-1}) computed from cylinder masses"""
        if m < 1 or cm.max_order < m:
            raise InvalidMeasureError(f"Cylinder measure of order {cm.max_order} has no order-{m} entropy")
        MarkovService._require_consistent(cm, m)
        return cm.entropy_sum(m) - cm.entropy_sum(m - 1)

    @staticmethod
    def cylinder_measure(mu: MarkovMeasure, max_order: int) -> CylinderMeasure:
        """Cylinder masses of mu for all words of length <= max_order"""
        mass = {'': 1.0}
        for length in range(1, max_order + 1):
            for w in binary_words(length):
                mass[w] = MarkovService.measure_of_word(mu, w)
        return CylinderMeasure(max_order=max_order, mass=mass)

    @staticmethod
    def stationary_vector(P: np.ndarray) -> np.ndarray:
        """Probability vector p with pP = p, by least squares on [P^T - I; 1^T]"""
        P = np.asarray(P, dtype=float)
        size = P.shape[0]
        system = np.vstack([P.T - np.eye(size), np.ones((1, size))])
        rhs = np.zeros(size + 1)
        rhs[-1] = 1.0
        p, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        p = np.clip(p, 0.0, None)
        return p / p.sum()

    @staticmethod
    def build_max_measure(m: int, a: float, y: Sequence[float]) -> MarkovMeasure:
        """
        (m-1)-step Markov measure with mu[0] = a whose entropy is f_a(y).

        Masses of 01^j, 1^j0 and 01^j0 come from the renewal table
        Y = (a, y_1, ..., y_{m-2}, 1 - a - sum(y)); all other words of length
        <= m+1 use mu[uwv] = mu[uw] mu[wv] / mu[w] with 0/0 = 0.
        """
        from services.dimension.services import DimensionService

        y = [float(v) for v in y]
        if len(y) != m - 2:
            raise DomainError(f"Expected {m - 2} coordinates for m={m}, got {len(y)}")
        if not DimensionService.domain_contains(m, a, y):
            raise DomainError(f"Point {y} is outside the domain D_(m,a) for m={m}, a={a}")

        Y = [a] + y + [1 - a - sum(y)]
        ones = [1 - a - sum(Y[1:j]) for j in range(m + 1)]
        ones[0] = 1.0
        ones[m] = 0.0

        def table(w: str) -> Optional[float]:
            if '0' not in w:
                return ones[len(w)] if len(w) <= m else 0.0
            inner = w[1:-1]
            if len(w) >= 2 and w[0] == '0' and w[-1] == '0' and '0' not in inner:
                return Y[len(inner)] - Y[len(inner) + 1]
            if w[0] == '0' and '0' not in w[1:]:
                return Y[len(w) - 1]
            if w[-1] == '0' and '0' not in w[:-1]:
                return Y[len(w) - 1]
            return None

        mass = {'': 1.0}
        for length in range(1, m + 2):
            for w in binary_words(length):
                value = table(w) if length <= m else None
                if value is None:
                    middle = mass[w[1:-1]]
                    value = mass[w[:-1]] * mass[w[1:]] / middle if middle > 0 else 0.0
                mass[w] = max(value, 0.0)

        cm = CylinderMeasure(max_order=m + 1, mass=mass)
        measure = MarkovService.markovize(cm, m)
        logger.debug(f"Max measure m={m}, a={a}: stationarity residual {measure.stationarity_residual:.3e}")
        return measure

    @staticmethod
    def random_markov_measure(sys: BetaSystem, order: int, rng: np.random.Generator,
                              zero_bias: float = 1.0) -> MarkovMeasure:
        """
        Random stationary `order`-step Markov measure supported on the legal words of sys.

        The probability of continuing with 0 is u**zero_bias for uniform u, so
        zero_bias < 1 favours zeros.
        """
        if order < 1:
            raise DomainError(f"Markov order must be at least 1, got {order}")
        states = tuple(binary_words(order))
        index = {s: i for i, s in enumerate(states)}
        P = np.zeros((len(states), len(states)))
        for i, s in enumerate(states):
            legal = ExpansionService.is_legal_word(s, sys)
            one_allowed = legal and ExpansionService.is_legal_word(s + '1', sys)
            q0 = rng.random() ** zero_bias if one_allowed else 1.0
            P[i, index[s[1:] + '0']] = q0
            if one_allowed:
                P[i, index[s[1:] + '1']] = 1.0 - q0
        p = MarkovService.stationary_vector(P)
        # illegal states are transient
        p[[i for i, s in enumerate(states) if not ExpansionService.is_legal_word(s, sys)]] = 0.0
        return MarkovMeasure(order=order, states=states, p=p / p.sum(), P=P)

    @staticmethod
    def random_markov_measure_with_frequency(sys: BetaSystem, order: int, a: float,
                                             rng: np.random.Generator) -> MarkovMeasure:
        """Random stationary `order`-step Markov measure with mu[0] = a exactly"""
        below = above = None
        for _ in range(MAX_RANDOM_ATTEMPTS):
            bias = float(np.exp(rng.uniform(-4.0, 4.0)))
            mu = MarkovService.random_markov_measure(sys, order, rng, zero_bias=bias)
            z = MarkovService.zero_frequency(mu)
            if z < a and below is None:
                below = (mu, z)
            elif z > a and above is None:
                above = (mu, z)
            if below and above:
                break
        else:
            raise DomainError(f"No random measures bracket zero frequency {a} on {sys.label}")

        (low, z_low), (high, z_high) = below, above
        weight = (z_high - a) / (z_high - z_low)
        low_cm = MarkovService.cylinder_measure(low, order + 1)
        high_cm = MarkovService.cylinder_measure(high, order + 1)
        mixed = {w: weight * low_cm[w] + (1 - weight) * high_cm[w] for w in low_cm.mass}
        return MarkovService.markovize(CylinderMeasure(max_order=order + 1, mass=mixed), order + 1)
