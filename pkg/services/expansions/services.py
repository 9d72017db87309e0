"""
Greedy beta-expansions, expansions of 1, Parry admissibility and cylinder geometry
"""
import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from scipy.optimize import brentq

from core.exceptions import DomainError, LengthMismatchError

logger = logging.getLogger(__name__)

# Values within this distance of an integer are floored to that integer.
INTEGER_GUARD = 1e-12
# |T^m(1)| below this counts as a finite expansion of length m.
FINITE_TOL = 1e-12
MAX_TAIL_DEPTH = 64
ONE_PREFIX_LENGTH = 64
PSEUDO_GOLDEN_MATCH = 1e-9
MAX_PSEUDO_GOLDEN_ORDER = 40
MAX_COVERING_ORDER = 20
GUARD_DIGITS = 20

_contexts = threading.local()


def _mp_context(digits: int) -> mpmath.ctx_mp.MPContext:
    """Thread-private mpmath context with at least `digits` decimal digits"""
    ctx = getattr(_contexts, 'ctx', None)
    if ctx is None:
        ctx = mpmath.MPContext()
        _contexts.ctx = ctx
    ctx.dps = max(digits, 30)
    return ctx


def _guarded_floor(value) -> int:
    ctx = getattr(value, 'context', mpmath.mp)
    nearest = int(ctx.nint(value))
    if abs(value - nearest) < INTEGER_GUARD:
        return nearest
    return int(ctx.floor(value))


def pseudo_golden_root(m: int) -> float:
    """Root in (1,2) of x^m = x^(m-1) + ... + x + 1"""
    return brentq(
        lambda b: b ** m - sum(b ** j for j in range(m)),
        1.0, 2.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500,
    )


class Ordering(Enum):
    LESS = 'less'
    EQUAL = 'equal'
    GREATER = 'greater'


@dataclass(frozen=True)
class DigitWord:
    """Finite word over the digit alphabet"""
    digits: Tuple[int, ...] = ()

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        if any(d < 0 for d in digits):
            raise DomainError(f"Digits must be non-negative: {digits}")
        object.__setattr__(self, 'digits', digits)

    @classmethod
    def parse(cls, text: str, alphabet_max: Optional[int] = None) -> 'DigitWord':
        text = text.strip()
        if text and not text.isdigit():
            raise DomainError(f"Not a digit word: {text!r}")
        word = cls(tuple(int(c) for c in text))
        if alphabet_max is not None:
            word.check_alphabet(alphabet_max)
        return word

    @classmethod
    def zeros(cls, n: int) -> 'DigitWord':
        return cls((0,) * n)

    @classmethod
    def coerce(cls, word: Union['DigitWord', str, Sequence[int]],
               alphabet_max: Optional[int] = None) -> 'DigitWord':
        """Accept a DigitWord, a digit string or a digit sequence; digits above `alphabet_max` are rejected"""
        if isinstance(word, str):
            return cls.parse(word, alphabet_max)
        if not isinstance(word, DigitWord):
            word = cls(tuple(word))
        if alphabet_max is not None:
            word.check_alphabet(alphabet_max)
        return word

    @property
    def length(self) -> int:
        return len(self.digits)

    def check_alphabet(self, alphabet_max: int) -> None:
        if any(d > alphabet_max for d in self.digits):
            raise DomainError(f"Word {self} has digits above {alphabet_max}")

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return DigitWord(self.digits[item])
        return self.digits[item]

    def __add__(self, other: 'DigitWord') -> 'DigitWord':
        return DigitWord(self.digits + DigitWord.coerce(other).digits)

    def __str__(self):
        return ''.join(str(d) for d in self.digits)


@dataclass(frozen=True)
class BetaSystem:
    """A beta > 1 with its expansion of 1; the environment for all admissibility questions"""
    beta: float
    alphabet_max: int
    eps_one: DigitWord
    finite_length: Optional[int]
    quasi_greedy_period: DigitWord
    kind: str = 'generic'
    order: Optional[int] = None
    polynomial: Optional[Tuple[int, ...]] = None

    @classmethod
    def pseudo_golden(cls, m: int) -> 'BetaSystem':
        """Root in (1,2) of x^m = x^(m-1) + ... + x + 1; m=2 is the golden ratio"""
        if m < 2:
            raise DomainError(f"Pseudo-golden order must be at least 2, got {m}")
        return cls._from_beta(pseudo_golden_root(m), kind='pseudo_golden', order=m, polynomial=(1,) + (-1,) * m)

    @classmethod
    def golden(cls) -> 'BetaSystem':
        return cls.pseudo_golden(2)

    @classmethod
    def integer(cls, k: int) -> 'BetaSystem':
        if int(k) != k or k < 2:
            raise DomainError(f"Integer beta must be an integer >= 2, got {k}")
        k = int(k)
        return cls(
            beta=float(k),
            alphabet_max=k - 1,
            eps_one=DigitWord((k - 1,) * ONE_PREFIX_LENGTH),
            finite_length=None,
            quasi_greedy_period=DigitWord((k - 1,)),
            kind='integer',
            polynomial=(1, -k),
        )

    @classmethod
    def from_value(cls, beta: float) -> 'BetaSystem':
        """Route a numeric beta to the integer, pseudo-golden or generic system"""
        if not beta > 1:
            raise DomainError(f"beta must exceed 1, got {beta}")
        if abs(beta - round(beta)) < INTEGER_GUARD:
            return cls.integer(round(beta))
        if beta < 2:
            for m in range(2, MAX_PSEUDO_GOLDEN_ORDER + 1):
                root = pseudo_golden_root(m)
                if abs(root - beta) < PSEUDO_GOLDEN_MATCH:
                    logger.info(f"beta={beta!r} matched the pseudo-golden root of order {m}")
                    return cls.pseudo_golden(m)
                if root > beta + PSEUDO_GOLDEN_MATCH:
                    break
        return cls._from_beta(float(beta))

    @classmethod
    def _from_beta(cls, beta: float, kind: str = 'generic', order: Optional[int] = None,
                   polynomial: Optional[Tuple[int, ...]] = None) -> 'BetaSystem':
        alphabet_max = math.ceil(beta) - 1
        beta_mp = _root(beta, polynomial, _working_digits(beta, ONE_PREFIX_LENGTH))
        digits, finite_length = _expansion_of_one(beta_mp, ONE_PREFIX_LENGTH)
        if finite_length is not None:
            period = digits[:finite_length - 1] + (digits[finite_length - 1] - 1,)
            logger.debug(f"beta={beta!r}: eps(1,beta) is finite with length {finite_length}")
        else:
            period = ()
        return cls(
            beta=beta,
            alphabet_max=alphabet_max,
            eps_one=DigitWord(digits),
            finite_length=finite_length,
            quasi_greedy_period=DigitWord(period),
            kind=kind,
            order=order,
            polynomial=polynomial,
        )

    @property
    def is_integer(self) -> bool:
        return self.kind == 'integer'

    @property
    def is_pseudo_golden(self) -> bool:
        return self.kind == 'pseudo_golden'

    @property
    def is_golden(self) -> bool:
        return self.is_pseudo_golden and self.order == 2

    @property
    def certified(self) -> bool:
        """A closed-form dimension formula exists for this beta"""
        return self.is_pseudo_golden or self.is_integer

    @property
    def log_beta(self) -> float:
        return math.log(self.beta)

    @property
    def label(self) -> str:
        if self.is_golden:
            return 'golden ratio'
        if self.is_pseudo_golden:
            return f'pseudo-golden m={self.order}'
        if self.is_integer:
            return f'beta={int(self.beta)}'
        return f'beta={self.beta!r}'

    def beta_mp(self, digits: int):
        """beta in the thread-private mpmath context at `digits` precision"""
        return _root(self.beta, self.polynomial, digits)


def _root(beta: float, polynomial: Optional[Tuple[int, ...]], digits: int):
    ctx = _mp_context(digits)
    if polynomial is None:
        return ctx.mpf(beta)
    coefficients = [ctx.mpf(c) for c in polynomial]
    return ctx.findroot(lambda z: ctx.polyval(coefficients, z), ctx.mpf(beta))


def _working_digits(beta: float, n: int) -> int:
    return int(n * math.log10(max(beta, 2.0))) + GUARD_DIGITS


def _greedy_digits(x, beta, n: int) -> List[int]:
    """First n greedy digits of x, iterating T on the types of x and beta"""
    digits = []
    orbit = x
    for _ in range(n):
        y = beta * orbit
        digit = _guarded_floor(y)
        orbit = y - digit
        if orbit < 0:
            orbit = orbit * 0
        digits.append(digit)
    return digits


def _expansion_of_one(beta_mp, n: int) -> Tuple[Tuple[int, ...], Optional[int]]:
    digits = []
    orbit = beta_mp.context.mpf(1)
    finite_length = None
    for k in range(1, n + 1):
        if finite_length is not None:
            digits.append(0)
            continue
        y = beta_mp * orbit
        digit = _guarded_floor(y)
        orbit = y - digit
        digits.append(digit)
        if abs(orbit) < FINITE_TOL:
            finite_length = k
    return tuple(digits), finite_length


@dataclass(frozen=True)
class CylinderInterval:
    """The interval of x in [0,1) whose expansion starts with `word`"""
    word: DigitWord
    left: float
    right: float
    order: int
    empty: bool = False

    @property
    def length(self) -> float:
        return self.right - self.left


class ExpansionService:
    """Greedy expansions and admissibility for a BetaSystem"""

    @staticmethod
    def beta_transform(x: float, sys: BetaSystem) -> float:
        """T(x) = beta*x - floor(beta*x)"""
        if not 0 <= x <= 1:
            raise DomainError(f"x must lie in [0,1], got {x}")
        y = sys.beta * x
        result = y - _guarded_floor(y)
        return min(max(result, 0.0), 1.0)

    @staticmethod
    def greedy_expand(x: float, sys: BetaSystem, n: int) -> DigitWord:
        """First n digits of the greedy beta-expansion of x in [0,1)"""
        if not 0 <= x < 1:
            raise DomainError(f"x must lie in [0,1), got {x}")
        if n < 1:
            raise DomainError(f"Number of digits must be positive, got {n}")
        beta = sys.beta_mp(_working_digits(sys.beta, n))
        ctx = _mp_context(_working_digits(sys.beta, n))
        return DigitWord(_greedy_digits(ctx.mpf(x), beta, n))

    @staticmethod
    def expand_one(sys: BetaSystem, n: int) -> Tuple[DigitWord, bool]:
        """First n digits of eps(1,beta) and whether it was seen to be finite"""
        if n < 1:
            raise DomainError(f"Number of digits must be positive, got {n}")
        if sys.is_integer:
            return DigitWord((sys.alphabet_max,) * n), False
        if sys.finite_length is not None and sys.finite_length <= len(sys.eps_one):
            digits = (sys.eps_one.digits + (0,) * n)[:n]
            return DigitWord(digits), sys.finite_length <= n
        digits, finite_length = _expansion_of_one(sys.beta_mp(_working_digits(sys.beta, n)), n)
        return DigitWord(digits), finite_length is not None

    @staticmethod
    def quasi_greedy_one(sys: BetaSystem, n: int) -> DigitWord:
        """First n digits of the modified expansion eps*(1,beta)"""
        if n < 0:
            raise DomainError(f"Number of digits must be non-negative, got {n}")
        period = sys.quasi_greedy_period.digits
        if period:
            repeats = n // len(period) + 1
            return DigitWord((period * repeats)[:n])
        if n <= len(sys.eps_one):
            return sys.eps_one[:n]
        return ExpansionService.expand_one(sys, n)[0]

    @staticmethod
    def lex_compare(u, v) -> Ordering:
        u, v = DigitWord.coerce(u), DigitWord.coerce(v)
        if len(u) != len(v):
            raise LengthMismatchError(f"Cannot compare words of lengths {len(u)} and {len(v)}")
        if u.digits < v.digits:
            return Ordering.LESS
        if u.digits > v.digits:
            return Ordering.GREATER
        return Ordering.EQUAL

    @staticmethod
    def is_legal_word(w, sys: BetaSystem) -> bool:
        """Every suffix of w is lexicographically <= the prefix of eps*(1,beta) of equal length"""
        w = DigitWord.coerce(w, sys.alphabet_max)
        eps_star = ExpansionService.quasi_greedy_one(sys, len(w)).digits
        active: FrozenSet[int] = frozenset()
        for digit in w:
            active = ParryAutomaton.advance(active, digit, eps_star)
            if active is None:
                return False
        return True

    @staticmethod
    def legal_words(sys: BetaSystem, n: int) -> Iterator[DigitWord]:
        """All legal words of length n in lexicographic order"""
        eps_star = ExpansionService.quasi_greedy_one(sys, n).digits

        def extend(prefix, active):
            if len(prefix) == n:
                yield DigitWord(prefix)
                return
            for digit in range(sys.alphabet_max + 1):
                nxt = ParryAutomaton.advance(active, digit, eps_star)
                if nxt is not None:
                    yield from extend(prefix + (digit,), nxt)

        yield from extend((), frozenset())

    @staticmethod
    def project(w, sys: BetaSystem) -> float:
        """pi_beta(w) = sum w_i beta^-i"""
        w = DigitWord.coerce(w, sys.alphabet_max)
        if not len(w):
            return 0.0
        digits = _working_digits(sys.beta, len(w))
        beta = sys.beta_mp(digits)
        ctx = _mp_context(digits)
        return float(ctx.fsum(d * beta ** (-i) for i, d in enumerate(w, start=1) if d))

    @staticmethod
    def expansion_residual(x: float, w, sys: BetaSystem) -> float:
        """|pi_beta(w) - x| evaluated at working precision"""
        w = DigitWord.coerce(w, sys.alphabet_max)
        digits = _working_digits(sys.beta, len(w))
        beta = sys.beta_mp(digits)
        ctx = _mp_context(digits)
        value = ctx.fsum(d * beta ** (-i) for i, d in enumerate(w, start=1) if d)
        return float(abs(value - ctx.mpf(x)))

    @staticmethod
    def sequence_distance(u, v, sys: BetaSystem) -> float:
        """beta^-k for the first disagreement index k; 0 for equal words"""
        u, v = DigitWord.coerce(u, sys.alphabet_max), DigitWord.coerce(v, sys.alphabet_max)
        if len(u) != len(v):
            raise LengthMismatchError(f"Cannot measure distance between words of lengths {len(u)} and {len(v)}")
        for k, (a, b) in enumerate(zip(u, v)):
            if a != b:
                return sys.beta ** (-k)
        return 0.0

    @staticmethod
    def cylinder_interval(w, sys: BetaSystem) -> CylinderInterval:
        w = DigitWord.coerce(w, sys.alphabet_max)
        left = ExpansionService.project(w, sys)
        eps_star = ExpansionService.quasi_greedy_one(sys, len(w) + MAX_TAIL_DEPTH).digits
        active = ParryAutomaton.run(w.digits, eps_star)
        if active is None:
            return CylinderInterval(word=w, left=left, right=left, order=len(w), empty=True)
        tail = ParryAutomaton.maximal_tail(active, eps_star, MAX_TAIL_DEPTH)
        right = left + sys.beta ** (-len(w)) * _project_float(tail, sys.beta)
        return CylinderInterval(word=w, left=left, right=right, order=len(w))

    @staticmethod
    def covering_count(x: float, n: int, sys: BetaSystem) -> int:
        """Number of order-n cylinders meeting B(x, beta^-n) intersected with [0,1)"""
        if not 0 <= x < 1:
            raise DomainError(f"x must lie in [0,1), got {x}")
        if not 1 <= n <= MAX_COVERING_ORDER:
            raise DomainError(f"Covering order must lie in [1, {MAX_COVERING_ORDER}], got {n}")
        radius = sys.beta ** (-n)
        low, high = max(x - radius, 0.0), min(x + radius, 1.0)
        eps_star = ExpansionService.quasi_greedy_one(sys, n + MAX_TAIL_DEPTH).digits
        count = 0
        stack = [(0, 0.0, frozenset(), ())]
        while stack:
            depth, left, active, digits = stack.pop()
            if depth == n:
                count += 1
                continue
            scale = sys.beta ** (-(depth + 1))
            for digit in range(sys.alphabet_max + 1):
                nxt = ParryAutomaton.advance(active, digit, eps_star)
                if nxt is None:
                    continue
                child_left = left + digit * scale
                tail = ParryAutomaton.maximal_tail(nxt, eps_star, MAX_TAIL_DEPTH)
                child_right = child_left + scale * _project_float(tail, sys.beta)
                if child_left < high and child_right > low:
                    stack.append((depth + 1, child_left, nxt, digits + (digit,)))
        return count


class ParryAutomaton:
    """
    Streaming form of Parry's criterion.

    The state is the set of lengths j such that the word read so far ends with
    the first j digits of eps*(1,beta). A digit d is legal iff d <= eps*[j] for
    every such j (j = 0 included).
    """

    @staticmethod
    def advance(active: FrozenSet[int], digit: int, eps_star: Sequence[int]) -> Optional[FrozenSet[int]]:
        nxt = set()
        for j in active | {0}:
            bound = eps_star[j]
            if digit > bound:
                return None
            if digit == bound:
                nxt.add(j + 1)
        return frozenset(nxt)

    @staticmethod
    def run(digits: Sequence[int], eps_star: Sequence[int]) -> Optional[FrozenSet[int]]:
        active: Optional[FrozenSet[int]] = frozenset()
        for digit in digits:
            active = ParryAutomaton.advance(active, digit, eps_star)
            if active is None:
                return None
        return active

    @staticmethod
    def maximal_tail(active: FrozenSet[int], eps_star: Sequence[int], depth: int) -> List[int]:
        """Lexicographically largest legal continuation of the given length"""
        tail = []
        for _ in range(depth):
            digit = min(eps_star[j] for j in active | {0})
            active = ParryAutomaton.advance(active, digit, eps_star)
            tail.append(digit)
        return tail


def _project_float(digits: Sequence[int], beta: float) -> float:
    value = 0.0
    for digit in reversed(digits):
        value = (value + digit) / beta
    return value
