"""
Hausdorff dimension of the digit-frequency sets F_a

For a pseudo-golden beta of order m the dimension is max f_a / log beta over
the polytope D_(m,a). f_a is written through the renewal table
Y = (a, x_1, ..., x_(m-2), 1 - a - sum(x)):

    f_a(x) = a log a + sum_j phi(Y_j - Y_(j+1)) + phi(Y_(m-1))

so every term is phi of an affine function of x and D_(m,a) is the set where
all those arguments are non-negative.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.core.exceptions import ValidationError
from scipy.optimize import minimize_scalar
from scipy.special import entr

from core.exceptions import DomainError, UnsupportedBetaError, error_message
from services.expansions.services import BetaSystem, pseudo_golden_root
from services.language.services import FollowerGraph, LanguageService

logger = logging.getLogger(__name__)

DOMAIN_TOL = 1e-12
ENDPOINT_TOL = 1e-12
DISCRIMINANT_GUARD = 1e-14
MAX_NEWTON_ITERATIONS = 100
ARMIJO = 1e-4
MIN_STEP = 1e-14
PRESSURE_BRACKET = (-40.0, 40.0)
BOUNDARY_TOL = 1e-9
SLOPE_STEP = 1e-4
POWER_TOL = 1e-13
POWER_MAX_ITERATIONS = 2000
SCAN_STEP = 1e-4
DEFAULT_COUNTING_LENGTH = 2000
METHOD_AUTO = 'auto'
METHODS = (METHOD_AUTO, 'polytope', 'pressure', 'counting')


class Method(str, Enum):
    POLYTOPE = 'polytope-max'
    CLOSED_M3 = 'closed-m3'
    GOLDEN = 'golden'
    EGGLESTON = 'eggleston'
    PRESSURE = 'pressure'
    COUNTING = 'counting'


@dataclass(frozen=True)
class FreqQuery:
    sys: BetaSystem
    a: float

    def __post_init__(self):
        if not 0 <= self.a <= 1:
            raise DomainError(f"Frequency a must lie in [0,1], got {self.a}")


@dataclass(frozen=True)
class DimResult:
    """Dimension of F_a with the maximizer and how it was obtained"""
    dim: float
    method: Method
    argmax: Tuple[float, ...] = ()
    kkt_residual: float = 0.0
    empty_set: bool = False
    certified: bool = True
    boundary: bool = False
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.empty_set and self.dim != 0:
            raise ValueError('An empty frequency set has dimension 0')
        object.__setattr__(self, 'dim', min(max(float(self.dim), 0.0), 1.0))
        object.__setattr__(self, 'argmax', tuple(float(x) for x in self.argmax))

    @property
    def flag(self) -> str:
        if self.empty_set:
            return 'empty_set'
        if self.boundary:
            return 'boundary'
        if not self.certified:
            return 'uncertified'
        return ''


@dataclass(frozen=True)
class SpectrumRow:
    a: float
    result: Optional[DimResult]
    error: Optional[str] = None

    @property
    def flag(self) -> str:
        return f'error: {self.error}' if self.error else self.result.flag


@dataclass(frozen=True)
class Spectrum:
    system: BetaSystem
    rows: Tuple[SpectrumRow, ...]
    continuity: float

    @property
    def argmax_width(self) -> int:
        return max((len(r.result.argmax) for r in self.rows if r.result), default=0)

    @property
    def columns(self) -> List[str]:
        return ['a', 'dim', 'method', 'kkt_residual'] + \
            [f'argmax_{i}' for i in range(1, self.argmax_width + 1)] + ['flag']

    def as_rows(self) -> List[Dict]:
        rows = []
        for row in self.rows:
            record = {'a': row.a, 'flag': row.flag}
            if row.result is not None:
                record.update({
                    'dim': row.result.dim,
                    'method': row.result.method.value,
                    'kkt_residual': row.result.kkt_residual,
                })
                record.update({f'argmax_{i}': x for i, x in enumerate(row.result.argmax, start=1)})
            rows.append(record)
        return rows


@dataclass(frozen=True)
class FullDimensionPoint:
    a: float
    dim: float
    parry_frequency: Optional[float] = None


def _affine(m: int, a: float) -> Tuple[np.ndarray, np.ndarray]:
    """(B, c) with phi-arguments = B @ x + c"""
    if m < 2:
        raise DomainError(f"Order m must be at least 2, got {m}")
    n = m - 2
    y_const = np.zeros(m)
    y_coef = np.zeros((m, n))
    y_const[0] = a
    for i in range(n):
        y_coef[i + 1, i] = 1.0
    y_const[m - 1] = 1 - a
    y_coef[m - 1, :] = -1.0

    c = np.empty(m)
    B = np.empty((m, n))
    c[:-1] = y_const[:-1] - y_const[1:]
    B[:-1] = y_coef[:-1] - y_coef[1:]
    c[-1], B[-1] = y_const[-1], y_coef[-1]
    return B, c


def _as_vector(m: int, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != m - 2:
        raise DomainError(f"Expected a point with {m - 2} coordinates for m={m}, got {x.size}")
    return x


def _a_log_a(a: float) -> float:
    return -float(entr(a))


def parse_grid(text: str, limit: Optional[int] = None) -> List[float]:
    """`0.3,0.5,1` or inclusive `start:stop:step`, with at most `limit` points"""
    if ':' in text:
        start, stop, step = (float(part) for part in text.split(':'))
        if step <= 0 or stop < start:
            raise ValueError(f"empty grid {text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        if limit is not None and count > limit:
            raise ValueError(f"{count} points exceed the limit of {limit}")
        return [round(start + i * step, 12) for i in range(count)]
    grid = [float(part) for part in text.split(',') if part.strip()]
    if limit is not None and len(grid) > limit:
        raise ValueError(f"{len(grid)} points exceed the limit of {limit}")
    return grid


class DimensionService:
    """Dimension formulas, the polytope maximizer and the pressure oracle"""

    @staticmethod
    def phi_arguments(m: int, a: float, x: Sequence[float]) -> np.ndarray:
        B, c = _affine(m, a)
        return B @ _as_vector(m, x) + c

    @staticmethod
    def domain_contains(m: int, a: float, x: Sequence[float], tol: float = DOMAIN_TOL) -> bool:
        """x in D_(m,a): a >= x_1 >= ... >= x_(m-2) >= 0 and sum(x) <= 1-a <= sum(x) + x_(m-2)"""
        try:
            args = DimensionService.phi_arguments(m, a, x)
        except DomainError:
            return False
        if not 0 <= a <= 1:
            return False
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size and x[-1] < -tol:
            return False
        return bool(np.all(args >= -tol))

    @staticmethod
    def feasible_point(m: int, a: float) -> Tuple[float, ...]:
        if m < 2:
            raise DomainError(f"Order m must be at least 2, got {m}")
        if a < 1 / m - ENDPOINT_TOL or a > 1 + ENDPOINT_TOL:
            raise DomainError(f"D_(m,a) is empty for m={m}, a={a}: need 1/m <= a <= 1")
        if m == 2:
            return ()
        if a < 0.5:
            return (a,) + ((1 - 2 * a) / (m - 2),) * (m - 3)
        return (1 - a,) + (0.0,) * (m - 3)

    @staticmethod
    def interior_point(m: int, a: float) -> Tuple[float, ...]:
        """
        A point of D_(m,a) with every phi-argument strictly positive, for 1/m < a < 1.

        The phi-arguments are the gaps of a non-increasing Y with Y_0 = a and sum 1,
        so they equal a * p for a probability vector p on 1..m with mean 1/a. p mixes
        the uniform vector with a point mass at the end nearer to 1/a.
        """
        if m < 3:
            raise DomainError(f"D_(m,a) has interior points only for m >= 3, got m={m}")
        if not 1 / m < a < 1:
            raise DomainError(f"D_(m,a) has no interior for m={m}, a={a}: need 1/m < a < 1")
        half_width = (m - 1) / 2
        p = np.zeros(m)
        if a <= 2 / (m + 1):
            weight = min((m * a - 1) / a / half_width, 1.0)
            p[-1] = 1 - weight
        else:
            weight = min((1 - a) / a / half_width, 1.0)
            p[0] = 1 - weight
        p += weight / m
        gaps = a * p
        return tuple(float(y) for y in np.cumsum(gaps[::-1])[::-1][1:m - 1])

    @staticmethod
    def polytope_vertices(m: int, a: float) -> List[Tuple[float, ...]]:
        """Vertices of D_(m,a): feasible solutions of every (m-2)-subset of active constraints"""
        B, c = _affine(m, a)
        n = m - 2
        if n == 0:
            return [()] if np.all(c >= -DOMAIN_TOL) else []
        vertices = []
        for active in combinations(range(m), n):
            rows = list(active)
            try:
                x = np.linalg.solve(B[rows], -c[rows])
            except np.linalg.LinAlgError:
                continue
            if not DimensionService.domain_contains(m, a, x, tol=1e-10):
                continue
            if not any(np.allclose(x, v, atol=1e-12) for v in vertices):
                vertices.append(x)
        return [tuple(float(v) for v in vertex) for vertex in vertices]

    @staticmethod
    def f_a_eval(m: int, a: float, x: Sequence[float]) -> float:
        if not DimensionService.domain_contains(m, a, x):
            raise DomainError(f"Point {list(np.ravel(x))} is outside D_(m,a) for m={m}, a={a}")
        args = np.clip(DimensionService.phi_arguments(m, a, x), 0.0, None)
        return _a_log_a(a) + float(entr(args).sum())

    @staticmethod
    def f_a_gradient(m: int, a: float, x: Sequence[float]) -> np.ndarray:
        B, c = _affine(m, a)
        args = B @ _as_vector(m, x) + c
        if np.any(args <= 0):
            raise DomainError(f"Gradient needs an interior point of D_(m,a), got {list(np.ravel(x))}")
        return B.T @ (-np.log(args) - 1.0)

    @staticmethod
    def f_a_hessian(m: int, a: float, x: Sequence[float]) -> np.ndarray:
        B, c = _affine(m, a)
        args = B @ _as_vector(m, x) + c
        if np.any(args <= 0):
            raise DomainError(f"Hessian needs an interior point of D_(m,a), got {list(np.ravel(x))}")
        return -(B.T / args) @ B

    @staticmethod
    def maximize_f(m: int, a: float, tol: float = 1e-12) -> DimResult:
        """
        max f_a over D_(m,a) divided by log beta for the pseudo-golden root of order m.

        Damped Newton ascent from an interior start; the backtracking keeps every
        phi-argument positive so iterates never leave the interior.
        """
        if a > 1 + ENDPOINT_TOL or a < 0:
            raise DomainError(f"Frequency a must lie in [0,1], got {a}")
        log_beta = math.log(pseudo_golden_root(m))
        if a < 1 / m - ENDPOINT_TOL:
            return DimResult(dim=0.0, method=Method.POLYTOPE, empty_set=True)

        start = DimensionService.feasible_point(m, a)
        at_endpoint = abs(a - 1 / m) <= ENDPOINT_TOL or abs(a - 1) <= ENDPOINT_TOL
        if at_endpoint or m == 2:
            value = DimensionService.f_a_eval(m, a, start)
            return DimResult(
                dim=0.0 if at_endpoint else value / log_beta,
                method=Method.POLYTOPE,
                argmax=start,
                diagnostics={'f': value, 'iterations': 0},
            )

        B, c = _affine(m, a)
        x = np.asarray(DimensionService.interior_point(m, a))
        if np.any(B @ x + c <= 0):
            # the domain is thinner than float resolution around x
            value = _a_log_a(a) + float(entr(np.clip(B @ x + c, 0.0, None)).sum())
            logger.debug(f"maximize_f m={m} a={a}: no representable interior, using f at the gap point")
            return DimResult(
                dim=value / log_beta,
                method=Method.POLYTOPE,
                argmax=tuple(x),
                diagnostics={'f': value, 'iterations': 0},
            )

        def objective(point):
            return _a_log_a(a) + float(entr(B @ point + c).sum())

        value = objective(x)
        iterations = 0
        for iterations in range(1, MAX_NEWTON_ITERATIONS + 1):
            args = B @ x + c
            gradient = B.T @ (-np.log(args) - 1.0)
            hessian = -(B.T / args) @ B
            direction = np.linalg.solve(-hessian, gradient)
            decrement = float(gradient @ direction)
            if decrement / 2 < tol:
                break

            step = 1.0
            while np.any(B @ (x + step * direction) + c <= 0):
                step /= 2
            candidate = objective(x + step * direction)
            while candidate < value + ARMIJO * step * decrement and step > MIN_STEP:
                step /= 2
                candidate = objective(x + step * direction)
            if step <= MIN_STEP:
                break
            x, value = x + step * direction, candidate

        args = B @ x + c
        residual = float(np.linalg.norm(B.T @ (-np.log(args) - 1.0)))
        logger.debug(f"maximize_f m={m} a={a}: f={value!r} after {iterations} steps, kkt residual {residual:.2e}")
        return DimResult(
            dim=value / log_beta,
            method=Method.POLYTOPE,
            argmax=tuple(x),
            kkt_residual=residual,
            diagnostics={'f': value, 'iterations': iterations},
        )

    @staticmethod
    def closed_form_m3(sys: BetaSystem, a: float) -> float:
        """Explicit order-3 dimension through the root s = sqrt(-8a^2 + 12a - 3)"""
        if not (sys.is_pseudo_golden and sys.order == 3):
            raise UnsupportedBetaError(f"The closed form applies to the order-3 pseudo-golden root, not {sys.label}")
        if a < 1 / 3 - ENDPOINT_TOL or a > 1 + ENDPOINT_TOL:
            raise DomainError(f"The closed form needs 1/3 <= a <= 1, got {a}")
        discriminant = -8 * a * a + 12 * a - 3
        if discriminant < 0:
            if discriminant < -DISCRIMINANT_GUARD:
                raise DomainError(f"Negative discriminant {discriminant} at a={a}")
            discriminant = 0.0
        s = math.sqrt(discriminant)
        terms = [(10 * a - 3 - s) / 6, (-2 * a + 3 - s) / 6, (-a + s) / 3]
        value = _a_log_a(a) + sum(float(entr(max(t, 0.0))) for t in terms)
        return value / sys.log_beta

    @staticmethod
    def golden_dim(a: float) -> float:
        """[a log a - (2a-1) log(2a-1) - (1-a) log(1-a)] / log golden; 0 below 1/2"""
        if a > 1 + ENDPOINT_TOL or a < 0:
            raise DomainError(f"Frequency a must lie in [0,1], got {a}")
        if a < 0.5 - ENDPOINT_TOL:
            return 0.0
        value = _a_log_a(a) + float(entr(max(2 * a - 1, 0.0))) + float(entr(max(1 - a, 0.0)))
        return max(value, 0.0) / math.log((1 + math.sqrt(5)) / 2)

    @staticmethod
    def eggleston_dim(a: float, base: int = 2) -> float:
        """[-a log a - (1-a) log((1-a)/(base-1))] / log base"""
        if not 0 <= a <= 1:
            raise DomainError(f"Frequency a must lie in [0,1], got {a}")
        if base < 2:
            raise DomainError(f"Base must be at least 2, got {base}")
        value = float(entr(a)) + float(entr(1 - a)) + (1 - a) * math.log(base - 1)
        return value / math.log(base)

    @staticmethod
    def perron_pair(matrix: np.ndarray, tol: float = POWER_TOL) -> Tuple[float, np.ndarray]:
        """
        Perron root and positive eigenvector of a non-negative primitive matrix.

        Power iteration stops once the Collatz-Wielandt bounds min/max (Av)_i/v_i
        agree to tol; numpy.linalg.eig takes over when they do not.
        """
        matrix = np.asarray(matrix, dtype=float)
        vector = np.ones(matrix.shape[0])
        for _ in range(POWER_MAX_ITERATIONS):
            image = matrix @ vector
            if np.any(vector <= 0) or np.any(image <= 0):
                break
            ratios = image / vector
            low, high = ratios.min(), ratios.max()
            vector = image / np.linalg.norm(image)
            if high - low <= tol * high:
                return float((low + high) / 2), vector
        logger.debug(f"Power iteration did not settle on a {matrix.shape[0]}x{matrix.shape[0]} matrix; using eig")
        values, vectors = np.linalg.eig(matrix)
        k = int(np.argmax(values.real))
        vector = np.abs(vectors[:, k].real)
        return float(values[k].real), vector / np.linalg.norm(vector)

    @staticmethod
    def perron_root(matrix: np.ndarray, tol: float = POWER_TOL) -> float:
        return DimensionService.perron_pair(matrix, tol)[0]

    @staticmethod
    def pressure(graph: FollowerGraph, t: float) -> float:
        """log of the Perron root with weight e^t on zero-emitting edges"""
        return math.log(DimensionService.perron_root(graph.weighted_adjacency(math.exp(t))))

    @staticmethod
    def dim_via_pressure(graph: FollowerGraph, a: float, sys: Optional[BetaSystem] = None) -> DimResult:
        """
        inf_t (P(t) - t a) / log beta, the Legendre transform of the pressure.

        P is convex with P' ranging over the attainable zero frequencies, so the
        infimum sits at t = -inf (or +inf) exactly when the slope of P(t) - t a is
        still non-negative at the lower edge (non-positive at the upper edge) of
        the bracket. Those cases and raw values outside [0,1] are flagged boundary.
        """
        sys = sys or graph.system
        if not 0 < a < 1:
            raise DomainError(f"The pressure oracle needs 0 < a < 1, got {a}")
        if not graph.is_strongly_connected():
            raise DomainError(f"Follower graph of {sys.label} is not strongly connected")

        def legendre(t):
            return DimensionService.pressure(graph, t) - t * a

        def slope(t):
            return (legendre(t + SLOPE_STEP) - legendre(t - SLOPE_STEP)) / (2 * SLOPE_STEP)

        certified = sys.certified
        low, high = PRESSURE_BRACKET
        for edge, outward in ((low, slope(low) >= 0), (high, slope(high) <= 0)):
            if outward:
                raw = legendre(edge) / sys.log_beta
                logger.debug(f"Pressure infimum for a={a} lies beyond the bracket edge t={edge}")
                return DimResult(dim=0.0, method=Method.PRESSURE, certified=certified, boundary=True,
                                 diagnostics={'t': edge, 'raw': raw})

        found = minimize_scalar(
            legendre,
            bounds=(low, high),
            method='bounded',
            options={'xatol': 1e-10, 'maxiter': 500},
        )
        t = float(found.x)
        raw = float(found.fun) / sys.log_beta
        diagnostics = {'t': t, 'evaluations': int(found.nfev), 'raw': raw}
        if not -BOUNDARY_TOL <= raw <= 1 + BOUNDARY_TOL:
            logger.warning(f"Pressure dimension {raw!r} for a={a} falls outside [0,1]")
            return DimResult(dim=min(max(raw, 0.0), 1.0), method=Method.PRESSURE, certified=certified,
                             boundary=True, diagnostics=diagnostics)
        return DimResult(dim=raw, method=Method.PRESSURE, certified=certified, diagnostics=diagnostics)

    @staticmethod
    def dim_via_counting(graph: FollowerGraph, a: float, n: int = DEFAULT_COUNTING_LENGTH) -> DimResult:
        estimate = LanguageService.frequency_estimate(graph, n, a)
        return DimResult(
            dim=estimate.value,
            method=Method.COUNTING,
            empty_set=estimate.empty,
            certified=graph.system.certified,
            diagnostics={'n': n, 'k': estimate.k, 'best_k': estimate.best_k, 'best_value': estimate.best_value},
        )

    @staticmethod
    def parry_zero_frequency(graph: FollowerGraph) -> float:
        """Frequency of 0 under the measure of maximal entropy, P'(0)"""
        matrix = graph.adjacency.astype(float)
        zeros = graph.weighted_adjacency(1.0) - graph.weighted_adjacency(0.0)
        root, right = DimensionService.perron_pair(matrix)
        _, left = DimensionService.perron_pair(matrix.T)
        return float(left @ zeros @ right) / (root * float(left @ right))

    @staticmethod
    def freq_dim(query: FreqQuery, tol: float = 1e-12, allow_uncertified: bool = False) -> DimResult:
        sys, a = query.sys, query.a

        if sys.is_integer:
            dim = DimensionService.eggleston_dim(a, int(sys.beta))
            return DimResult(dim=dim, method=Method.EGGLESTON)

        if sys.is_golden:
            if a < 0.5 - ENDPOINT_TOL:
                return DimResult(dim=0.0, method=Method.GOLDEN, empty_set=True)
            if abs(a - 0.5) <= ENDPOINT_TOL or abs(a - 1) <= ENDPOINT_TOL:
                return DimResult(dim=0.0, method=Method.GOLDEN)
            return DimResult(dim=DimensionService.golden_dim(a), method=Method.GOLDEN)

        if sys.is_pseudo_golden:
            m = sys.order
            if a < 1 / m - ENDPOINT_TOL:
                return DimResult(dim=0.0, method=Method.CLOSED_M3 if m == 3 else Method.POLYTOPE, empty_set=True)
            if m == 3:
                optimum = DimensionService.maximize_f(m, a, tol)
                if abs(a - 1 / 3) <= ENDPOINT_TOL or abs(a - 1) <= ENDPOINT_TOL:
                    return DimResult(dim=0.0, method=Method.CLOSED_M3)
                dim = DimensionService.closed_form_m3(sys, a)
                return DimResult(
                    dim=dim,
                    method=Method.CLOSED_M3,
                    kkt_residual=optimum.kkt_residual,
                    diagnostics={'maximize_f': optimum.dim, 'delta': abs(optimum.dim - dim)},
                )
            return DimensionService.maximize_f(m, a, tol)

        if not allow_uncertified:
            raise UnsupportedBetaError(
                f"{sys.label} has no closed-form dimension; use the pressure method for an uncertified value"
            )
        if not 0 < a < 1:
            return DimResult(dim=0.0, method=Method.PRESSURE, certified=False, boundary=True)
        graph = LanguageService.build_follower_graph(sys)
        logger.warning(f"{sys.label}: dimension from the pressure oracle is uncertified")
        return DimensionService.dim_via_pressure(graph, a, sys)

    @staticmethod
    def solve(query: FreqQuery, method: str = METHOD_AUTO, tol: float = 1e-12,
              counting_length: int = DEFAULT_COUNTING_LENGTH, allow_uncertified: bool = False) -> DimResult:
        """Dimension of F_a by a named method; auto routes through freq_dim"""
        sys, a = query.sys, query.a
        if method == METHOD_AUTO:
            return DimensionService.freq_dim(query, tol, allow_uncertified)
        if method == 'polytope':
            if not sys.is_pseudo_golden:
                raise UnsupportedBetaError(f"The polytope maximizer needs a pseudo-golden beta, not {sys.label}")
            return DimensionService.maximize_f(sys.order, a, tol)

        graph = LanguageService.build_follower_graph(sys)
        if method == Method.PRESSURE.value:
            return DimensionService.dim_via_pressure(graph, a, sys)
        if method == Method.COUNTING.value:
            return DimensionService.dim_via_counting(graph, a, counting_length)
        raise DomainError(f"Unknown method {method!r}, expected one of {', '.join(METHODS)}")

    @staticmethod
    def spectrum(sys: BetaSystem, a_grid: Sequence[float], workers: int = 4, tol: float = 1e-12,
                 allow_uncertified: bool = False, method: str = METHOD_AUTO,
                 counting_length: int = DEFAULT_COUNTING_LENGTH) -> Spectrum:
        """Dimension on every grid point, rows in grid order, with the largest slope between neighbours"""
        def row(a):
            try:
                query = FreqQuery(sys, a)
                result = DimensionService.solve(query, method, tol, counting_length, allow_uncertified)
                return SpectrumRow(a=a, result=result)
            except ValidationError as e:
                return SpectrumRow(a=a, result=None, error=error_message(e))

        with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
            rows = tuple(executor.map(row, a_grid))

        ordered = sorted((r for r in rows if r.result is not None), key=lambda r: r.a)
        continuity = 0.0
        for left, right in zip(ordered, ordered[1:]):
            if right.a > left.a:
                continuity = max(continuity, abs(right.result.dim - left.result.dim) / (right.a - left.a))
        return Spectrum(system=sys, rows=rows, continuity=continuity)

    @staticmethod
    def full_dimension_point(sys: BetaSystem, step: float = SCAN_STEP) -> FullDimensionPoint:
        """The frequency of maximal dimension: grid scan then bounded refinement"""
        if not sys.certified:
            raise UnsupportedBetaError(f"{sys.label} has no closed-form dimension to scan")
        low = 0.0 if sys.is_integer else 1 / (sys.order or sys.finite_length or 2)

        def dim(a):
            return DimensionService.freq_dim(FreqQuery(sys, min(max(a, 0.0), 1.0))).dim

        grid = np.arange(low, 1.0 + step / 2, step)
        values = [dim(float(a)) for a in grid]
        best = int(np.argmax(values))
        lo, hi = max(low, grid[best] - step), min(1.0, grid[best] + step)
        found = minimize_scalar(lambda a: -dim(a), bounds=(lo, hi), method='bounded', options={'xatol': 1e-12})
        a_star, d_star = (float(found.x), -float(found.fun))
        if values[best] > d_star:
            a_star, d_star = float(grid[best]), values[best]

        parry = None
        if sys.is_integer or sys.finite_length is not None:
            parry = DimensionService.parry_zero_frequency(LanguageService.build_follower_graph(sys))
        return FullDimensionPoint(a=a_star, dim=d_star, parry_frequency=parry)
