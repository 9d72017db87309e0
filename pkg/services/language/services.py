"""
Follower-set graphs of finite-type beta-shifts and exact word counting
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from core.exceptions import DomainError, UnsupportedBetaError
from services.expansions.services import BetaSystem, DigitWord, ExpansionService

logger = logging.getLogger(__name__)

MIN_ESTIMATE_LENGTH = 10


@dataclass(frozen=True)
class FollowerGraph:
    """
    (m-1)-block presentation of a finite-type beta-shift.

    States are the legal words of length m-1; an edge (src, dst, digit) appends
    `digit` to state `src`. For integer beta the block length is 0: a single
    state with one loop per digit.
    """
    system: BetaSystem
    block: int
    states: Tuple[DigitWord, ...]
    edges: Tuple[Tuple[int, int, int], ...]
    start_weights: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def adjacency(self) -> np.ndarray:
        """Edge multiplicities as an integer matrix"""
        matrix = np.zeros((self.size, self.size), dtype=np.int64)
        for src, dst, _ in self.edges:
            matrix[src, dst] += 1
        return matrix

    def weighted_adjacency(self, zero_weight: float) -> np.ndarray:
        """Adjacency with weight `zero_weight` on every edge emitting a 0"""
        matrix = np.zeros((self.size, self.size))
        for src, dst, digit in self.edges:
            matrix[src, dst] += zero_weight if digit == 0 else 1.0
        return matrix

    def is_strongly_connected(self) -> bool:
        n_components, _ = connected_components(csr_matrix(self.adjacency), directed=True, connection='strong')
        return n_components == 1


@dataclass(frozen=True)
class CountTable:
    """N(n,k): number of legal n-words with exactly k zeros, k = 0..n"""
    n: int
    counts: Tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, k: int) -> int:
        if 0 <= k <= self.n:
            return self.counts[k]
        return 0

    def to_csv(self) -> str:
        lines = ['n,k,count']
        lines.extend(f'{self.n},{k},{count}' for k, count in enumerate(self.counts))
        return '\n'.join(lines)


@dataclass(frozen=True)
class FrequencyEstimate:
    """Combinatorial dimension estimate log N(n,k) / (n log beta) around k = a*n"""
    n: int
    a: float
    k: int
    count: int
    value: float
    best_k: int
    best_value: float
    empty: bool = False
    neighbours: Tuple[int, ...] = field(default=())


class LanguageService:
    """Follower-set graphs, exact word counts and counting estimates"""

    @staticmethod
    def build_follower_graph(sys: BetaSystem) -> FollowerGraph:
        """(m-1)-block graph for a beta in (1,2) with finite eps(1,beta) of length m, or integer beta"""
        if sys.is_integer:
            loops = tuple((0, 0, digit) for digit in range(sys.alphabet_max + 1))
            return FollowerGraph(system=sys, block=0, states=(DigitWord(),), edges=loops, start_weights=(1,))

        if sys.finite_length is None:
            raise UnsupportedBetaError(f"{sys.label}: eps(1,beta) is not finite, the beta-shift is not of finite type")
        if sys.beta >= 2:
            raise UnsupportedBetaError(f"{sys.label}: follower graphs are built for beta in (1,2) only")

        block = sys.finite_length - 1
        states = tuple(ExpansionService.legal_words(sys, block))
        index = {state.digits: i for i, state in enumerate(states)}
        edges = []
        for i, state in enumerate(states):
            for digit in (0, 1):
                word = state + DigitWord((digit,))
                if not ExpansionService.is_legal_word(word, sys):
                    continue
                edges.append((i, index[word.digits[1:]], digit))

        logger.debug(f"{sys.label}: follower graph with {len(states)} states and {len(edges)} edges")
        return FollowerGraph(
            system=sys,
            block=block,
            states=states,
            edges=tuple(edges),
            start_weights=(1,) * len(states),
        )

    @staticmethod
    def count_words(graph: FollowerGraph, n: int) -> int:
        """Exact number of legal words of length n"""
        if n < 1:
            raise DomainError(f"Word length must be positive, got {n}")
        if n < graph.block:
            return sum(1 for _ in ExpansionService.legal_words(graph.system, n))

        vector = list(graph.start_weights)
        for _ in range(n - graph.block):
            nxt = [0] * graph.size
            for src, dst, _ in graph.edges:
                nxt[dst] += vector[src]
            vector = nxt
        return sum(vector)

    @staticmethod
    def count_words_by_zeros(graph: FollowerGraph, n: int) -> CountTable:
        """
        Exact N(n,k) for k = 0..n.

        Each state carries its zero-count polynomial packed into one integer,
        coefficient k in bits [k*W, (k+1)*W); appending a 0 shifts by W.
        W is a whole number of bytes with 2^W above the number of n-words, so
        slots never carry.
        """
        if n < 1:
            raise DomainError(f"Word length must be positive, got {n}")
        if n < graph.block:
            counts = [0] * (n + 1)
            for word in ExpansionService.legal_words(graph.system, n):
                counts[word.digits.count(0)] += 1
            return CountTable(n=n, counts=tuple(counts))

        width = 8 * math.ceil((n * graph.system.alphabet_max.bit_length() + 1) / 8)
        vector = [weight << (width * state.digits.count(0))
                  for weight, state in zip(graph.start_weights, graph.states)]
        for _ in range(n - graph.block):
            nxt = [0] * graph.size
            for src, dst, digit in graph.edges:
                nxt[dst] += vector[src] << width if digit == 0 else vector[src]
            vector = nxt

        slot = width // 8
        packed = sum(vector).to_bytes(slot * (n + 1), 'little')
        counts = tuple(int.from_bytes(packed[k * slot:(k + 1) * slot], 'little') for k in range(n + 1))
        return CountTable(n=n, counts=counts)

    @staticmethod
    def transfer_matrix_count(graph: FollowerGraph, n: int) -> int:
        """N(n) as start_weights . A^(n-m+1) . 1 in exact integer matrix arithmetic"""
        if n < max(graph.block, 1):
            raise DomainError(f"Transfer-matrix counting needs n >= {max(graph.block, 1)}, got {n}")
        matrix = graph.adjacency.astype(object)
        power = np.linalg.matrix_power(matrix, n - graph.block)
        weights = np.array(graph.start_weights, dtype=object)
        return int(weights.dot(power).sum())

    @staticmethod
    def frequency_estimate(graph: FollowerGraph, n: int, a: float, table: CountTable = None) -> FrequencyEstimate:
        if n < MIN_ESTIMATE_LENGTH:
            raise DomainError(f"Counting estimates need n >= {MIN_ESTIMATE_LENGTH}, got {n}")
        if not 0 <= a <= 1:
            raise DomainError(f"Frequency must lie in [0,1], got {a}")
        if table is None or table.n != n:
            table = LanguageService.count_words_by_zeros(graph, n)

        log_beta = graph.system.log_beta

        def value_at(k):
            count = table[k]
            return math.log(count) / (n * log_beta) if count > 0 else 0.0

        k = round(a * n)
        neighbours = tuple(sorted({
            j for j in (math.floor(a * n) - 1, math.floor(a * n), math.ceil(a * n) + 1, k) if 0 <= j <= n
        }))
        best_k = max(neighbours, key=lambda j: (table[j], -abs(j - k)))
        return FrequencyEstimate(
            n=n,
            a=a,
            k=k,
            count=table[k],
            value=value_at(k),
            best_k=best_k,
            best_value=value_at(best_k),
            empty=table[k] == 0,
            neighbours=neighbours,
        )

    @staticmethod
    def freq_dim_estimate(graph: FollowerGraph, n: int, a: float, sys: BetaSystem = None) -> float:
        """log N(n, round(a n)) / (n log beta); 0 when no word has that many zeros"""
        if sys is not None and sys != graph.system:
            raise DomainError(f"Graph was built for {graph.system.label}, not {sys.label}")
        return LanguageService.frequency_estimate(graph, n, a).value

