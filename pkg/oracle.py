"""
Exact ground truth for small models

Full enumeration of the union law over every community placement, exact
crossing probabilities of edges and cherries between [r] and [n] minus [r],
and the finite-n inequalities built on them. All arithmetic is rational;
floats appear only when a report is rendered.
"""

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import networkx as nx
import numpy as np

from config import ORACLE_CONFIG
from gen import RngStream, embed_fixed_graph
from model import (
    BernoulliYQ,
    BudgetExceededError,
    CliqueSizes,
    FixedGraphs,
    GraphTemplate,
    ModelSpec,
    PreconditionError,
    require_valid,
)

logger = logging.getLogger("ORACLE")

ENUMERATION_MAX_N = 8

# ============================================================================
# DATA MODELS
# ============================================================================


@dataclass(frozen=True, order=True)
class Outcome:
    connected: bool
    eta1: int
    d_prime_1: int
    delta: int


OUTCOME_FIELDS = ('connected', 'eta1', 'd_prime_1', 'delta')


@dataclass(frozen=True)
class ExactDistribution:
    """Joint law of (connected, eta1, d'(1), delta) as exact rationals"""
    outcomes: dict[Outcome, Fraction]

    def total(self) -> Fraction:
        return sum(self.outcomes.values(), Fraction(0))

    def probability(self, predicate: Callable[[Outcome], bool]) -> Fraction:
        return sum((p for o, p in self.outcomes.items() if predicate(o)), Fraction(0))

    def marginal(self, name: str) -> dict:
        if name not in OUTCOME_FIELDS:
            raise PreconditionError(f"unknown outcome field {name!r}; expected one of {OUTCOME_FIELDS}")
        law = defaultdict(Fraction)
        for outcome, p in self.outcomes.items():
            law[getattr(outcome, name)] += p
        return dict(sorted(law.items()))


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    left: Optional[Fraction]
    right: Optional[Fraction]
    holds: bool
    skipped: str = ''

    def as_dict(self) -> dict:
        return {
            'name': self.name,
            'left': None if self.left is None else float(self.left),
            'right': None if self.right is None else float(self.right),
            'holds': self.holds,
            'skipped': self.skipped,
        }


@dataclass(frozen=True)
class NegativeCorrelationReport:
    n: int
    r: int
    checks: tuple[InequalityCheck, ...]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.checks)


@dataclass(frozen=True)
class MultinomialReport:
    left: Fraction
    power: Fraction
    remainder: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return 0 <= self.remainder <= self.bound


@dataclass(frozen=True)
class BasicBoundReport:
    n: int
    r: int
    x: int
    trials: int
    estimate: float
    sigma: float
    bound: Fraction
    passed: bool
    strict_margin: float
    exact: Optional[Fraction] = field(default=None)


# ============================================================================
# ENUMERATION
# ============================================================================


def _falling(n: int, k: int) -> int:
    return math.perm(n, k) if 0 <= k <= n else 0


def _placements(spec: ModelSpec, index: int) -> dict[frozenset, Fraction]:
    """Distinct edge sets of community `index` with their exact probabilities"""
    n = spec.n
    law = defaultdict(Fraction)
    match spec.kind:
        case FixedGraphs():
            template = spec.template_for(index)
            weight = Fraction(1, _falling(n, template.vertices))
            for image in itertools.permutations(range(1, n + 1), template.vertices):
                edges = frozenset(
                    tuple(sorted((image[u - 1], image[v - 1]))) for u, v in template.edges
                )
                law[edges] += weight
        case CliqueSizes(support=support):
            for atom in support:
                _add_cliques(law, n, min(atom.size, n), Fraction(atom.w))
        case BernoulliYQ(support=support):
            for atom in support:
                if 0.0 < atom.q < 1.0:
                    raise PreconditionError("enumeration needs edge densities 0 or 1")
                size = min(atom.y, n) if atom.q == 1.0 else 0
                _add_cliques(law, n, size, Fraction(atom.w))
    return dict(law)


def _add_cliques(law: dict, n: int, size: int, weight: Fraction) -> None:
    if weight == 0:
        return
    if size < 2:
        law[frozenset()] += weight
        return
    each = weight / math.comb(n, size)
    for members in itertools.combinations(range(1, n + 1), size):
        law[frozenset(itertools.combinations(members, 2))] += each


def _outcome(n: int, edges: frozenset, d_prime_1: int) -> Outcome:
    g = nx.Graph()
    g.add_nodes_from(range(1, n + 1))
    g.add_edges_from(edges)
    degrees = [d for _, d in g.degree()]
    return Outcome(
        connected=nx.is_connected(g),
        eta1=sum(1 for d in degrees if d == 0),
        d_prime_1=d_prime_1,
        delta=min(degrees),
    )


def enumerate_model(spec: ModelSpec, budget: Optional[int] = None) -> ExactDistribution:
    """
    Exact law of the union statistics by folding communities one at a time.

    States are (union edge set, d'(1)) pairs with merged probabilities; the
    budget bounds the total number of state x placement combinations.
    """
    require_valid(spec)
    if spec.n > ENUMERATION_MAX_N:
        raise PreconditionError(f"enumeration is limited to n <= {ENUMERATION_MAX_N}, got n={spec.n}")
    budget = ORACLE_CONFIG['enumeration_budget'] if budget is None else budget

    states = {(frozenset(), 0): Fraction(1)}
    work = 0
    for index in range(spec.m):
        placements = _placements(spec, index)
        work += len(states) * len(placements)
        if work > budget:
            estimate = work * max(1, spec.m - index)
            raise BudgetExceededError(f"enumeration over {spec.m} communities exceeds budget {budget}", estimate)
        merged = defaultdict(Fraction)
        for (union, d1), p in states.items():
            for edges, q in placements.items():
                touches = any(1 in e for e in edges)
                merged[(union | edges, d1 + touches)] += p * q
        states = merged

    outcomes = defaultdict(Fraction)
    for (union, d1), p in states.items():
        outcomes[_outcome(spec.n, union, d1)] += p
    logger.debug("enumerated n=%d m=%d: %d states, work %d", spec.n, spec.m, len(states), work)
    return ExactDistribution(outcomes=dict(sorted(outcomes.items())))


def enumerate_fixed_model(n: int, templates: Sequence[GraphTemplate], budget: Optional[int] = None) -> ExactDistribution:
    """One community per template, each placed by a uniform injection"""
    spec = ModelSpec(n=n, m=len(templates), kind=FixedGraphs(tuple(templates)))
    return enumerate_model(spec, budget)


# ============================================================================
# CROSSING PROBABILITIES
# ============================================================================


def _check_split(n: int, r: int) -> None:
    if not 1 <= r <= n - 1:
        raise PreconditionError(f"r must lie in [1, n-1], got r={r}, n={n}")


def crossing_edges(n: int, r: int) -> int:
    """Edges of K_n with one endpoint in [r] and the other outside"""
    if r <= 0 or r >= n:
        return 0
    return r * (n - r)


def crossing_cherries(n: int, r: int) -> int:
    """Cherries (paths of length 2) of K_n not contained in either side"""
    if r <= 0 or r >= n:
        return 0
    return 3 * math.comb(r, 2) * (n - r) + 3 * math.comb(n - r, 2) * r


def p_edge_connects(n: int, r: int) -> Fraction:
    _check_split(n, r)
    return Fraction(2 * r * (n - r), n * (n - 1))


def p_cherry_connects(n: int, r: int) -> Fraction:
    if n < 3:
        raise PreconditionError(f"a cherry needs n >= 3, got n={n}")
    _check_split(n, r)
    total = _falling(n, 3)
    return 1 - Fraction(_falling(r, 3), total) - Fraction(_falling(n - r, 3), total)


def _cherry_classes(n: int, r: int) -> list[tuple[int, int]]:
    """(count, vertices inside [r]) for each class of crossing cherry"""
    inside, outside = math.comb(r, 2) * (n - r), math.comb(n - r, 2) * r
    return [
        (2 * inside, 2),   # centre in [r], one leaf outside
        (inside, 2),       # centre outside, both leaves in [r]
        (2 * outside, 1),  # centre outside, one leaf in [r]
        (outside, 1),      # centre in [r], both leaves outside
    ]


def p_two_edges_joint(n: int, r: int) -> Fraction:
    """Both of two vertex-disjoint random edges cross the split"""
    if n < 4:
        raise PreconditionError(f"two disjoint edges need n >= 4, got n={n}")
    _check_split(n, r)
    given_first = Fraction(crossing_edges(n - 2, r - 1), math.comb(n - 2, 2))
    return p_edge_connects(n, r) * given_first


def p_edge_cherry_joint(n: int, r: int) -> Fraction:
    """A random edge and a vertex-disjoint random cherry both cross the split"""
    if n < 5:
        raise PreconditionError(f"a disjoint edge and cherry need n >= 5, got n={n}")
    _check_split(n, r)
    cherries = 3 * math.comb(n, 3)
    rest_edges = math.comb(n - 3, 2)
    return sum(
        (Fraction(count, cherries) * Fraction(crossing_edges(n - 3, r - j), rest_edges)
         for count, j in _cherry_classes(n, r)),
        Fraction(0),
    )


def p_two_cherries_joint(n: int, r: int) -> Fraction:
    """Both of two vertex-disjoint random cherries cross the split"""
    if n < 6:
        raise PreconditionError(f"two disjoint cherries need n >= 6, got n={n}")
    _check_split(n, r)
    cherries = 3 * math.comb(n, 3)
    rest_cherries = 3 * math.comb(n - 3, 3)
    return sum(
        (Fraction(count, cherries) * Fraction(crossing_cherries(n - 3, r - j), rest_cherries)
         for count, j in _cherry_classes(n, r)),
        Fraction(0),
    )


def crossing_counts_by_enumeration(template: GraphTemplate, n: int) -> dict[int, Fraction]:
    """P{random copy of template connects [r] and its complement} for every r, by exhaustive placement"""
    x = template.vertices
    if x > n:
        raise PreconditionError(f"template has {x} vertices but n={n}")
    placements = _falling(n, x)
    if placements > ORACLE_CONFIG['enumeration_budget']:
        raise BudgetExceededError("placement enumeration exceeds budget", placements)

    hits = [0] * n
    for image in itertools.permutations(range(1, n + 1), x):
        # an edge (u, v), u < v, crosses exactly for r in [u, v - 1]
        crosses = [False] * n
        for a, b in template.edges:
            u, v = sorted((image[a - 1], image[b - 1]))
            for r in range(u, v):
                crosses[r] = True
        for r in range(1, n):
            if crosses[r]:
                hits[r] += 1
    return {r: Fraction(hits[r], placements) for r in range(1, n)}


def crossing_probability_by_enumeration(template: GraphTemplate, n: int, r: int) -> Fraction:
    _check_split(n, r)
    return crossing_counts_by_enumeration(template, n)[r]


# ============================================================================
# LOWER BOUNDS
# ============================================================================


def _check_bound_range(n: int, r: int) -> None:
    if r < 1 or 10 * r > n:
        raise PreconditionError(f"the crossing lower bound needs 1 <= r <= n/10, got r={r}, n={n}")


def basic_lower_bound(n: int, r: int, x: int) -> Fraction:
    """(r/n)(1 - r/n) x - (1/2)(r/n)^2 x^2"""
    _check_bound_range(n, r)
    if not 2 <= x <= n:
        raise PreconditionError(f"x must lie in [2, n], got x={x}")
    ratio = Fraction(r, n)
    return ratio * (1 - ratio) * x - ratio ** 2 * x ** 2 / 2


def random_template_lower_bound(n: int, r: int, x_law: dict[int, Fraction]) -> Fraction:
    """(r/n) E X - (r/n) E(X min{1, (3/2)(r/n) X}) for a random graph with X non-isolated vertices"""
    _check_bound_range(n, r)
    ratio = Fraction(r, n)
    mean = sum((Fraction(p) * x for x, p in x_law.items()), Fraction(0))
    damped = sum(
        (Fraction(p) * x * min(Fraction(1), Fraction(3, 2) * ratio * x) for x, p in x_law.items()),
        Fraction(0),
    )
    return ratio * mean - ratio * damped


def check_basic_bound(template: GraphTemplate, n: int, r: int, trials: int,
                      master_seed: Optional[int] = None) -> BasicBoundReport:
    """Monte Carlo P{copy of template connects [r], [n] minus [r]} against the basic bound, 4 sigma allowance"""
    if template.min_degree() < 1:
        raise PreconditionError("template has an isolated vertex")
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    bound = basic_lower_bound(n, r, template.vertices)
    seed = 0 if master_seed is None else master_seed

    hits = 0
    for t in range(trials):
        copy = embed_fixed_graph(template, n, RngStream(seed, t))
        if any(u <= r < v for u, v in copy.edges):
            hits += 1
    estimate = hits / trials
    sigma = math.sqrt(max(estimate * (1 - estimate), 1e-12) / trials)

    exact = None
    if _falling(n, template.vertices) <= ORACLE_CONFIG['enumeration_budget']:
        exact = crossing_probability_by_enumeration(template, n, r)

    return BasicBoundReport(
        n=n, r=r, x=template.vertices, trials=trials,
        estimate=estimate, sigma=sigma, bound=bound,
        passed=estimate - 4 * sigma > float(bound),
        strict_margin=estimate - 4 * sigma - float(bound),
        exact=exact,
    )


# ============================================================================
# EXACT INEQUALITIES
# ============================================================================


def _strict_check(name: str, left: Fraction, right: Fraction) -> InequalityCheck:
    return InequalityCheck(name=name, left=left, right=right, holds=left < right)


def _skipped(name: str, reason: str) -> InequalityCheck:
    return InequalityCheck(name=name, left=None, right=None, holds=True, skipped=reason)


def check_negative_correlation(n: int, r: int) -> NegativeCorrelationReport:
    """Crossing events of disjoint edges and cherries are negatively correlated in their stated ranges"""
    _check_split(n, r)
    checks = []
    p_edge = p_edge_connects(n, r)
    p_cherry = p_cherry_connects(n, r) if n >= 3 else None

    name = 'edge-edge'
    if 4 * r > n or n < 4:
        checks.append(_skipped(name, f"needs r <= n/4 (r={r}, n={n})"))
    else:
        checks.append(_strict_check(name, p_two_edges_joint(n, r), p_edge * p_edge))

    name = 'edge-cherry'
    if 6 * r > n or n < 5:
        checks.append(_skipped(name, f"needs r <= n/6 (r={r}, n={n})"))
    else:
        checks.append(_strict_check(name, p_edge_cherry_joint(n, r), p_edge * p_cherry))

    name = 'cherry-cherry'
    if n < 11 or 10 * r > n:
        checks.append(_skipped(name, f"needs n >= 11 and r <= n/10 (r={r}, n={n})"))
    else:
        checks.append(_strict_check(name, p_two_cherries_joint(n, r), p_cherry * p_cherry))

    return NegativeCorrelationReport(n=n, r=r, checks=tuple(checks))


def check_crossing_bounds(n: int, r: int) -> list[InequalityCheck]:
    """2r/n - 2(r/n)^2 <= P{edge crosses} <= 2r/n and the cherry analogue with 3"""
    _check_split(n, r)
    ratio = Fraction(r, n)
    out = []
    for name, p, c in (('edge-bounds', p_edge_connects(n, r), 2), ('cherry-bounds', p_cherry_connects(n, r), 3)):
        lower, upper = c * ratio - c * ratio ** 2, c * ratio
        out.append(InequalityCheck(name=name, left=lower, right=upper, holds=lower <= p <= upper))
    return out


def _elementary_symmetric(values: Sequence[Fraction], b: int) -> Fraction:
    e = [Fraction(1)] + [Fraction(0)] * b
    for a in values:
        for k in range(b, 0, -1):
            e[k] += e[k - 1] * a
    return e[b]


def multinomial_check(a: Iterable, b: int) -> MultinomialReport:
    """b! sum_{|B|=b} prod a_i = (sum a)^b - R with 0 <= R <= ((b)_2/2)(sum a^2)(sum a)^(b-2)"""
    if b < 2:
        raise PreconditionError(f"b must be >= 2, got {b}")
    values = [Fraction(v) for v in a]
    if any(v < 0 for v in values):
        raise PreconditionError("entries must be nonnegative")
    s = sum(values, Fraction(0))
    squares = sum((v * v for v in values), Fraction(0))
    left = math.factorial(b) * _elementary_symmetric(values, b)
    power = s ** b
    bound = Fraction(b * (b - 1), 2) * squares * s ** (b - 2)
    return MultinomialReport(left=left, power=power, remainder=power - left, bound=bound)


def random_rational_vector(rng: np.random.Generator, max_len: int = 8, max_den: int = 12) -> list[Fraction]:
    length = int(rng.integers(1, max_len + 1))
    nums = rng.integers(0, 25, size=length)
    dens = rng.integers(1, max_den + 1, size=length)
    return [Fraction(int(p), int(q)) for p, q in zip(nums, dens)]
