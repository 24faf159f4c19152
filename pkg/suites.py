"""
Verification suites run by `main.py verify`

Each suite returns a SuiteResult made of named CheckResults. Monte Carlo
suites take an optional budget that replaces their default trial count.
"""

import logging
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import scipy.stats

from conn import (
    brute_force_vertex_connectivity,
    component_census,
    is_k_vertex_connected,
    min_degree,
    vertex_connectivity,
)
from gen import RngStream, derive_trial_seed, sample_union
from harness import ExperimentConfig, StatisticsRequest, SweepSpec, run_trials, sweep
from model import (
    CliqueSizes,
    FixedGraphs,
    ModelSpec,
    PreconditionError,
    SizeAtom,
    cherry_template,
    edge_template,
)
from oracle import (
    basic_lower_bound,
    check_crossing_bounds,
    check_negative_correlation,
    crossing_counts_by_enumeration,
    enumerate_fixed_model,
    multinomial_check,
    p_cherry_connects,
    p_edge_connects,
    random_template_lower_bound,
    random_rational_vector,
)
from stats import d_prime_sequence
from theory import (
    degree_prob_approx,
    exact_T,
    model_moments,
    predict_connect_prob,
    solve_m_window_midpoint,
)

logger = logging.getLogger("VERIFY")

SUITE_SEED = 20260121

# ============================================================================
# RESULT MODELS
# ============================================================================


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ''


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: list[CheckResult] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def _trials(budget: Optional[int], default: int) -> int:
    if budget is None:
        return default
    if budget < 1:
        raise PreconditionError(f"budget must be >= 1, got {budget}")
    return budget


# ============================================================================
# FORMULA-EXACT
# ============================================================================


def formula_exact_suite(budget: Optional[int] = None, max_n: int = 30) -> list[CheckResult]:
    """Crossing formulas against exhaustive placements, and exact_T against full enumeration"""
    checks = []
    edge, cherry = edge_template(), cherry_template()
    bad = []
    for n in range(2, max_n + 1):
        edges = crossing_counts_by_enumeration(edge, n)
        cherries = crossing_counts_by_enumeration(cherry, n) if n >= 3 else {}
        for r in range(1, n):
            if edges[r] != p_edge_connects(n, r):
                bad.append(f"edge n={n} r={r}")
            if n >= 3 and cherries[r] != p_cherry_connects(n, r):
                bad.append(f"cherry n={n} r={r}")
    checks.append(CheckResult('crossing-formulas', not bad, ', '.join(bad[:5]) or f"n <= {max_n}, all r"))

    for n, templates in _oracle_configs():
        dist = enumerate_fixed_model(n, templates)
        enumerated = dist.marginal('d_prime_1').get(0, Fraction(0))
        predicted = exact_T([t.vertices for t in templates], n)
        checks.append(CheckResult(
            f'exact-T n={n} m={len(templates)}',
            enumerated == predicted,
            f"enumeration {enumerated} vs product {predicted}",
        ))
    return checks


# ============================================================================
# INEQUALITY-EXACT
# ============================================================================


def inequality_exact_suite(budget: Optional[int] = None, max_n_bound: int = 60,
                           max_n_corr: int = 200, multinomial_cases: int = 1000) -> list[CheckResult]:
    checks = []

    bad = []
    for n in range(10, max_n_bound + 1):
        for r in range(1, n // 10 + 1):
            for x, exact in ((2, p_edge_connects(n, r)), (3, p_cherry_connects(n, r))):
                law = {x: Fraction(1)}
                if exact < basic_lower_bound(n, r, x) or exact < random_template_lower_bound(n, r, law):
                    bad.append(f"x={x} n={n} r={r}")
    checks.append(CheckResult('basic-bounds', not bad, ', '.join(bad[:5]) or f"n <= {max_n_bound}"))

    bad, compared = [], 0
    for n in range(4, max_n_corr + 1):
        for r in range(1, n):
            report = check_negative_correlation(n, r)
            compared += sum(1 for c in report.checks if not c.skipped)
            bad.extend(f"{c.name} n={n} r={r}" for c in report.checks if not c.holds)
    checks.append(CheckResult('negative-correlation', not bad, ', '.join(bad[:5]) or f"{compared} comparisons"))

    bad = []
    for n in range(20, max_n_bound + 1):
        for r in range(2, n // 10 + 1):
            bad.extend(f"{c.name} n={n} r={r}" for c in check_crossing_bounds(n, r) if not c.holds)
    checks.append(CheckResult('crossing-bounds', not bad, ', '.join(bad[:5]) or 'all within bounds'))

    rng = RngStream(SUITE_SEED, 0).generator()
    bad = []
    for case in range(_trials(budget, multinomial_cases)):
        values = random_rational_vector(rng)
        b = int(rng.integers(2, 5))
        if not multinomial_check(values, b).holds:
            bad.append(f"case {case}: b={b} a={[str(v) for v in values]}")
    checks.append(CheckResult('multinomial', not bad, ', '.join(bad[:3]) or 'no violations'))
    return checks


# ============================================================================
# ORACLE-EQUIVALENCE
# ============================================================================


def _oracle_configs():
    edge, cherry = edge_template(), cherry_template()
    return [
        (3, (edge, edge)),
        (5, (edge, cherry)),
        (6, (cherry, cherry, edge)),
        (8, (cherry, edge, edge)),
    ]


def _family_z(cells: int) -> float:
    """z whose two-sided family-wise level over `cells` cells matches a single 3 sigma test"""
    per_cell = scipy.stats.norm.sf(3.0) * 2 / max(cells, 1)
    return float(scipy.stats.norm.isf(per_cell / 2))


def oracle_equivalence_suite(budget: Optional[int] = None) -> list[CheckResult]:
    trials = _trials(budget, 100_000)
    checks = []
    for n, templates in _oracle_configs():
        dist = enumerate_fixed_model(n, templates)
        spec = ModelSpec(n=n, m=len(templates), kind=FixedGraphs(templates))
        observed = Counter()
        for t in range(trials):
            g = sample_union(spec, derive_trial_seed(SUITE_SEED, t))
            census = component_census(g)
            observed[(census.component_count == 1, census.eta(1), d_prime_sequence(g)[0], min_degree(g))] += 1

        z = _family_z(len(dist.outcomes))
        worst = 0.0
        unexpected = [key for key in observed if key not in {
            (o.connected, o.eta1, o.d_prime_1, o.delta) for o in dist.outcomes
        }]
        for outcome, p in dist.outcomes.items():
            key = (outcome.connected, outcome.eta1, outcome.d_prime_1, outcome.delta)
            p = float(p)
            sigma = math.sqrt(p * (1 - p) / trials)
            deviation = abs(observed[key] / trials - p)
            worst = max(worst, deviation / sigma if sigma > 0 else (math.inf if deviation > 0 else 0.0))
        checks.append(CheckResult(
            f'joint n={n} m={len(templates)}',
            worst <= z and not unexpected,
            f"max deviation {worst:.2f} sigma (allowed {z:.2f}), {len(unexpected)} impossible outcomes",
        ))
    return checks


# ============================================================================
# CONNECTIVITY-ORACLE
# ============================================================================


def _random_small_spec(rng: np.random.Generator, max_n: int) -> ModelSpec:
    n = int(rng.integers(2, max_n + 1))
    if rng.random() < 0.5:
        m = int(rng.integers(1, 3 * n + 1))
        return ModelSpec(n=n, m=m, kind=FixedGraphs((edge_template(),)))
    size = int(rng.integers(2, min(n, 5) + 1))
    m = int(rng.integers(1, n + 1))
    return ModelSpec(n=n, m=m, kind=CliqueSizes((SizeAtom(size, 1.0),)))


def connectivity_oracle_suite(budget: Optional[int] = None, max_n: int = 12) -> list[CheckResult]:
    samples = _trials(budget, 1000)
    rng = RngStream(SUITE_SEED, 1).generator()
    mismatch, whitney, monotone = [], [], []
    for i in range(samples):
        spec = _random_small_spec(rng, max_n)
        g = sample_union(spec, derive_trial_seed(SUITE_SEED, i))
        flow = vertex_connectivity(g)
        brute = brute_force_vertex_connectivity(g)
        if flow != brute:
            mismatch.append(f"sample {i}: flow {flow} brute {brute}")
        if flow > min_degree(g):
            whitney.append(f"sample {i}")
        # connected at every k up to kappa and at none beyond
        flags = [is_k_vertex_connected(g, k) for k in range(1, flow + 2)]
        if flags != [True] * flow + [False]:
            monotone.append(f"sample {i}: {flags}")
    return [
        CheckResult('flow-vs-brute-force', not mismatch, '; '.join(mismatch[:3]) or f"{samples} graphs"),
        CheckResult('whitney', not whitney, ', '.join(whitney[:3])),
        CheckResult('k-monotone', not monotone, '; '.join(monotone[:3])),
    ]


# ============================================================================
# POISSON (critical window)
# ============================================================================


def _poisson_tv(counts: list[int], mean: float, top: int = 6) -> float:
    total = len(counts)
    freq = Counter(counts)
    tv = 0.0
    for k in range(top + 1):
        tv += abs(freq.get(k, 0) / total - scipy.stats.poisson.pmf(k, mean))
    tail = sum(v for k, v in freq.items() if k > top) / total
    tv += abs(tail - scipy.stats.poisson.sf(top, mean))
    return tv / 2


def poisson_suite(budget: Optional[int] = None, n: int = 2000,
                  lambdas: tuple[float, ...] = (-4.0, -2.0, 0.0, 2.0, 4.0)) -> list[CheckResult]:
    """P{connected} against exp(-exp(lambda0)), and isolated vertices against Poisson(1) at lambda0 = 0"""
    trials = _trials(budget, 2000)
    config = ExperimentConfig(
        spec=ModelSpec(n=n, m=0, kind=FixedGraphs((edge_template(),))),
        trials=trials,
        master_seed=SUITE_SEED,
        statistics=StatisticsRequest(connected=True, delta=False),
        sweep=SweepSpec('lambda0', lambdas),
    )
    result = sweep(config)
    checks = []
    for point in result.points:
        row = point.result.aggregate('connected')
        target = predict_connect_prob(point.value)
        sigma = math.sqrt(target * (1 - target) / trials)
        allowed = 0.05 + 3 * sigma
        checks.append(CheckResult(
            f'connect lambda0={point.value}',
            abs(row.estimate - target) <= allowed,
            f"estimate {row.estimate:.4f} vs {target:.4f} (allowed {allowed:.4f}, m={point.m})",
        ))
        if point.value == 0.0:
            tv = _poisson_tv([r.eta1 for r in point.result.records], math.exp(point.lambda0))
            checks.append(CheckResult('isolated-poisson', tv <= 0.05, f"total variation {tv:.4f}"))
    return checks


# ============================================================================
# DEGREE-APPROX
# ============================================================================


def degree_approx_suite(budget: Optional[int] = None, n: int = 500) -> list[CheckResult]:
    trials = _trials(budget, 500)
    m = math.ceil(n * math.log(n))
    spec = ModelSpec(n=n, m=m, kind=FixedGraphs((edge_template(),)))
    kappa = float(model_moments(spec).kappa)
    config = ExperimentConfig(spec=spec, trials=trials, master_seed=SUITE_SEED,
                              statistics=StatisticsRequest(connected=False, delta=False))
    result = run_trials(config)
    pooled = Counter()
    for record in result.records:
        pooled.update(record.nk_summary)
    draws = n * trials
    checks = []
    for k in range(5):
        approx = degree_prob_approx(n, m, kappa, k)
        empirical = pooled.get(k, 0) / draws
        allowed = max(0.15 * approx, 3 * math.sqrt(approx * (1 - approx) / draws))
        checks.append(CheckResult(
            f'degree k={k}',
            abs(empirical - approx) <= allowed,
            f"empirical {empirical:.3e} vs {approx:.3e} (allowed {allowed:.3e})",
        ))
    return checks


# ============================================================================
# STEP-SIZE-A
# ============================================================================


def step_size_suite(budget: Optional[int] = None, n: int = 500) -> list[CheckResult]:
    """Triangles (a = 2) in the middle of the first window: delta and connectivity jump by 2"""
    trials = _trials(budget, 300)
    spec = ModelSpec(n=n, m=1, kind=CliqueSizes((SizeAtom(3, 1.0),)))
    moments = model_moments(spec)
    m = round(solve_m_window_midpoint(n, float(moments.kappa), 0))
    config = ExperimentConfig(
        spec=ModelSpec(n=n, m=m, kind=spec.kind), trials=trials, master_seed=SUITE_SEED,
        statistics=StatisticsRequest(connected=True, kconn=(2, 3), delta=True, n_counters=moments.a),
    )
    result = run_trials(config)
    records = result.records
    p_delta = sum(r.delta == 2 for r in records) / trials
    p_two = result.aggregate('kconn(2)').estimate
    p_three = result.aggregate('kconn(3)').estimate
    broken = [r.trial_index for r in records if r.invariant_violations]
    return [
        CheckResult('delta==2', p_delta >= 0.8, f"{p_delta:.3f} (m={m})"),
        CheckResult('2-connected', p_two >= 0.8, f"{p_two:.3f}"),
        CheckResult('not-3-connected', p_three <= 0.5, f"{p_three:.3f}"),
        CheckResult('blossoms', not broken, f"violations in trials {broken[:5]}" if broken else 'all trials'),
    ]


# ============================================================================
# REGISTRY
# ============================================================================

SUITES: dict[str, Callable[[Optional[int]], list[CheckResult]]] = {
    'oracle-equivalence': oracle_equivalence_suite,
    'formula-exact': formula_exact_suite,
    'inequality-exact': inequality_exact_suite,
    'connectivity-oracle': connectivity_oracle_suite,
    'poisson': poisson_suite,
    'degree-approx': degree_approx_suite,
    'step-size-a': step_size_suite,
}


def verify(suite_name: str, budget: Optional[int] = None) -> SuiteResult:
    if suite_name not in SUITES:
        raise PreconditionError(f"unknown suite {suite_name!r}; expected one of {sorted(SUITES)}")
    started = time.perf_counter()
    logger.info("running suite %s", suite_name)
    checks = SUITES[suite_name](budget)
    result = SuiteResult(
        name=suite_name,
        passed=all(c.passed for c in checks),
        checks=checks,
        elapsed_seconds=round(time.perf_counter() - started, 3),
    )
    for failure in result.failures():
        logger.warning("%s: %s failed (%s)", suite_name, failure.name, failure.detail)
    return result
