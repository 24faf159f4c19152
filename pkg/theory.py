"""
Closed-form quantities for union graphs: model moments, lambda(k), the
connectivity and degree predictors, exact T/H products and exact finite-n
degree laws
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln
from scipy.stats import binom

from model import (
    BernoulliYQ,
    CliqueSizes,
    FixedGraphs,
    ModelConsistencyError,
    ModelSpec,
    PreconditionError,
    YQAtom,
    require_valid,
)

logger = logging.getLogger("THEORY")

Number = Union[int, float, Fraction]

# ============================================================================
# DATA MODELS
# ============================================================================


@dataclass(frozen=True)
class ModelMoments:
    alpha: float
    kappa: Number
    kappa_t: dict[int, Number]
    kappa_a: Number
    a: Optional[int]
    per_community_x: tuple[Number, ...]
    per_community_z: tuple[Number, ...]
    # E X_i(a) per community, for the exact blossom-degree law
    per_community_xa: tuple[Number, ...] = field(default=())


@dataclass(frozen=True)
class WindowReport:
    k: int
    lower: float
    middle: float
    upper: float
    gap_lower: float
    gap_upper: float
    lambda_k: float
    lambda_k1: float
    inside: bool
    degenerate: bool
    predicted_min_degree: Optional[int]


@dataclass(frozen=True)
class _CommunityMoments:
    p_nonempty: float
    x: Number
    z: Number
    x_t: dict[int, Number]


# ============================================================================
# PER-COMMUNITY MOMENTS
# ============================================================================


def nonisolated_fraction(k: int, q: float) -> float:
    """h(k, q) = 1 - (1-q)^(k-1): chance a fixed vertex of G(k, q) has a neighbour"""
    if k <= 1:
        return 0.0
    return 1.0 - (1.0 - q) ** (k - 1)


def _clique_moments(size: int) -> _CommunityMoments:
    if size < 2:
        return _CommunityMoments(0, 0, 0, {})
    return _CommunityMoments(1, size, size * (size - 1), {size - 1: size})


def _bernoulli_moments(k: int, q: float) -> _CommunityMoments:
    if k < 2 or q <= 0.0:
        return _CommunityMoments(0.0, 0, 0, {})
    if q >= 1.0:
        return _clique_moments(k)
    miss = 1.0 - q
    p_nonempty = -math.expm1(k * (k - 1) / 2 * math.log1p(-q))
    x = k * nonisolated_fraction(k, q)
    both = 1.0 - 2.0 * miss ** (k - 1) + miss ** (2 * k - 3)
    z = k * (k - 1) * both
    # degree of a fixed vertex inside G(k, q) is Binomial(k-1, q), computed in log space
    t = np.arange(1, k)
    pmf = np.exp(binom.logpmf(t, k - 1, q))
    x_t = {int(ti): k * float(p) for ti, p in zip(t, pmf) if p > 0.0}
    return _CommunityMoments(p_nonempty, x, z, x_t)


def _template_moments(spec: ModelSpec, index: int) -> _CommunityMoments:
    template = spec.template_for(index)
    counts = {}
    for d in template.degrees():
        counts[d] = counts.get(d, 0) + 1
    x = template.vertices
    return _CommunityMoments(1, x, x * (x - 1), dict(sorted(counts.items())))


def _mix(parts: Sequence[tuple[Number, _CommunityMoments]]) -> _CommunityMoments:
    p = sum(w * c.p_nonempty for w, c in parts)
    x = sum(w * c.x for w, c in parts)
    z = sum(w * c.z for w, c in parts)
    x_t = {}
    for w, c in parts:
        for t, value in c.x_t.items():
            x_t[t] = x_t.get(t, 0) + w * value
    return _CommunityMoments(float(p), x, z, dict(sorted(x_t.items())))


def _iid_law(spec: ModelSpec) -> Optional[_CommunityMoments]:
    match spec.kind:
        case CliqueSizes(support=support):
            return _mix([(a.w, _clique_moments(min(a.size, spec.n))) for a in support if a.w > 0])
        case BernoulliYQ(support=support):
            return _mix([(a.w, _bernoulli_moments(min(a.y, spec.n), a.q)) for a in support if a.w > 0])
    return None


def _simplify(value: Number) -> Number:
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    return value


# ============================================================================
# MODEL MOMENTS
# ============================================================================


def model_moments(spec: ModelSpec) -> ModelMoments:
    """alpha, kappa, kappa(t), a and the per-community x_i = E X_i, z_i = E (X_i)_2"""
    require_valid(spec)

    if isinstance(spec.kind, FixedGraphs):
        count = spec.m if spec.m > 0 else len(spec.kind.templates)
        per = [_template_moments(spec, i) for i in range(count)]
        weight = Fraction(1, count)
        mixture = _mix([(weight, c) for c in per])
        mixture = _CommunityMoments(
            mixture.p_nonempty,
            _simplify(mixture.x),
            _simplify(mixture.z),
            {t: _simplify(v) for t, v in mixture.x_t.items()},
        )
        if spec.m == 0:
            per = []
    else:
        mixture = _iid_law(spec)
        per = [mixture] * spec.m

    kappa_t = {t: v for t, v in mixture.x_t.items() if v > 0}
    a = min(kappa_t, default=None)
    kappa_a = kappa_t.get(a, 0) if a is not None else 0
    alpha = mixture.p_nonempty
    kappa = mixture.x

    if float(kappa) + 1e-12 < 2.0 * alpha:
        raise ModelConsistencyError(f"kappa={float(kappa)} is below 2*alpha={2 * alpha}")
    if not math.isclose(float(kappa), math.fsum(float(v) for v in kappa_t.values()), rel_tol=1e-9, abs_tol=1e-12):
        raise ModelConsistencyError("kappa differs from the sum of kappa(t)")

    moments = ModelMoments(
        alpha=alpha,
        kappa=kappa,
        kappa_t=kappa_t,
        kappa_a=kappa_a,
        a=a,
        per_community_x=tuple(c.x for c in per),
        per_community_z=tuple(c.z for c in per),
        per_community_xa=tuple(c.x_t.get(a, 0) for c in per) if a is not None else tuple(0 for _ in per),
    )
    logger.debug("moments: kappa=%s alpha=%s a=%s", float(kappa), alpha, a)
    return moments


def bernoulli_kappa_prime(law: Sequence[YQAtom]) -> float:
    """kappa' = E[Y h(Y, Q)] with no truncation at n"""
    return math.fsum(a.w * a.y * nonisolated_fraction(a.y, a.q) for a in law)


def x_pmf(spec: ModelSpec) -> dict[int, Number]:
    """Exact law of X for a uniformly chosen community (edge densities must be 0 or 1)"""
    require_valid(spec)
    law = {}
    match spec.kind:
        case FixedGraphs(templates=templates):
            count = spec.m if spec.m > 0 else len(templates)
            for i in range(count):
                x = spec.template_for(i).vertices
                law[x] = law.get(x, 0) + Fraction(1, count)
        case CliqueSizes(support=support):
            for atom in support:
                size = min(atom.size, spec.n)
                x = size if size >= 2 else 0
                law[x] = law.get(x, 0) + atom.w
        case BernoulliYQ(support=support):
            for atom in support:
                if 0.0 < atom.q < 1.0:
                    raise PreconditionError("the law of X is only tabulated for edge densities 0 or 1")
                size = min(atom.y, spec.n)
                x = size if size >= 2 and atom.q == 1.0 else 0
                law[x] = law.get(x, 0) + atom.w
    return dict(sorted(law.items()))


def moment_condition(spec: ModelSpec, k: int, a: int) -> tuple[float, bool]:
    """E X^((k+1)a+1); returns (value, exact). Nondegenerate densities fall back to the bound X <= min(Y, n)"""
    power = (k + 1) * a + 1
    try:
        return math.fsum(float(w) * x ** power for x, w in x_pmf(spec).items()), True
    except PreconditionError:
        bound = math.fsum(atom.w * min(atom.y, spec.n) ** power for atom in spec.kind.support)
        return bound, False


# ============================================================================
# THRESHOLD FUNCTIONALS AND PREDICTORS
# ============================================================================


def lambda_k(n: int, m: int, kappa: float, k: int) -> float:
    """lambda(k) = ln n + k ln(m/n) - (m/n) kappa"""
    if n < 2 or m < 1:
        raise PreconditionError(f"lambda needs n >= 2 and m >= 1, got n={n}, m={m}")
    if kappa <= 0:
        raise PreconditionError(f"lambda needs kappa > 0, got {kappa}")
    if k < 0:
        raise PreconditionError(f"k must be >= 0, got {k}")
    ratio = m / n
    return math.log(n) + k * math.log(ratio) - ratio * float(kappa)


def lambda_prime(n: int, m: int, kappa_prime: float) -> float:
    """ln n - (m/n) kappa', the n-free threshold functional of Bernoulli communities"""
    return lambda_k(n, m, kappa_prime, 0)


def predict_connect_prob(lambda0: float) -> float:
    """Limit of P{connected} when lambda(0) -> c: exp(-exp(c))"""
    if lambda0 > 700:
        return 0.0
    return math.exp(-math.exp(lambda0))


def _log_poisson_term(k: int, rate: float) -> float:
    return k * math.log(rate) - float(gammaln(k + 1)) - rate if rate > 0 else (0.0 if k == 0 else -math.inf)


def degree_prob_approx(n: int, m: int, kappa: float, k: int) -> float:
    """(kappa^k / k!) (m/n)^k exp(-kappa m/n); only asymptotically equal to P{d'(1) = k}"""
    if k < 0 or kappa <= 0:
        raise PreconditionError("degree approximation needs k >= 0 and kappa > 0")
    ratio = m / n
    return math.exp(_log_poisson_term(k, float(kappa) * ratio))


def blossom_degree_prob_approx(n: int, m: int, kappa: float, kappa_a: float, k: int) -> float:
    """(kappa_a^k / k!) (m/n)^k exp(-kappa m/n), the approximation to P{d'_*(1) = d'(1) = k}"""
    if k < 0 or kappa <= 0 or kappa_a < 0:
        raise PreconditionError("blossom degree approximation needs k >= 0, kappa > 0, kappa_a >= 0")
    ratio = m / n
    if kappa_a == 0:
        return math.exp(-float(kappa) * ratio) if k == 0 else 0.0
    log_value = (
        k * math.log(float(kappa_a) * ratio) - float(gammaln(k + 1)) - float(kappa) * ratio
    )
    return math.exp(log_value)


def pair_blossom_prob_approx(n: int, m: int, kappa: float, kappa_a: float, k: int) -> float:
    """Two-vertex version: P{d'_*(v)=d'(v)=k for v = 1, 2} ~ (blossom approximation)^2"""
    return blossom_degree_prob_approx(n, m, kappa, kappa_a, k) ** 2


def expected_Nk(n: int, m: int, kappa: float, k: int) -> float:
    return n * degree_prob_approx(n, m, kappa, k)


def expected_N_star_k(n: int, m: int, kappa: float, kappa_a: float, k: int) -> float:
    return n * blossom_degree_prob_approx(n, m, kappa, kappa_a, k)


def expected_eta1_factorial_moment(n: int, m: int, kappa: float, r: int) -> float:
    """Approximation exp(r lambda(0)) to E (eta_1)_r"""
    return math.exp(r * lambda_k(n, m, kappa, 0))


def expected_distinct_edges(n: int, m: int) -> float:
    """Exact E|union edge set| for m uniform single-edge communities on K_n"""
    pairs = n * (n - 1) // 2
    if pairs == 0:
        return 0.0
    if pairs == 1:
        return 1.0 if m >= 1 else 0.0
    return -pairs * math.expm1(m * math.log1p(-1.0 / pairs))


def window_report(n: int, m: int, moments: ModelMoments, k: int) -> WindowReport:
    """Where kappa m/n sits relative to ln n + k ln(m/n) and ln n + (k+1) ln(m/n)"""
    if k < 0:
        raise PreconditionError(f"k must be >= 0, got {k}")
    ratio = m / n
    lower = math.log(n) + k * math.log(ratio)
    upper = math.log(n) + (k + 1) * math.log(ratio)
    middle = float(moments.kappa) * ratio
    gap_lower = middle - lower
    gap_upper = upper - middle
    inside = gap_lower > 0 and gap_upper > 0
    return WindowReport(
        k=k,
        lower=lower,
        middle=middle,
        upper=upper,
        gap_lower=gap_lower,
        gap_upper=gap_upper,
        lambda_k=-gap_lower,
        lambda_k1=gap_upper,
        inside=inside,
        degenerate=(m == n),
        predicted_min_degree=(k + 1) * moments.a if inside and moments.a is not None else None,
    )


# ============================================================================
# BACK-SOLVING m
# ============================================================================


def solve_m_for_lambda(n: int, kappa: float, lam: float, k: int = 0) -> float:
    """Real m with lambda(k) = lam, on the branch where lambda decreases in m"""
    kappa = float(kappa)
    if kappa <= 0:
        raise PreconditionError("kappa must be positive")
    if k == 0:
        return n * (math.log(n) - lam) / kappa

    def gap(ratio: float) -> float:
        return math.log(n) + k * math.log(ratio) - kappa * ratio - lam

    low = k / kappa
    if gap(low) < 0:
        raise PreconditionError(f"lambda({k}) never reaches {lam} for n={n}, kappa={kappa}")
    high = 2 * low + 1
    while gap(high) > 0:
        high *= 2
    return n * brentq(gap, low, high, xtol=1e-12)


def solve_m_window_midpoint(n: int, kappa: float, k: int = 0) -> float:
    """Real m with kappa m/n = ln n + (k + 1/2) ln(m/n), the middle of the k-th window"""
    kappa = float(kappa)

    def gap(ratio: float) -> float:
        return kappa * ratio - math.log(n) - (k + 0.5) * math.log(ratio)

    low = max(1.0, (k + 0.5) / kappa)
    if gap(low) >= 0:
        raise PreconditionError(f"no window midpoint with m >= n for n={n}, kappa={kappa}")
    high = 2 * low
    while gap(high) < 0:
        high *= 2
    return n * brentq(gap, low, high, xtol=1e-12)


# ============================================================================
# EXACT FINITE-n QUANTITIES
# ============================================================================


def _is_exact(values: Sequence[Number]) -> bool:
    return all(isinstance(v, Rational) for v in values)


def _product(factors: list[Number], exact: bool) -> Number:
    for f in factors:
        if f < 0:
            raise ModelConsistencyError(f"negative factor {f} in exact product")
    if exact:
        return math.prod(factors, start=Fraction(1))
    if any(f == 0 for f in factors):
        return 0.0
    return math.exp(math.fsum(math.log(float(f)) for f in factors))


def exact_T(per_community_x: Sequence[Number], n: int) -> Number:
    """T = prod(1 - x_i/n) = P{d'(1) = 0}"""
    exact = _is_exact(per_community_x)
    factors = [(1 - Fraction(x) / n) if exact else 1.0 - float(x) / n for x in per_community_x]
    return _product(factors, exact)


def exact_H(per_community_x: Sequence[Number], per_community_z: Sequence[Number], n: int) -> Number:
    """H = prod(1 - 2x_i/n + z_i/(n)_2) = P{d'(1) = d'(2) = 0}"""
    if n < 2:
        raise PreconditionError("H needs n >= 2")
    if len(per_community_x) != len(per_community_z):
        raise PreconditionError("x and z lists differ in length")
    falling = n * (n - 1)
    exact = _is_exact(per_community_x) and _is_exact(per_community_z)
    if exact:
        factors = [1 - Fraction(2 * x, 1) / n + Fraction(z) / falling for x, z in zip(per_community_x, per_community_z)]
    else:
        factors = [1.0 - 2.0 * float(x) / n + float(z) / falling for x, z in zip(per_community_x, per_community_z)]
    return _product(factors, exact)


def _membership_dp(stay: Sequence[Number], step: Sequence[Number], k_max: int, exact: bool) -> list[Number]:
    """Distribution of the number of communities that 'step', each independently"""
    zero = Fraction(0) if exact else 0.0
    dist = [Fraction(1) if exact else 1.0] + [zero] * k_max
    for s, p in zip(stay, step):
        nxt = [zero] * (k_max + 1)
        for k, mass in enumerate(dist):
            if mass == 0:
                continue
            nxt[k] += mass * s
            if k < k_max:
                nxt[k + 1] += mass * p
        dist = nxt
    return dist


def exact_degree_pmf(per_community_x: Sequence[Number], n: int, k_max: int) -> list[Number]:
    """Exact P{d'(1) = k}, k = 0..k_max; vertex 1 is non-isolated in community i w.p. x_i/n"""
    exact = _is_exact(per_community_x)
    p = [Fraction(x) / n if exact else float(x) / n for x in per_community_x]
    return _membership_dp([1 - pi for pi in p], p, k_max, exact)


def exact_blossom_degree_pmf(per_community_x: Sequence[Number], per_community_xa: Sequence[Number],
                             n: int, k_max: int) -> list[Number]:
    """Exact P{d'_*(1) = d'(1) = k}: every membership of vertex 1 has degree exactly a"""
    exact = _is_exact(per_community_x) and _is_exact(per_community_xa)
    if exact:
        stay = [1 - Fraction(x) / n for x in per_community_x]
        step = [Fraction(xa) / n for xa in per_community_xa]
    else:
        stay = [1.0 - float(x) / n for x in per_community_x]
        step = [float(xa) / n for xa in per_community_xa]
    return _membership_dp(stay, step, k_max, exact)
