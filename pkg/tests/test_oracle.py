"""
Tests for exact enumeration, crossing probabilities and the exact inequalities
"""

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from model import (
    BernoulliYQ,
    BudgetExceededError,
    CliqueSizes,
    ModelSpec,
    PreconditionError,
    SizeAtom,
    YQAtom,
    cherry_template,
    edge_template,
)
from oracle import (
    Outcome,
    basic_lower_bound,
    check_basic_bound,
    check_crossing_bounds,
    check_negative_correlation,
    crossing_cherries,
    crossing_counts_by_enumeration,
    crossing_edges,
    crossing_probability_by_enumeration,
    enumerate_fixed_model,
    enumerate_model,
    multinomial_check,
    p_cherry_connects,
    p_edge_cherry_joint,
    p_edge_connects,
    p_two_cherries_joint,
    p_two_edges_joint,
    random_template_lower_bound,
)
from gen import RngStream, embed_fixed_graph
from theory import exact_T

# ============================================================================
# ENUMERATION
# ============================================================================


def test_enumerate_forced_edge():
    dist = enumerate_fixed_model(2, [edge_template()])
    assert dist.probability(lambda o: o.connected) == 1
    assert dist.outcomes == {Outcome(connected=True, eta1=0, d_prime_1=1, delta=1): Fraction(1)}


def test_enumerate_single_edge_on_three_vertices():
    dist = enumerate_fixed_model(3, [edge_template()])
    assert dist.probability(lambda o: o.connected) == 0
    assert dist.marginal('eta1') == {1: Fraction(1)}
    assert dist.marginal('d_prime_1') == {0: Fraction(1, 3), 1: Fraction(2, 3)}


def test_enumerate_two_edges_on_three_vertices():
    """6 of the 9 ordered placements use two distinct edges"""
    dist = enumerate_fixed_model(3, [edge_template(), edge_template()])
    assert dist.probability(lambda o: o.connected) == Fraction(2, 3)
    assert dist.total() == 1


def test_enumeration_matches_exact_T():
    for n, templates in ((5, [edge_template(), cherry_template()]), (6, [cherry_template()] * 2)):
        dist = enumerate_fixed_model(n, templates)
        assert dist.total() == 1
        assert dist.marginal('d_prime_1')[0] == exact_T([t.vertices for t in templates], n)


def test_enumerate_cliques():
    """Two uniform triangles in K_4 connect it unless they coincide"""
    dist = enumerate_model(ModelSpec(n=4, m=2, kind=CliqueSizes((SizeAtom(3, 1.0),))))
    assert dist.probability(lambda o: o.connected) == Fraction(3, 4)
    single = enumerate_model(ModelSpec(n=4, m=1, kind=CliqueSizes((SizeAtom(3, 1.0),))))
    assert single.marginal('eta1') == {1: Fraction(1)}


def test_enumerate_degenerate_bernoulli():
    spec = ModelSpec(n=3, m=1, kind=BernoulliYQ((YQAtom(3, 1.0, 0.5), YQAtom(3, 0.0, 0.5))))
    dist = enumerate_model(spec)
    assert dist.probability(lambda o: o.connected) == Fraction(1, 2)
    with pytest.raises(PreconditionError):
        enumerate_model(ModelSpec(n=3, m=1, kind=BernoulliYQ((YQAtom(3, 0.5, 1.0),))))


def test_enumeration_budget_and_size_limits():
    with pytest.raises(BudgetExceededError) as exc:
        enumerate_fixed_model(6, [cherry_template()] * 3, budget=100)
    assert exc.value.estimate > 100
    with pytest.raises(PreconditionError):
        enumerate_fixed_model(9, [edge_template()])


def test_marginal_rejects_unknown_field():
    with pytest.raises(PreconditionError):
        enumerate_fixed_model(2, [edge_template()]).marginal('diameter')


# ============================================================================
# CROSSING PROBABILITIES
# ============================================================================


def test_p_edge_connects():
    assert p_edge_connects(10, 2) == Fraction(16, 45)
    assert p_edge_connects(2, 1) == 1
    for n in range(2, 20):
        for r in range(1, n):
            assert p_edge_connects(n, r) == p_edge_connects(n, n - r)
    with pytest.raises(PreconditionError):
        p_edge_connects(5, 5)


def test_p_cherry_connects():
    assert p_cherry_connects(10, 2) == Fraction(8, 15)
    assert p_cherry_connects(3, 1) == 1
    with pytest.raises(PreconditionError):
        p_cherry_connects(2, 1)


def test_formulas_match_placement_enumeration():
    for n in range(3, 13):
        edges = crossing_counts_by_enumeration(edge_template(), n)
        cherries = crossing_counts_by_enumeration(cherry_template(), n)
        for r in range(1, n):
            assert edges[r] == p_edge_connects(n, r)
            assert cherries[r] == p_cherry_connects(n, r)
    assert crossing_probability_by_enumeration(edge_template(), 10, 2) == Fraction(16, 45)


def _cherries(vertices):
    """All cherries as (leaf, centre, leaf) with leaves ordered"""
    return [(a, c, b) for c in vertices for a, b in itertools.combinations(sorted(set(vertices) - {c}), 2)]


def _crosses(structure, r):
    return len({v <= r for v in structure}) == 2


def _brute_joint(first, second, n, r):
    hits = total = 0
    for x in first(range(1, n + 1)):
        for y in second(range(1, n + 1)):
            if set(x) & set(y):
                continue
            total += 1
            hits += _crosses(x, r) and _crosses(y, r)
    return Fraction(hits, total)


def _edges(vertices):
    return list(itertools.combinations(vertices, 2))


@pytest.mark.parametrize("n, r", [(6, 2), (7, 3), (8, 1)])
def test_joint_crossings_match_brute_force(n, r):
    """Class decompositions agree with direct counts over disjoint placements"""
    assert p_two_edges_joint(n, r) == _brute_joint(_edges, _edges, n, r)
    assert p_edge_cherry_joint(n, r) == _brute_joint(_edges, _cherries, n, r)
    assert p_two_cherries_joint(n, r) == _brute_joint(_cherries, _cherries, n, r)


def test_edge_cherry_joint_is_symmetric_in_conditioning():
    """Conditioning on the edge first gives the same joint probability"""
    for n in range(6, 30):
        for r in range(1, n):
            edge_first = p_edge_connects(n, r) * Fraction(
                crossing_cherries(n - 2, r - 1), 3 * (n - 2) * (n - 3) * (n - 4) // 6
            )
            assert p_edge_cherry_joint(n, r) == edge_first


def test_crossing_counts_vanish_outside_the_split():
    """Empty or full sides cut nothing"""
    for n in (3, 8):
        for r in (-1, 0, n, n + 1):
            assert crossing_edges(n, r) == 0
            assert crossing_cherries(n, r) == 0
    assert crossing_cherries(8, 1) == 3 * math.comb(7, 2)


def test_joint_crossings_with_a_single_vertex_side():
    """With [r] = {1}, two disjoint structures cannot both meet vertex 1"""
    assert p_two_cherries_joint(11, 1) == 0
    assert p_edge_cherry_joint(11, 1) == 0
    assert p_two_edges_joint(11, 1) == 0
    assert p_two_cherries_joint(11, 10) == 0


def _monte_carlo_crossing(template, n, r, draws, seed):
    gen = RngStream(seed, 0).generator()
    hits = 0
    for _ in range(draws):
        copy = embed_fixed_graph(template, n, gen)
        hits += any(u <= r < v for u, v in copy.edges)
    return hits


@pytest.mark.parametrize("template, n, r, exact", [
    (edge_template(), 10, 2, p_edge_connects(10, 2)),
    (cherry_template(), 12, 3, p_cherry_connects(12, 3)),
])
def test_crossing_formulas_match_sampled_copies(template, n, r, exact):
    draws = 100_000
    hits = _monte_carlo_crossing(template, n, r, draws, seed=29)
    p = float(exact)
    assert abs(hits - draws * p) < 3 * math.sqrt(draws * p * (1 - p))


# ============================================================================
# LOWER BOUNDS AND INEQUALITIES
# ============================================================================


def test_basic_lower_bound():
    assert basic_lower_bound(100, 5, 4) == Fraction(17, 100)
    with pytest.raises(PreconditionError):
        basic_lower_bound(100, 11, 4)
    with pytest.raises(PreconditionError):
        basic_lower_bound(100, 5, 1)


def test_exact_crossings_dominate_bounds():
    for n in range(10, 61):
        for r in range(1, n // 10 + 1):
            assert p_edge_connects(n, r) >= basic_lower_bound(n, r, 2)
            assert p_cherry_connects(n, r) >= basic_lower_bound(n, r, 3)
            assert p_cherry_connects(n, r) >= random_template_lower_bound(n, r, {3: Fraction(1)})


def _damped_term(n, r, x):
    ratio = Fraction(r, n)
    return ratio * x - ratio * x * min(Fraction(1), Fraction(3, 2) * ratio * x)


def test_random_template_lower_bound_mixture():
    law = {2: Fraction(1, 2), 3: Fraction(1, 2)}
    expected = (_damped_term(40, 2, 2) + _damped_term(40, 2, 3)) / 2
    assert random_template_lower_bound(40, 2, law) == expected


def test_negative_correlation_example():
    report = check_negative_correlation(12, 2)
    edge_edge = report.checks[0]
    assert edge_edge.name == 'edge-edge'
    assert edge_edge.left / p_edge_connects(12, 2) == Fraction(1, 5)
    assert edge_edge.right == Fraction(10, 33) ** 2
    assert report.holds


def test_negative_correlation_r1_is_trivial():
    check = check_negative_correlation(20, 1).checks[0]
    assert check.left == 0
    assert check.holds


def test_negative_correlation_single_vertex_side():
    """r = 1 is admissible for the edge-cherry and cherry-cherry pairs"""
    report = check_negative_correlation(20, 1)
    assert [c.name for c in report.checks] == ['edge-edge', 'edge-cherry', 'cherry-cherry']
    assert not any(c.skipped for c in report.checks)
    assert all(c.left == 0 and c.right > 0 for c in report.checks)
    assert report.holds
    assert not check_negative_correlation(6, 1).checks[1].skipped


def test_negative_correlation_sweep():
    """No violation anywhere in the stated ranges"""
    for n in range(11, 201):
        for r in range(1, n // 4 + 1):
            report = check_negative_correlation(n, r)
            assert report.holds, (n, r, [c for c in report.checks if not c.holds])


def test_negative_correlation_skips_out_of_range():
    report = check_negative_correlation(12, 5)
    assert all(c.skipped for c in report.checks)


def test_crossing_bounds():
    for n in range(20, 80):
        for r in range(2, n // 10 + 1):
            assert all(c.holds for c in check_crossing_bounds(n, r))


def test_check_basic_bound_monte_carlo():
    """Exact 0.2755 sits about 0.05 above the bound 0.225, far beyond 4 sigma at 20000 trials"""
    report = check_basic_bound(cherry_template(), 50, 5, trials=20_000, master_seed=3)
    assert report.bound == Fraction(9, 40)
    assert report.passed
    assert report.strict_margin > 0
    assert report.exact == p_cherry_connects(50, 5)
    assert abs(report.estimate - float(report.exact)) < 5 * report.sigma


def test_check_basic_bound_fails_without_margin():
    """Ten draws leave a 4 sigma allowance far wider than the gap to the bound"""
    report = check_basic_bound(edge_template(), 100, 10, trials=10, master_seed=0)
    assert report.bound == Fraction(4, 25)
    assert report.estimate - 4 * report.sigma < float(report.bound)
    assert not report.passed
    assert report.strict_margin < 0


# ============================================================================
# MULTINOMIAL REMAINDER
# ============================================================================


def test_multinomial_equality_edges():
    ones = multinomial_check([1, 1, 1], 2)
    assert (ones.left, ones.power, ones.remainder, ones.bound) == (6, 9, 3, 3)
    assert ones.holds
    spike = multinomial_check([2, 0, 0], 2)
    assert (spike.left, spike.remainder, spike.bound) == (0, 4, 4)
    assert spike.holds


def test_multinomial_rejects_small_b():
    with pytest.raises(PreconditionError):
        multinomial_check([1, 2], 1)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.fractions(min_value=0, max_value=20, max_denominator=12), min_size=1, max_size=8),
    st.integers(2, 4),
)
def test_multinomial_property(values, b):
    assert multinomial_check(values, b).holds
