"""
Tests for community samplers, random streams and the union sampler
"""

import itertools
import math

import numpy as np
import pytest
import scipy.stats

from gen import (
    RngStream,
    _bernoulli_pairs,
    _pair_from_index,
    derive_trial_seed,
    embed_fixed_graph,
    sample_bernoulli_community,
    sample_clique_community,
    sample_subset,
    sample_union,
)
from model import (
    BernoulliYQ,
    CliqueSizes,
    FixedGraphs,
    InvalidSpecError,
    ModelSpec,
    PreconditionError,
    SizeAtom,
    YQAtom,
    GraphTemplate,
    cherry_template,
    clique_template,
    cycle_template,
    edge_template,
)


def test_streams_are_reproducible():
    """The same (seed, index) always yields the same draws"""
    a = RngStream(7, 3).generator().random(5)
    b = RngStream(7, 3).generator().random(5)
    c = RngStream(7, 4).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_derive_trial_seed():
    assert derive_trial_seed(1, 0) == derive_trial_seed(1, 0)
    assert derive_trial_seed(1, 0) != derive_trial_seed(1, 1)
    assert 0 <= derive_trial_seed(1, 5) < 2 ** 64
    with pytest.raises(PreconditionError):
        derive_trial_seed(-1, 0)


def test_sample_subset():
    subset = sample_subset(20, 7, RngStream(1, 0))
    assert len(subset) == 7
    assert list(subset) == sorted(set(subset))
    assert all(1 <= v <= 20 for v in subset)
    assert sample_subset(5, 0, RngStream(1, 0)) == ()
    assert sample_subset(5, 5, RngStream(1, 0)) == (1, 2, 3, 4, 5)
    with pytest.raises(PreconditionError):
        sample_subset(3, 4, RngStream(1, 0))


def test_sample_subset_is_uniform():
    """Every 2-subset of [4] shows up with frequency near 1/6"""
    gen = RngStream(11, 0).generator()
    counts = {}
    draws = 6000
    for _ in range(draws):
        s = sample_subset(4, 2, gen)
        counts[s] = counts.get(s, 0) + 1
    assert len(counts) == 6
    sigma = math.sqrt(draws * (1 / 6) * (5 / 6))
    for value in counts.values():
        assert abs(value - draws / 6) < 5 * sigma


def test_embed_fixed_graph():
    copy = embed_fixed_graph(cherry_template(), 10, RngStream(3, 0))
    assert len(copy.members) == 3
    assert len(copy.edges) == 2
    assert sorted(copy.degrees().values()) == [1, 1, 2]
    with pytest.raises(PreconditionError):
        embed_fixed_graph(clique_template(5), 4, RngStream(3, 0))


def test_pair_from_index_matches_row_major_order():
    k = 7
    i, j = _pair_from_index(k, np.arange(k * (k - 1) // 2))
    assert list(zip(i.tolist(), j.tolist())) == list(itertools.combinations(range(k), 2))


def test_bernoulli_pairs_extremes():
    gen = RngStream(1, 0).generator()
    assert len(_bernoulli_pairs(10, 0.0, gen)) == 0
    assert len(_bernoulli_pairs(10, 1.0, gen)) == 45
    assert len(_bernoulli_pairs(1, 0.5, gen)) == 0


@pytest.mark.parametrize("q", [0.02, 0.3])
def test_bernoulli_pairs_density(q):
    """Both the geometric-skip and the dense path keep about q of the pairs"""
    gen = RngStream(5, 0).generator()
    total = 200 * 199 // 2
    kept = _bernoulli_pairs(200, q, gen)
    assert len(np.unique(kept)) == len(kept)
    assert kept.min() >= 0 and kept.max() < total
    sigma = math.sqrt(total * q * (1 - q))
    assert abs(len(kept) - total * q) < 5 * sigma


def test_bernoulli_community_truncates_at_n():
    c = sample_bernoulli_community((YQAtom(50, 1.0, 1.0),), 6, RngStream(2, 0))
    assert c.members == (1, 2, 3, 4, 5, 6)
    assert len(c.edges) == 15


def test_bernoulli_community_empty_edges():
    c = sample_bernoulli_community((YQAtom(5, 0.0, 1.0),), 10, RngStream(2, 0))
    assert len(c.members) == 5
    assert c.edges == ()
    assert c.non_isolated() == ()


def test_clique_community():
    c = sample_clique_community((SizeAtom(4, 1.0),), 10, RngStream(9, 1))
    assert len(c.members) == 4
    assert len(c.edges) == 6


def test_sample_union_is_deterministic():
    spec = ModelSpec(n=30, m=20, kind=CliqueSizes((SizeAtom(3, 0.5), SizeAtom(4, 0.5))))
    assert sample_union(spec, 42).adjacency == sample_union(spec, 42).adjacency
    assert sample_union(spec, 42).adjacency != sample_union(spec, 43).adjacency


def test_sample_union_coupling():
    """Fewer communities under the same seed give a subgraph of the larger union"""
    kind = BernoulliYQ((YQAtom(5, 0.6, 1.0),))
    small = sample_union(ModelSpec(n=40, m=10, kind=kind), 8)
    large = sample_union(ModelSpec(n=40, m=25, kind=kind), 8)
    assert set(small.edges()) <= set(large.edges())
    assert large.communities[:10] == small.communities


def test_sample_union_rejects_invalid_spec():
    with pytest.raises(InvalidSpecError):
        sample_union(ModelSpec(n=2, m=1, kind=FixedGraphs((cherry_template(),))), 1)


def test_fixed_graph_union_edge_count():
    g = sample_union(ModelSpec(n=50, m=1, kind=FixedGraphs((edge_template(),))), 3)
    assert g.edge_count() == 1


def test_embed_edge_is_uniform_over_k4():
    """Each of the 6 edges of K_4 carries the single copy of K_2 with frequency 1/6"""
    gen = RngStream(21, 0).generator()
    draws = 60_000
    counts = {}
    for _ in range(draws):
        edge = embed_fixed_graph(edge_template(), 4, gen).edges[0]
        counts[edge] = counts.get(edge, 0) + 1
    assert sorted(counts) == list(itertools.combinations(range(1, 5), 2))
    sigma = math.sqrt(draws * (1 / 6) * (5 / 6))
    # six cells at once, so the band is widened past 3 sigma
    for value in counts.values():
        assert abs(value - draws / 6) < 4 * sigma


@pytest.mark.parametrize("template", [
    edge_template(),
    cherry_template(),
    clique_template(4),
    cycle_template(5),
    GraphTemplate.create(4, [(1, 2), (2, 3), (2, 4)]),
])
def test_embed_preserves_degree_sequence(template):
    gen = RngStream(4, 0).generator()
    for _ in range(200):
        copy = embed_fixed_graph(template, 9, gen)
        assert len(copy.members) == template.vertices
        assert len(copy.edges) == len(template.edges)
        assert sorted(copy.degrees().values()) == sorted(template.degrees())


def test_bernoulli_pair_has_one_edge_half_the_time():
    gen = RngStream(13, 0).generator()
    draws = 100_000
    with_edge = sum(len(sample_bernoulli_community((YQAtom(2, 0.5, 1.0),), 10, gen).edges) for _ in range(draws))
    sigma = math.sqrt(draws * 0.25)
    assert abs(with_edge - draws / 2) < 3 * sigma


def test_clique_size_law_with_empty_atom():
    """Size law {0: 1/2, 3: 1/2} leaves half the communities empty"""
    gen = RngStream(17, 0).generator()
    draws = 10_000
    law = (SizeAtom(0, 0.5), SizeAtom(3, 0.5))
    sizes = [len(sample_clique_community(law, 6, gen).members) for _ in range(draws)]
    assert set(sizes) == {0, 3}
    empty = sizes.count(0)
    assert abs(empty - draws / 2) < 3 * math.sqrt(draws * 0.25)


def test_vertex_inclusion_is_exchangeable():
    """Per-vertex inclusion counts are uniform over [n] (chi-square)"""
    gen = RngStream(19, 0).generator()
    n, draws = 6, 100_000
    counts = np.zeros(n, dtype=np.int64)
    for _ in range(draws):
        for v in sample_clique_community((SizeAtom(2, 1.0),), n, gen).members:
            counts[v - 1] += 1
    expected = np.full(n, draws * 2 / n)
    # each vertex is included with probability 1/3
    assert abs(counts - expected).max() < 4 * math.sqrt(draws * (1 / 3) * (2 / 3))
    assert scipy.stats.chisquare(counts, expected).pvalue > 0.001
