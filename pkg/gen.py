"""
Samplers for community subgraphs and their union
Every community draws from its own stream, keyed by (seed, community index)
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from model import (
    BernoulliYQ,
    CliqueSizes,
    CommunityInstance,
    FixedGraphs,
    GraphTemplate,
    InvalidSpecError,
    ModelSpec,
    PreconditionError,
    SizeAtom,
    UnionGraph,
    YQAtom,
    build_union,
    validate_spec,
)

logger = logging.getLogger("GEN")

# Below this edge density Bernoulli communities skip geometrically between edges
DENSE_EDGE_THRESHOLD = 0.1

# ============================================================================
# RANDOM STREAMS
# ============================================================================


@dataclass(frozen=True)
class RngStream:
    """Deterministic stream identified by (master_seed, stream_index)"""
    master_seed: int
    stream_index: int

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))


RngLike = Union[RngStream, np.random.Generator]


def _as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """64-bit seed of trial `trial_index`; independent of how trials are scheduled"""
    if master_seed < 0 or trial_index < 0:
        raise PreconditionError("seeds and trial indices must be nonnegative")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


# ============================================================================
# SUBSETS AND EMBEDDINGS
# ============================================================================


def sample_subset(n: int, size: int, rng: RngLike) -> tuple[int, ...]:
    """Uniform `size`-subset of [n], sorted ascending"""
    if not 0 <= size <= n:
        raise PreconditionError(f"subset size {size} outside [0, {n}]")
    gen = _as_generator(rng)
    picked = gen.choice(n, size=size, replace=False)
    return tuple(sorted(int(v) + 1 for v in picked))


def embed_fixed_graph(template: GraphTemplate, n: int, rng: RngLike) -> CommunityInstance:
    """Random copy of `template` in K_n through a uniform injection"""
    x = template.vertices
    if x > n:
        raise PreconditionError(f"template has {x} vertices but n={n}")
    if template.min_degree() < 1:
        raise PreconditionError("template has an isolated vertex")
    gen = _as_generator(rng)
    # an ordered sample without replacement is a uniform injection [x] -> [n]
    image = [int(v) + 1 for v in gen.choice(n, size=x, replace=False)]
    edges = [(image[u - 1], image[v - 1]) for u, v in template.edges]
    return CommunityInstance.create(image, edges)


# ============================================================================
# BERNOULLI AND CLIQUE COMMUNITIES
# ============================================================================


def _pair_from_index(k: int, index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices of the strict upper triangle (row-major) of a k x k grid to (i, j)"""
    rows = np.arange(k)
    row_start = rows * k - rows * (rows + 1) // 2
    i = np.searchsorted(row_start, index, side='right') - 1
    j = index - row_start[i] + i + 1
    return i, j


def _bernoulli_pairs(k: int, q: float, gen: np.random.Generator) -> np.ndarray:
    """Linear indices of the pairs kept by independent q-coins over C(k, 2) pairs"""
    total = k * (k - 1) // 2
    if total == 0 or q <= 0.0:
        return np.empty(0, dtype=np.int64)
    if q >= 1.0:
        return np.arange(total, dtype=np.int64)
    if q > DENSE_EDGE_THRESHOLD:
        return np.flatnonzero(gen.random(total) < q)
    # geometric skipping: gaps between kept pairs are Geometric(q)
    kept = []
    position = -1
    batch = max(16, int(total * q * 1.2) + 16)
    while True:
        gaps = gen.geometric(q, size=batch)
        positions = position + np.cumsum(gaps)
        inside = positions[positions < total]
        kept.append(inside)
        if len(inside) < len(positions):
            break
        position = int(positions[-1])
    return np.concatenate(kept).astype(np.int64)


def _draw_atom(weights: Sequence[float], gen: np.random.Generator) -> int:
    p = np.asarray(weights, dtype=float)
    return int(gen.choice(len(p), p=p / p.sum()))


def _random_graph_community(n: int, y: int, q: float, gen: np.random.Generator) -> CommunityInstance:
    y_hat = min(y, n)
    members = sample_subset(n, y_hat, gen)
    kept = _bernoulli_pairs(y_hat, q, gen)
    if len(kept) == 0:
        return CommunityInstance(members=members, edges=())
    i, j = _pair_from_index(y_hat, kept)
    # members are sorted, so (members[i], members[j]) with i < j is already canonical
    edges = tuple((members[a], members[b]) for a, b in zip(i.tolist(), j.tolist()))
    return CommunityInstance(members=members, edges=edges)


def sample_bernoulli_community(law: Sequence[YQAtom], n: int, rng: RngLike) -> CommunityInstance:
    """Draw (Y, Q), then G(min(Y, n), Q) placed on a uniform vertex subset"""
    gen = _as_generator(rng)
    atom = law[_draw_atom([a.w for a in law], gen)]
    return _random_graph_community(n, atom.y, atom.q, gen)


def sample_clique_community(size_law: Sequence[SizeAtom], n: int, rng: RngLike) -> CommunityInstance:
    """Clique on a uniform subset of size min(Y, n)"""
    gen = _as_generator(rng)
    atom = size_law[_draw_atom([a.w for a in size_law], gen)]
    return _random_graph_community(n, atom.size, 1.0, gen)


def sample_community(spec: ModelSpec, index: int, rng: RngLike) -> CommunityInstance:
    match spec.kind:
        case FixedGraphs():
            return embed_fixed_graph(spec.template_for(index), spec.n, rng)
        case BernoulliYQ(support=support):
            return sample_bernoulli_community(support, spec.n, rng)
        case CliqueSizes(support=support):
            return sample_clique_community(support, spec.n, rng)
    raise TypeError(f"unknown model kind {spec.kind!r}")


# ============================================================================
# UNION SAMPLER
# ============================================================================


def sample_union(spec: ModelSpec, rng_master: int) -> UnionGraph:
    """Sample G_[n,m]; community i uses RngStream(rng_master, i)"""
    report = validate_spec(spec)
    if not report.ok:
        raise InvalidSpecError(report)
    communities = [
        sample_community(spec, i, RngStream(rng_master, i))
        for i in range(spec.m)
    ]
    logger.debug("sampled %d communities on n=%d (seed %d)", spec.m, spec.n, rng_master)
    return build_union(spec.n, communities)
