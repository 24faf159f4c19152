"""
Exact connectivity measurements on union graphs
Vertex connectivity uses Menger's theorem on the vertex-split flow network
"""

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

import networkx as nx
from networkx.algorithms.connectivity import (
    build_auxiliary_node_connectivity,
    local_node_connectivity,
)
from networkx.algorithms.flow import build_residual_network, shortest_augmenting_path

from config import ORACLE_CONFIG
from model import CommunityInstance, PreconditionError, UnionGraph

logger = logging.getLogger("CONN")

# ============================================================================
# COMPONENTS AND DEGREES
# ============================================================================


@dataclass(frozen=True)
class ComponentCensus:
    """Component label per vertex and the size histogram (eta_k)"""
    labels: tuple[int, ...]
    sizes_histogram: dict[int, int]

    @property
    def component_count(self) -> int:
        return sum(self.sizes_histogram.values())

    def eta(self, k: int) -> int:
        return self.sizes_histogram.get(k, 0)


def _require_vertices(g: UnionGraph) -> None:
    if g.n < 1:
        raise PreconditionError("graph has no vertices")


def component_census(g: UnionGraph) -> ComponentCensus:
    labels = [0] * g.n
    sizes = Counter()
    # components come out in order of their smallest vertex
    for label, component in enumerate(nx.connected_components(g.graph)):
        for v in component:
            labels[v - 1] = label
        sizes[len(component)] += 1
    return ComponentCensus(labels=tuple(labels), sizes_histogram=dict(sorted(sizes.items())))


def is_connected(g: UnionGraph) -> bool:
    _require_vertices(g)
    return nx.is_connected(g.graph)


def min_degree(g: UnionGraph) -> int:
    _require_vertices(g)
    return min(len(nbrs) for nbrs in g.adjacency)


def degree_sequence(g: UnionGraph) -> list[int]:
    return [len(nbrs) for nbrs in g.adjacency]


# ============================================================================
# VERTEX CONNECTIVITY
# ============================================================================


class _FlowScratch:
    """Auxiliary digraph and residual network, built once per query"""

    def __init__(self, g: UnionGraph):
        self.auxiliary = build_auxiliary_node_connectivity(g.graph)
        self.residual = build_residual_network(self.auxiliary, 'capacity')

    def local(self, g: UnionGraph, s: int, t: int, cutoff: Optional[int]) -> int:
        return local_node_connectivity(
            g.graph, s, t,
            flow_func=shortest_augmenting_path,
            auxiliary=self.auxiliary,
            residual=self.residual,
            cutoff=cutoff,
        )


def local_vertex_connectivity(g: UnionGraph, s: int, t: int, cutoff: Optional[int] = None) -> int:
    """Maximum number of internally vertex-disjoint s-t paths for non-adjacent s, t"""
    if s == t or t in g.neighbors(s):
        raise PreconditionError(f"local connectivity needs distinct non-adjacent vertices, got {s}, {t}")
    return _FlowScratch(g).local(g, s, t, cutoff)


def is_k_vertex_connected(g: UnionGraph, k: int) -> bool:
    """
    True iff n >= k+1 and removing any k-1 vertices leaves g connected.

    Every separator S with |S| <= k-1 misses one of the vertices 1..k; if i is
    the smallest such vertex, all vertices below i lie in S, so some vertex
    j > i sits in another component. Checking kappa(i, j) >= k for every
    non-adjacent pair with i <= k and j > i is therefore enough.
    """
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    _require_vertices(g)
    if g.n < k + 1:
        return False
    if k == 1:
        return is_connected(g)
    if min_degree(g) < k:
        return False
    if not is_connected(g):
        return False

    scratch = _FlowScratch(g)
    for i in range(1, k + 1):
        adjacent = set(g.neighbors(i))
        for j in range(i + 1, g.n + 1):
            if j in adjacent:
                continue
            if scratch.local(g, i, j, cutoff=k) < k:
                return False
    return True


def vertex_connectivity(g: UnionGraph) -> int:
    """Largest k with is_k_vertex_connected(g, k); 0 when disconnected or n = 1"""
    _require_vertices(g)
    if g.n == 1 or not is_connected(g):
        return 0
    k = 1
    ceiling = min_degree(g)
    while k < ceiling and is_k_vertex_connected(g, k + 1):
        k += 1
    logger.debug("vertex connectivity %d (n=%d, min degree %d)", k, g.n, ceiling)
    return k


# ============================================================================
# ORACLE AND INDUCED SUBGRAPHS
# ============================================================================


def remove_vertices(g: UnionGraph, s: Iterable[int]) -> tuple[UnionGraph, dict[int, int]]:
    """Induced subgraph on [n] minus s, relabelled to 1..n-|s| in vertex order"""
    removed = set(s)
    for v in removed:
        if not 1 <= v <= g.n:
            raise PreconditionError(f"vertex {v} outside [1, {g.n}]")
    kept = [v for v in g.vertices() if v not in removed]
    index_map = {old: new for new, old in enumerate(kept, start=1)}

    adjacency = tuple(
        tuple(index_map[u] for u in g.neighbors(v) if u in index_map)
        for v in kept
    )
    communities = []
    for c in g.communities:
        members = [index_map[v] for v in c.members if v in index_map]
        edges = [(index_map[u], index_map[v]) for u, v in c.edges if u in index_map and v in index_map]
        communities.append(CommunityInstance.create(members, edges))
    return UnionGraph(n=len(kept), adjacency=adjacency, communities=tuple(communities)), index_map


def brute_force_vertex_connectivity(g: UnionGraph) -> int:
    """Smallest |S| with g - S disconnected, by exhaustive search; n-1 if none exists"""
    limit = ORACLE_CONFIG['brute_force_max_n']
    if g.n > limit:
        raise PreconditionError(f"brute force connectivity is limited to n <= {limit}, got n={g.n}")
    _require_vertices(g)
    graph = g.graph
    vertices = list(g.vertices())
    for size in range(0, g.n - 1):
        for cut in itertools.combinations(vertices, size):
            rest = graph.subgraph([v for v in vertices if v not in cut])
            if not nx.is_connected(rest):
                return size
    return g.n - 1
