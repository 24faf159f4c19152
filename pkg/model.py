"""
Core graph and model types for unions of random subgraphs of K_n
Vertices are 1-based integers, edges are sorted (min, max) pairs
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, NewType, Sequence, Union

import networkx as nx

VertexId = NewType("VertexId", int)
Edge = tuple[int, int]

# ============================================================================
# ERRORS
# ============================================================================


class GraphUnionError(Exception):
    """Base class for every toolkit error"""


class PreconditionError(GraphUnionError, ValueError):
    """An operation was called outside its stated domain"""


class VertexRangeError(PreconditionError):
    def __init__(self, community_index: int, vertex: int, n: int):
        self.community_index = community_index
        self.vertex = vertex
        super().__init__(
            f"community {community_index} uses vertex {vertex} outside [1, {n}]"
        )


class InvalidSpecError(GraphUnionError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid model spec: " + "; ".join(report.messages))


class BudgetExceededError(GraphUnionError):
    def __init__(self, message: str, estimate: int):
        self.estimate = estimate
        super().__init__(f"{message} (estimated {estimate} configurations)")


class ConfigError(GraphUnionError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ModelConsistencyError(GraphUnionError):
    """Derived quantities contradict each other (negative product factor, kappa < 2 alpha)"""


# ============================================================================
# DATA MODELS
# ============================================================================


def canonical_edge(u: int, v: int) -> Edge:
    if u == v:
        raise PreconditionError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class GraphTemplate:
    """A fixed graph F on vertices 1..vertices"""
    vertices: int
    edges: tuple[Edge, ...]

    @classmethod
    def create(cls, vertices: int, edges: Iterable[Sequence[int]]) -> "GraphTemplate":
        canon = sorted({canonical_edge(int(u), int(v)) for u, v in edges})
        return cls(vertices=int(vertices), edges=tuple(canon))

    def degrees(self) -> list[int]:
        deg = [0] * self.vertices
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return deg

    def min_degree(self) -> int:
        return min(self.degrees(), default=0)

    def problems(self) -> list[str]:
        out = []
        if self.vertices < 2:
            out.append(f"template has {self.vertices} vertices, need at least 2")
        for u, v in self.edges:
            if not (1 <= u <= self.vertices and 1 <= v <= self.vertices):
                out.append(f"template edge ({u}, {v}) outside [1, {self.vertices}]")
        if not out and self.min_degree() < 1:
            out.append("template has an isolated vertex (minimal degree must be >= 1)")
        return out


def edge_template() -> GraphTemplate:
    return GraphTemplate.create(2, [(1, 2)])


def cherry_template() -> GraphTemplate:
    """Path of length 2 (open triangle) centred at vertex 2"""
    return GraphTemplate.create(3, [(1, 2), (2, 3)])


def clique_template(size: int) -> GraphTemplate:
    return GraphTemplate.create(size, [(u, v) for u in range(1, size + 1) for v in range(u + 1, size + 1)])


def cycle_template(size: int) -> GraphTemplate:
    return GraphTemplate.create(size, [(i, i % size + 1) for i in range(1, size + 1)])


@dataclass(frozen=True)
class CommunityInstance:
    """One sampled subgraph G_i: its vertex set V_i and edges on it"""
    members: tuple[int, ...]
    edges: tuple[Edge, ...] = ()

    @classmethod
    def create(cls, members: Iterable[int], edges: Iterable[Sequence[int]] = ()) -> "CommunityInstance":
        member_set = sorted({int(v) for v in members})
        canon = sorted({canonical_edge(int(u), int(v)) for u, v in edges})
        lookup = set(member_set)
        for u, v in canon:
            if u not in lookup or v not in lookup:
                raise PreconditionError(f"edge ({u}, {v}) has an endpoint outside the community members")
        return cls(members=tuple(member_set), edges=tuple(canon))

    def degrees(self) -> dict[int, int]:
        """d_i(v) for every member (0 for members with no edge)"""
        deg = dict.fromkeys(self.members, 0)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def non_isolated(self) -> tuple[int, ...]:
        return tuple(v for v, d in self.degrees().items() if d > 0)


@dataclass(frozen=True)
class UnionGraph:
    """G_[n,m]: union of the community edge sets on [n]"""
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    communities: tuple[CommunityInstance, ...] = ()

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v - 1]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v - 1])

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def edges(self) -> list[Edge]:
        return [(v, u) for v in self.vertices() for u in self.neighbors(v) if v < u]

    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices())
        g.add_edges_from(self.edges())
        return g

    def to_networkx(self) -> nx.Graph:
        return self.graph.copy()


# ----------------------------------------------------------------------------
# Community laws
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class YQAtom:
    y: int
    q: float
    w: float


@dataclass(frozen=True)
class SizeAtom:
    size: int
    w: float


@dataclass(frozen=True)
class FixedGraphs:
    templates: tuple[GraphTemplate, ...]


@dataclass(frozen=True)
class BernoulliYQ:
    support: tuple[YQAtom, ...]


@dataclass(frozen=True)
class CliqueSizes:
    support: tuple[SizeAtom, ...]


ModelKind = Union[FixedGraphs, BernoulliYQ, CliqueSizes]


class KindName(Enum):
    FIXED_GRAPHS = "fixed_graphs"
    BERNOULLI_YQ = "bernoulli_yq"
    CLIQUE_SIZES = "clique_sizes"


@dataclass(frozen=True)
class ModelSpec:
    n: int
    m: int
    kind: ModelKind

    @property
    def kind_name(self) -> KindName:
        match self.kind:
            case FixedGraphs():
                return KindName.FIXED_GRAPHS
            case BernoulliYQ():
                return KindName.BERNOULLI_YQ
            case CliqueSizes():
                return KindName.CLIQUE_SIZES
        raise TypeError(f"unknown model kind {self.kind!r}")

    def template_for(self, index: int) -> GraphTemplate:
        """Template of community `index` (0-based); the template list is cycled"""
        templates = self.kind.templates
        return templates[index % len(templates)]


@dataclass(frozen=True)
class ValidationReport:
    messages: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.messages

    @classmethod
    def from_messages(cls, messages: Iterable[str]) -> "ValidationReport":
        return cls(messages=tuple(messages))


# ============================================================================
# OPERATIONS
# ============================================================================

WEIGHT_TOLERANCE = 1e-12


def _check_weights(label: str, weights: list[float]) -> list[str]:
    out = []
    for i, w in enumerate(weights):
        if not math.isfinite(w) or w < 0:
            out.append(f"{label}: weight {i} is {w}, must be nonnegative")
    total = math.fsum(w for w in weights if math.isfinite(w))
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        out.append(f"{label}: weights sum to {total!r}, must sum to 1")
    return out


def validate_spec(spec: ModelSpec) -> ValidationReport:
    """Report every violated ModelSpec invariant (never raises)"""
    messages = []
    if not isinstance(spec.n, int) or spec.n < 1:
        messages.append(f"n must be a positive integer, got {spec.n!r}")
    if not isinstance(spec.m, int) or spec.m < 0:
        messages.append(f"m must be a nonnegative integer, got {spec.m!r}")

    match spec.kind:
        case FixedGraphs(templates=templates):
            if not templates:
                messages.append("fixed_graphs: template list is empty")
            for i, t in enumerate(templates):
                messages.extend(f"fixed_graphs[{i}]: {p}" for p in t.problems())
                if isinstance(spec.n, int) and t.vertices > spec.n:
                    messages.append(f"fixed_graphs[{i}]: {t.vertices} vertices exceed n={spec.n}")
        case BernoulliYQ(support=support):
            messages.extend(_check_weights("bernoulli_yq", [a.w for a in support]))
            for i, a in enumerate(support):
                if not isinstance(a.y, int) or a.y < 0:
                    messages.append(f"bernoulli_yq[{i}]: y={a.y!r} must be a nonnegative integer")
                if not (0.0 <= a.q <= 1.0):
                    messages.append(f"bernoulli_yq[{i}]: q={a.q!r} outside [0, 1]")
        case CliqueSizes(support=support):
            messages.extend(_check_weights("clique_sizes", [a.w for a in support]))
            for i, a in enumerate(support):
                if not isinstance(a.size, int) or a.size < 0:
                    messages.append(f"clique_sizes[{i}]: size={a.size!r} must be a nonnegative integer")
        case _:
            messages.append(f"unknown model kind {spec.kind!r}")

    return ValidationReport.from_messages(messages)


def build_union(n: int, communities: Sequence[CommunityInstance]) -> UnionGraph:
    """Union graph on [n] with the deduplicated union of community edges"""
    if n < 0:
        raise PreconditionError(f"n must be nonnegative, got {n}")
    neighbor_sets = [set() for _ in range(n)]
    for index, community in enumerate(communities):
        for v in community.members:
            if not 1 <= v <= n:
                raise VertexRangeError(index, v, n)
        for u, v in community.edges:
            neighbor_sets[u - 1].add(v)
            neighbor_sets[v - 1].add(u)
    adjacency = tuple(tuple(sorted(s)) for s in neighbor_sets)
    return UnionGraph(n=n, adjacency=adjacency, communities=tuple(communities))


def union_from_edges(n: int, edges: Iterable[Sequence[int]]) -> UnionGraph:
    """Union graph in which every edge is its own single-edge community"""
    communities = [CommunityInstance.create((u, v), [(u, v)]) for u, v in edges]
    return build_union(n, communities)


# ============================================================================
# JSON (DE)SERIALIZATION
# ============================================================================


def spec_to_dict(spec: ModelSpec) -> dict:
    match spec.kind:
        case FixedGraphs(templates=templates):
            kind = {"fixed_graphs": [
                {"vertices": t.vertices, "edges": [list(e) for e in t.edges]} for t in templates
            ]}
        case BernoulliYQ(support=support):
            kind = {"bernoulli_yq": {"support": [{"y": a.y, "q": a.q, "w": a.w} for a in support]}}
        case CliqueSizes(support=support):
            kind = {"clique_sizes": {"support": [{"size": a.size, "w": a.w} for a in support]}}
        case _:
            raise TypeError(f"unknown model kind {spec.kind!r}")
    return {"n": spec.n, "m": spec.m, "kind": kind}


def spec_from_dict(data: dict, path: str = "spec") -> ModelSpec:
    """Parse the ModelSpec JSON document; structural problems raise ConfigError"""
    if not isinstance(data, dict):
        raise ConfigError(path, "must be an object")
    for key in ("n", "m", "kind"):
        if key not in data:
            raise ConfigError(f"{path}.{key}", "missing")
    kind_data = data["kind"]
    if not isinstance(kind_data, dict) or len(kind_data) != 1:
        raise ConfigError(f"{path}.kind", "must hold exactly one of fixed_graphs, bernoulli_yq, clique_sizes")
    (name, body), = kind_data.items()
    try:
        match KindName(name):
            case KindName.FIXED_GRAPHS:
                kind = FixedGraphs(tuple(
                    GraphTemplate.create(t["vertices"], t["edges"]) for t in body
                ))
            case KindName.BERNOULLI_YQ:
                kind = BernoulliYQ(tuple(
                    YQAtom(y=a["y"], q=float(a["q"]), w=float(a["w"])) for a in body["support"]
                ))
            case KindName.CLIQUE_SIZES:
                kind = CliqueSizes(tuple(
                    SizeAtom(size=a["size"], w=float(a["w"])) for a in body["support"]
                ))
    except ValueError as e:
        raise ConfigError(f"{path}.kind.{name}", str(e)) from e
    except (KeyError, TypeError) as e:
        raise ConfigError(f"{path}.kind.{name}", f"malformed entry ({e})") from e
    return ModelSpec(n=data["n"], m=data["m"], kind=kind)


def load_spec(file_path: Union[str, Path]) -> ModelSpec:
    with open(file_path, encoding="utf-8") as handle:
        return spec_from_dict(json.load(handle))


def require_valid(spec: ModelSpec) -> None:
    report = validate_spec(spec)
    if not report.ok:
        raise InvalidSpecError(report)
