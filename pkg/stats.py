"""
Combinatorial statistics of a union graph and its communities:
degree profiles, membership counts d'(v), d'_*(v), d'(u,v), the N-counters,
blossoms and the pair-overlap event A
"""

import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from config import STATS_CONFIG
from model import CommunityInstance, PreconditionError, UnionGraph

logger = logging.getLogger("STATS")

# ============================================================================
# DATA MODELS
# ============================================================================


@dataclass(frozen=True)
class CommunityProfile:
    x: int
    x_t: dict[int, int]


@dataclass(frozen=True)
class MembershipProfile:
    n: int
    a: int
    d_prime: tuple[int, ...]
    d_prime_star: tuple[int, ...]
    pair_counts: dict[tuple[int, int], int]
    total_non_isolated: int

    def pair_count(self, u: int, v: int) -> int:
        return self.pair_counts.get((u, v) if u < v else (v, u), 0)


@dataclass(frozen=True)
class NCounters:
    n_k: dict[int, int]
    n_star_k: dict[int, int]
    n_prime_k: dict[int, int]

    def nk(self, k: int) -> int:
        return self.n_k.get(k, 0)

    def n_star(self, k: int) -> int:
        return self.n_star_k.get(k, 0)

    def n_prime(self, k: int) -> int:
        return self.n_prime_k.get(k, 0)


# ============================================================================
# PROFILES
# ============================================================================


def community_profile(c: CommunityInstance) -> CommunityProfile:
    by_degree = Counter(d for d in c.degrees().values() if d > 0)
    return CommunityProfile(x=sum(by_degree.values()), x_t=dict(sorted(by_degree.items())))


def membership_profile(g: UnionGraph, a: int) -> MembershipProfile:
    if a < 1:
        raise PreconditionError(f"minimal positive degree a must be >= 1, got {a}")
    d_prime = [0] * g.n
    d_prime_star = [0] * g.n
    pair_counts = Counter()
    total = 0
    warn_size = STATS_CONFIG['pair_count_warn_size']

    for index, community in enumerate(g.communities):
        degrees = community.degrees()
        petal = [v for v, d in degrees.items() if d > 0]
        total += len(petal)
        if len(petal) > warn_size:
            logger.warning(
                "community %d has %d non-isolated vertices; pair counting is quadratic",
                index, len(petal),
            )
        for v in petal:
            d_prime[v - 1] += 1
            if degrees[v] == a:
                d_prime_star[v - 1] += 1
        # members are sorted, so combinations yield canonical (u, v) with u < v
        pair_counts.update(itertools.combinations(petal, 2))

    return MembershipProfile(
        n=g.n,
        a=a,
        d_prime=tuple(d_prime),
        d_prime_star=tuple(d_prime_star),
        pair_counts=dict(pair_counts),
        total_non_isolated=total,
    )


def d_prime_sequence(g: UnionGraph) -> tuple[int, ...]:
    """d'(v) for every vertex, without the pair counts of membership_profile"""
    d_prime = [0] * g.n
    for community in g.communities:
        for v in community.non_isolated():
            d_prime[v - 1] += 1
    return tuple(d_prime)


def n_counters(profile: MembershipProfile) -> NCounters:
    """N_k, N_*k and the ordered-pair count N'_k"""
    n_k = Counter(profile.d_prime)
    n_star_k = Counter(
        dp for dp, ds in zip(profile.d_prime, profile.d_prime_star) if dp == ds
    )
    n_prime_k = Counter()
    for (u, v), count in profile.pair_counts.items():
        if count >= 2:
            # both ordered incidences (v, u) and (u, v)
            n_prime_k[profile.d_prime[v - 1]] += 1
            n_prime_k[profile.d_prime[u - 1]] += 1
    return NCounters(
        n_k=dict(sorted(n_k.items())),
        n_star_k=dict(sorted(n_star_k.items())),
        n_prime_k=dict(sorted(n_prime_k.items())),
    )


def degree_pooled_frequencies(profile: MembershipProfile, max_k: int) -> list[float]:
    """Empirical P{d'(v) = k}, k = 0..max_k, pooled over all vertices"""
    counts = Counter(profile.d_prime)
    return [counts.get(k, 0) / profile.n for k in range(max_k + 1)]


# ============================================================================
# BLOSSOMS AND EVENTS
# ============================================================================


def _petals_by_vertex(g: UnionGraph) -> dict[int, list[frozenset]]:
    petals = defaultdict(list)
    for community in g.communities:
        petal = frozenset(community.non_isolated())
        for v in petal:
            petals[v].append(petal)
    return petals


def _pairwise_meet_only_at(v: int, petals: list[frozenset]) -> bool:
    return all(p & q == {v} for p, q in itertools.combinations(petals, 2))


def is_blossom_center(g: UnionGraph, v: int) -> bool:
    """True iff the petals of v pairwise intersect exactly in {v} (vacuous for d'(v) <= 1)"""
    petals = [
        frozenset(c.non_isolated()) for c in g.communities
        if v in c.members and c.degrees()[v] > 0
    ]
    return _pairwise_meet_only_at(v, petals)


def blossom_census(g: UnionGraph, profile: MembershipProfile, k: int) -> tuple[list[int], list[int]]:
    """Vertices with d'(v) = k and the blossom centres among them"""
    petals = _petals_by_vertex(g)
    candidates = [v for v in g.vertices() if profile.d_prime[v - 1] == k]
    centres = [v for v in candidates if _pairwise_meet_only_at(v, petals.get(v, []))]
    return candidates, centres


def detect_event_A(profile: MembershipProfile) -> bool:
    """Some pair of vertices is non-isolated together in at least 3 communities"""
    return any(count >= 3 for count in profile.pair_counts.values())


def empirical_min_positive_degree(communities: Iterable[CommunityInstance]) -> Optional[int]:
    positive = [
        d for c in communities for d in c.degrees().values() if d >= 1
    ]
    return min(positive, default=None)


# ============================================================================
# PER-SAMPLE INVARIANTS
# ============================================================================


def check_profile_invariants(g: UnionGraph, profile: MembershipProfile, counters: NCounters) -> list[str]:
    """Violation messages for the identities every sample must satisfy"""
    problems = []

    if sum(counters.n_k.values()) != g.n:
        problems.append(f"sum of N_k is {sum(counters.n_k.values())}, expected n={g.n}")

    weighted = sum(k * count for k, count in counters.n_k.items())
    if not weighted == sum(profile.d_prime) == profile.total_non_isolated:
        problems.append(
            f"sum k*N_k={weighted}, sum d'={sum(profile.d_prime)}, sum X_i={profile.total_non_isolated} disagree"
        )

    if counters.n_star(0) != counters.nk(0):
        problems.append(f"N_*0={counters.n_star(0)} differs from N_0={counters.nk(0)}")

    for k, count in counters.n_star_k.items():
        if count > counters.nk(k):
            problems.append(f"N_*{k}={count} exceeds N_{k}={counters.nk(k)}")

    petals = _petals_by_vertex(g)
    for k in counters.n_k:
        if counters.n_prime(k) == 0:
            for v in g.vertices():
                if profile.d_prime[v - 1] == k and not _pairwise_meet_only_at(v, petals.get(v, [])):
                    problems.append(f"N'_{k}=0 but vertex {v} with d'={k} is not a blossom centre")

    # 2 d(w) >= sum over neighbours of d'(w, u) needs every d'(w, u) <= 2
    if not detect_event_A(profile):
        for w in g.vertices():
            overlap = sum(profile.pair_count(w, u) for u in g.neighbors(w))
            if overlap > 2 * g.degree(w):
                problems.append(f"vertex {w}: sum of d'(w,u) over neighbours {overlap} > 2*d(w)={2 * g.degree(w)}")

    return problems
