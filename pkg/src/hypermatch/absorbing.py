"""Absorbing edges and absorbing matchings.

A type-j set has two vertices in class ``j`` and one in every other class.
An edge ``e`` disjoint from such a set ``S`` absorbs it when, for some class
``r != j`` and some ``v`` in ``S`` of class ``j``, both exchange sets

    S_e = (S - {v} - V_r) + (e & V_r)
    e_S = (e - V_j - V_r) + {v} + (S & V_r)

are edges.  Swapping ``e`` for ``S_e, e_S`` in a matching covers all of
``S`` and grows the matching by one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .core import Edge, KPGraph, Matching, Vertex, codegree
from .errors import AbsorbPlanUnavailable, AbsorptionFailed, InputError, InvalidMatching
from .generators import philox
from .oracle import as_fraction

VERIFY_CAP = 12
SAMPLED_SETS_PER_CLASS = 1000
ABSORB_STREAM = 2
VERIFY_STREAM = 3


@dataclass(frozen=True)
class TypeJSet:
    """``slots[c]`` is the class ``c + 1`` vertex; class ``j`` also holds ``extra``."""

    j: int
    slots: tuple[int, ...]
    extra: int

    def __post_init__(self) -> None:
        if not 1 <= self.j <= len(self.slots):
            raise InputError(f"class {self.j} out of range")
        if self.extra == self.slots[self.j - 1]:
            raise InputError("the two class-j vertices must differ")

    @property
    def pair(self) -> tuple[int, int]:
        a, b = self.slots[self.j - 1], self.extra
        return (a, b) if a < b else (b, a)

    @property
    def vertices(self) -> frozenset[Vertex]:
        out = {Vertex(c + 1, x) for c, x in enumerate(self.slots)}
        out.add(Vertex(self.j, self.extra))
        return frozenset(out)

    def meets(self, e: Edge) -> bool:
        return any(e[c] == x for c, x in enumerate(self.slots)) or e[self.j - 1] == self.extra

    @classmethod
    def from_vertices(cls, vertices: Iterable[Vertex], k: int) -> TypeJSet:
        by_class: dict[int, list[int]] = {}
        for v in vertices:
            by_class.setdefault(v[0], []).append(v[1])
        doubled = [c for c, xs in by_class.items() if len(xs) == 2]
        if (
            sorted(by_class) != list(range(1, k + 1))
            or len(doubled) != 1
            or any(len(xs) > 2 for xs in by_class.values())
        ):
            raise InputError("not a type-j set")
        j = doubled[0]
        a, b = sorted(by_class[j])
        slots = tuple(a if c == j else by_class[c][0] for c in range(1, k + 1))
        return cls(j, slots, b)


@dataclass(frozen=True)
class AbsorbCert:
    e: Edge
    r: int
    v: Vertex
    S_e: Edge
    e_S: Edge


def _exchange(S: TypeJSet, e: Edge, r: int, v: int) -> tuple[Edge, Edge]:
    j = S.j
    other = S.extra if v == S.slots[j - 1] else S.slots[j - 1]
    s_e = list(S.slots)
    s_e[j - 1] = other
    s_e[r - 1] = e[r - 1]
    e_s = list(e)
    e_s[j - 1] = v
    e_s[r - 1] = S.slots[r - 1]
    return tuple(s_e), tuple(e_s)


def find_absorb_cert(H: KPGraph, e: Edge, S: TypeJSet) -> AbsorbCert | None:
    """First certificate over ``r`` ascending, then ``v`` ascending."""
    if S.meets(e):
        return None
    for r in range(1, H.k + 1):
        if r == S.j:
            continue
        for v in S.pair:
            s_e, e_s = _exchange(S, e, r, v)
            if s_e in H.edges and e_s in H.edges:
                return AbsorbCert(e, r, Vertex(S.j, v), s_e, e_s)
    return None


def count_absorbing(H: KPGraph, S: TypeJSet, edges: Iterable[Edge] | None = None) -> int:
    """Number of S-absorbing edges among ``edges`` (default: all of ``H``)."""
    pool = H.sorted_edges if edges is None else edges
    return sum(1 for e in pool if find_absorb_cert(H, e, S) is not None)


def type_j_sets(
    k: int, alive: list[list[int]] | tuple[tuple[int, ...], ...], j: int | None = None
) -> Iterator[TypeJSet]:
    """Every type-j set drawn from ``alive`` (per-class index lists)."""
    for jj in [j] if j is not None else range(1, k + 1):
        others = [alive[c] for c in range(k) if c != jj - 1]
        for a, b in itertools.combinations(alive[jj - 1], 2):
            for rest in itertools.product(*others):
                slots = rest[: jj - 1] + (a,) + rest[jj - 1 :]
                yield TypeJSet(jj, slots, b)


def asymptotic_size_cap(k: int, n: int, c: float) -> int:
    """``C log n`` with ``C = 32(k+2)/c^3``."""
    return math.floor(32 * (k + 2) / float(c) ** 3 * math.log(n))


def asymptotic_floor(k: int, n: int) -> int:
    """Per-set absorbing floor ``4(k+2) log n``."""
    return math.ceil(4 * (k + 2) * math.log(n))


@dataclass(frozen=True)
class AbsorbPlan:
    """A sampled matching whose absorbing power was verified exactly.

    Only :func:`sample_absorbing_matching` builds these.  ``min_count`` is
    the smallest number of absorbing edges of ``M_prime`` over the checked
    sets, ``exhaustive`` says whether every eligible set was checked.
    """

    M_prime: Matching
    per_S_floor: int
    size_cap: int
    c: float
    seed: int
    retries_used: int
    p: float
    checked_sets: int
    min_count: int | None
    exhaustive: bool
    counts: tuple[tuple[TypeJSet, int], ...] = field(default=(), repr=False)


def _candidate_sets(
    H: KPGraph, M: Matching, seed: int, verify_cap: int, per_class: int
) -> tuple[Iterator[TypeJSet], bool]:
    free = M.uncovered(H)
    if H.n <= verify_cap:
        return type_j_sets(H.k, free), True
    rng = philox(seed, VERIFY_STREAM)

    def sampled() -> Iterator[TypeJSet]:
        for j in range(1, H.k + 1):
            if len(free[j - 1]) < 2 or any(not f for f in free):
                continue
            for _ in range(per_class):
                a, b = rng.choice(free[j - 1], size=2, replace=False).tolist()
                slots = tuple(
                    a if c == j - 1 else int(rng.choice(free[c])) for c in range(H.k)
                )
                yield TypeJSet(j, slots, b)

    return sampled(), False


def sample_absorbing_matching(
    H: KPGraph,
    c: float,
    t: int,
    size_cap: int,
    seed: int,
    retries: int = 200,
    verify_cap: int = VERIFY_CAP,
    sets_per_class: int = SAMPLED_SETS_PER_CLASS,
    keep_counts: bool = False,
) -> AbsorbPlan:
    """Sample a small matching that absorbs every type-j set at least ``t`` times.

    Each edge is kept independently with probability
    ``min(1, size_cap / (2 n^k))``, so the expected sample size is half the
    cap (with ``size_cap = C log n`` this is the textbook choice).  Samples
    that are not matchings or exceed the cap are thrown away.  A kept
    sample is certified by exact counting over every type-j set avoiding
    it when ``n <= verify_cap``, otherwise over ``sets_per_class`` seeded
    random sets per class.
    """
    k = H.k
    n = H.n
    cf = as_fraction(c)
    if t < 0 or size_cap < 0:
        raise InputError("t and size_cap must be nonnegative")
    delta = codegree(H)
    if delta < cf * n:
        raise InputError(f"co-degree {delta} < c*n = {float(cf * n):.3g}")
    if t == 0:
        return AbsorbPlan(Matching(), 0, size_cap, c, seed, 0, 0.0, 0, None, True)
    p = min(1.0, size_cap / (2 * n**k))
    rng = philox(seed, ABSORB_STREAM)
    edges = H.sorted_edges
    rejected = {"not_matching": 0, "over_cap": 0, "empty": 0, "under_floor": 0}
    for attempt in range(1, retries + 1):
        draws = rng.random(len(edges))
        picked = [e for e, u in zip(edges, draws) if u < p]
        if not picked:
            rejected["empty"] += 1
            continue
        if len(picked) > size_cap:
            rejected["over_cap"] += 1
            continue
        try:
            M = Matching(tuple(picked))
        except InvalidMatching:
            rejected["not_matching"] += 1
            continue
        sets, exhaustive = _candidate_sets(H, M, seed + attempt, verify_cap, sets_per_class)
        checked = 0
        low: int | None = None
        counts: list[tuple[TypeJSet, int]] = []
        ok = True
        for S in sets:
            cnt = count_absorbing(H, S, M.edges)
            checked += 1
            low = cnt if low is None else min(low, cnt)
            if keep_counts:
                counts.append((S, cnt))
            if cnt < t:
                ok = False
                break
        if not ok:
            rejected["under_floor"] += 1
            continue
        return AbsorbPlan(
            M, t, size_cap, c, seed, attempt, p, checked, low, exhaustive, tuple(counts)
        )
    raise AbsorbPlanUnavailable(
        f"absorbing plan unavailable at this scale after {retries} retries",
        {"p": p, "expected_size": p * len(edges), "rejections": rejected},
    )


def absorb_one(H: KPGraph, M: Matching, plan: AbsorbPlan, S: TypeJSet) -> Matching:
    """Swap one plan edge of ``M`` for the two exchange edges covering ``S``."""
    if any(S.meets(e) for e in M):
        raise InputError("S must avoid the vertices of M")
    for e in plan.M_prime:
        if e not in M:
            continue
        cert = find_absorb_cert(H, e, S)
        if cert is not None:
            return M.remove(e).add(cert.S_e, cert.e_S)
    raise AbsorptionFailed("no plan edge in the matching absorbs S")
