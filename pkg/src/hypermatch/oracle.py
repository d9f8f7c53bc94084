"""Exact ground truth: maximum matching, extremal witnesses, degree pre-check.

Edge and vertex sets are Python ints used as bitsets.  Bit ``i`` of an
edge mask stands for ``H.sorted_edges[i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import Edge, KPGraph, Matching, Vertex
from .errors import InputError

DEFAULT_BUDGET = 2_000_000
NAIVE_EDGE_LIMIT = 20
EXACT_CAP_N = 10
EXACT_CAP_K = 4


def as_fraction(x: float | Fraction) -> Fraction:
    """Exact rational for a user-supplied decimal such as ``0.1``."""
    if isinstance(x, Fraction):
        return x
    return Fraction(str(x))


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Index:
    """Incidence bitsets of the live edges of ``H``."""

    def __init__(self, H: KPGraph):
        self.H = H
        self.edges: tuple[Edge, ...] = H.sorted_edges
        self.verts: list[Vertex] = list(H.vertices())
        vid = {v: i for i, v in enumerate(self.verts)}
        self.cls_of = [v.cls - 1 for v in self.verts]
        self.inc = [0] * len(self.verts)
        self.edge_verts: list[tuple[int, ...]] = []
        for ei, e in enumerate(self.edges):
            ids = tuple(vid[Vertex(c + 1, x)] for c, x in enumerate(e))
            self.edge_verts.append(ids)
            for u in ids:
                self.inc[u] |= 1 << ei
        self.conflict = [0] * len(self.edges)
        for ei, ids in enumerate(self.edge_verts):
            m = 0
            for u in ids:
                m |= self.inc[u]
            self.conflict[ei] = m
        self.full = (1 << len(self.edges)) - 1


@dataclass(frozen=True)
class MatchingResult:
    size: int
    matching: Matching
    exact: bool
    nodes: int


class _BudgetExhausted(Exception):
    pass


def max_matching_exact(H: KPGraph, budget: int = DEFAULT_BUDGET) -> MatchingResult:
    """Maximum matching by branch and bound.

    Branches on a live vertex of minimum remaining degree (ties: lowest
    class, then lowest index): either one of its edges is taken or the
    vertex stays uncovered.  A node is pruned when the current size plus
    the smaller of the fewest live vertices in any class and a greedy
    vertex-cover size cannot beat the incumbent.  If more than ``budget``
    nodes are needed the best matching found so far is returned with
    ``exact=False``.
    """
    idx = _Index(H)
    nverts = len(idx.verts)
    k = H.k
    static_deg = [m.bit_count() for m in idx.inc]
    edge_rank = [
        (sum(static_deg[u] for u in ids), ei) for ei, ids in enumerate(idx.edge_verts)
    ]

    best_edges: list[int] = []
    chosen: list[int] = []
    nodes = 0

    def cover_bound(avail: int, limit: int) -> int:
        # greedy transversal size; stops once it exceeds ``limit``
        rem = avail
        count = 0
        while rem:
            count += 1
            if count > limit:
                return count
            top, pick = -1, -1
            for v in range(nverts):
                d = (idx.inc[v] & rem).bit_count()
                if d > top:
                    top, pick = d, v
            rem &= ~idx.inc[pick]
        return count

    def live_count(avail: int) -> list[int]:
        counts = [0] * k
        for v in range(nverts):
            if idx.inc[v] & avail:
                counts[idx.cls_of[v]] += 1
        return counts

    root_ub = min(min(live_count(idx.full)), cover_bound(idx.full, nverts)) if idx.edges else 0

    def search(avail: int) -> bool:
        nonlocal nodes, best_edges
        nodes += 1
        if nodes > budget:
            raise _BudgetExhausted
        cur = len(chosen)
        if cur > len(best_edges):
            best_edges = list(chosen)
            if len(best_edges) >= root_ub:
                return True
        if not avail:
            return False
        slack = len(best_edges) - cur
        if min(live_count(avail)) <= slack:
            return False
        if cover_bound(avail, slack) <= slack:
            return False
        pick, pick_deg = -1, None
        for v in range(nverts):
            d = (idx.inc[v] & avail).bit_count()
            if d and (pick_deg is None or d < pick_deg):
                pick, pick_deg = v, d
        options = sorted(_bits(idx.inc[pick] & avail), key=edge_rank.__getitem__)
        for ei in options:
            chosen.append(ei)
            done = search(avail & ~idx.conflict[ei])
            chosen.pop()
            if done:
                return True
        return search(avail & ~idx.inc[pick])

    exact = True
    try:
        search(idx.full)
    except _BudgetExhausted:
        exact = False
    matching = Matching(tuple(idx.edges[ei] for ei in best_edges))
    return MatchingResult(len(matching), matching, exact, nodes)


def naive_max_matching(H: KPGraph) -> int:
    """Matching number by enumerating every set of pairwise disjoint edges.

    No bounding at all; only meant to check :func:`max_matching_exact`.
    """
    edges = H.sorted_edges
    if len(edges) > NAIVE_EDGE_LIMIT:
        raise InputError(f"naive enumeration limited to {NAIVE_EDGE_LIMIT} edges")
    best = 0

    def rec(i: int, used: list[set[int]], size: int) -> None:
        nonlocal best
        if i == len(edges):
            best = max(best, size)
            return
        rec(i + 1, used, size)
        e = edges[i]
        if all(x not in used[c] for c, x in enumerate(e)):
            for c, x in enumerate(e):
                used[c].add(x)
            rec(i + 1, used, size + 1)
            for c, x in enumerate(e):
                used[c].discard(x)

    rec(0, [set() for _ in range(H.k)], 0)
    return best


@dataclass(frozen=True)
class ExtremalWitness:
    W: frozenset[Vertex]
    per_class_counts: tuple[int, ...]
    gamma: float
    threshold: int


@dataclass(frozen=True)
class WitnessSearch:
    witness: ExtremalWitness | None
    exact: bool  # False: heuristic search, a missing witness is not certified
    nodes: int


def extremal_threshold(k: int, n: int, gamma: float) -> int:
    """Smallest per-class size of an independent set making H gamma-extremal."""
    g = as_fraction(gamma)
    return math.ceil((1 - g) * (k - 1) * n / k)


def witness_search(
    H: KPGraph,
    gamma: float,
    exact_cap_n: int = EXACT_CAP_N,
    exact_cap_k: int = EXACT_CAP_K,
) -> WitnessSearch:
    """Look for an independent set with at least the extremal threshold per class.

    Equivalently, a transversal of all edges removing at most
    ``n - threshold`` vertices from each class.  Exact backtracking is used
    up to the caps, greedy peeling of the highest-degree vertex above them.
    """
    if not 0 <= as_fraction(gamma) < 1:
        raise InputError("gamma must lie in [0, 1)")
    n = H.n
    k = H.k
    t = extremal_threshold(k, n, gamma)
    allowance = n - t
    if allowance < 0:
        return WitnessSearch(None, True, 0)
    idx = _Index(H)
    nverts = len(idx.verts)

    def make(removed: set[int]) -> ExtremalWitness:
        W = frozenset(v for i, v in enumerate(idx.verts) if i not in removed)
        counts = [0] * k
        for v in W:
            counts[v.cls - 1] += 1
        return ExtremalWitness(W, tuple(counts), gamma, t)

    if n > exact_cap_n or k > exact_cap_k:
        removed: set[int] = set()
        used = [0] * k
        unhit = idx.full
        while unhit:
            top, pick = 0, -1
            for v in range(nverts):
                if used[idx.cls_of[v]] >= allowance:
                    continue
                d = (idx.inc[v] & unhit).bit_count()
                if d > top:
                    top, pick = d, v
            if pick < 0:
                return WitnessSearch(None, False, len(removed))
            removed.add(pick)
            used[idx.cls_of[pick]] += 1
            unhit &= ~idx.inc[pick]
        return WitnessSearch(make(removed), False, len(removed))

    nodes = 0
    removed = set()
    used = [0] * k

    def rec(unhit: int) -> bool:
        nonlocal nodes
        nodes += 1
        if not unhit:
            return True
        first = (unhit & -unhit).bit_length() - 1
        cands = [u for u in idx.edge_verts[first] if used[idx.cls_of[u]] < allowance]
        cands.sort(key=lambda u: (-(idx.inc[u] & unhit).bit_count(), u))
        for u in cands:
            removed.add(u)
            used[idx.cls_of[u]] += 1
            if rec(unhit & ~idx.inc[u]):
                return True
            removed.discard(u)
            used[idx.cls_of[u]] -= 1
        return False

    found = rec(idx.full)
    return WitnessSearch(make(removed) if found else None, True, nodes)


def find_extremal_witness(H: KPGraph, gamma: float, **caps: int) -> ExtremalWitness | None:
    return witness_search(H, gamma, **caps).witness


def _min_block_degree(H: KPGraph, classes: tuple[int, ...]) -> int:
    proj = H.projection(classes)
    total = math.prod(H.effective_sizes[c - 1] for c in classes)
    if len(proj) < total:
        return 0
    return min(len(v) for v in proj.values())


def pikhurko_precheck(H: KPGraph, l: int, alpha: float = 0.1) -> bool:
    """Degree-sum condition over the class split ``1..l`` / ``l+1..k``.

    True iff every legal l-set S in the first l classes and every legal
    (k-l)-set S' in the rest satisfy
    ``d(S)/n**(k-l) + d(S')/n**l > 1 + alpha``.  Only the predicate; the
    matching itself must come from :func:`max_matching_exact`.
    """
    k = H.k
    if not 1 <= l <= k - 1:
        raise InputError(f"l must lie in 1..{k - 1}")
    n = H.n
    if n == 0:
        return False
    low = _min_block_degree(H, tuple(range(1, l + 1)))
    high = _min_block_degree(H, tuple(range(l + 1, k + 1)))
    lhs = Fraction(low, n ** (k - l)) + Fraction(high, n**l)
    return lhs > 1 + as_fraction(alpha)
