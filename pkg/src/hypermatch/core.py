"""k-partite k-graphs, matchings, and the primitive degree queries.

Classes are numbered ``1..k`` and vertices inside a class are dense
0-based indices, so a vertex is the pair ``Vertex(cls, index)``.  An edge
has exactly one vertex per class and is stored as the tuple of its
indices, position ``i`` holding the index of the class ``i + 1`` vertex.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import InputError, InvalidMatching

Edge = tuple[int, ...]


class Vertex(NamedTuple):
    cls: int
    index: int

    def __str__(self) -> str:
        return f"({self.cls},{self.index})"


LegalSet = frozenset  # frozenset[Vertex] with at most one vertex per class


def edge_vertices(e: Edge) -> tuple[Vertex, ...]:
    return tuple(Vertex(i + 1, x) for i, x in enumerate(e))


def vertices_to_edge(vertices: Iterable[Vertex], k: int) -> Edge:
    """Convert a legal k-set into the canonical edge tuple."""
    slots: list[int | None] = [None] * k
    for v in vertices:
        if slots[v.cls - 1] is not None:
            raise InputError(f"two vertices in class {v.cls}")
        slots[v.cls - 1] = v.index
    if any(x is None for x in slots):
        raise InputError("vertex set does not meet every class")
    return tuple(slots)  # type: ignore[arg-type]


class KPGraph:
    """An immutable k-partite k-graph with a soft-delete vertex mask.

    ``class_sizes`` are the raw sizes; deleted vertices stay addressable but
    every query behaves as if they (and all edges through them) were gone.
    Use :func:`delete_vertices` to derive masked views.
    """

    def __init__(
        self,
        class_sizes: Sequence[int],
        edges: Iterable[Sequence[int]] = (),
        deleted: Iterable[Vertex] = (),
    ):
        sizes = tuple(int(s) for s in class_sizes)
        if len(sizes) < 2:
            raise InputError("k must be at least 2")
        if any(s < 0 for s in sizes):
            raise InputError("class sizes must be nonnegative")
        self.k = len(sizes)
        self.class_sizes = sizes
        raw: set[Edge] = set()
        for e in edges:
            t = tuple(int(x) for x in e)
            if len(t) != self.k:
                raise InputError(f"edge {t} does not have exactly {self.k} vertices")
            for i, x in enumerate(t):
                if not 0 <= x < sizes[i]:
                    raise InputError(f"edge {t}: index {x} out of range for class {i + 1}")
            if t in raw:
                raise InputError(f"duplicate edge {t}")
            raw.add(t)
        self._raw_edges = frozenset(raw)
        dead = frozenset(Vertex(*v) for v in deleted)
        for v in dead:
            self.check_vertex(v)
        self.deleted = dead
        self._projections: dict[tuple[int, ...], dict[tuple[int, ...], list[Edge]]] = {}

    @classmethod
    def _derived(cls, parent: KPGraph, deleted: frozenset[Vertex]) -> KPGraph:
        g = cls.__new__(cls)
        g.k = parent.k
        g.class_sizes = parent.class_sizes
        g._raw_edges = parent._raw_edges
        g.deleted = deleted
        g._projections = {}
        return g

    def __repr__(self) -> str:
        return f"KPGraph(k={self.k}, sizes={self.effective_sizes}, edges={len(self.edges)})"

    @cached_property
    def _dead_by_class(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.k)]
        for v in self.deleted:
            out[v.cls - 1].add(v.index)
        return tuple(frozenset(s) for s in out)

    @cached_property
    def edges(self) -> frozenset[Edge]:
        if not self.deleted:
            return self._raw_edges
        dead = self._dead_by_class
        return frozenset(
            e for e in self._raw_edges if not any(x in dead[i] for i, x in enumerate(e))
        )

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def alive(self) -> tuple[tuple[int, ...], ...]:
        """Sorted live vertex indices of each class (0-based class position)."""
        dead = self._dead_by_class
        return tuple(
            tuple(x for x in range(size) if x not in dead[i])
            for i, size in enumerate(self.class_sizes)
        )

    @property
    def effective_sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.alive)

    @property
    def is_balanced(self) -> bool:
        return len(set(self.effective_sizes)) == 1

    @property
    def n(self) -> int:
        """Common effective class size; only defined for balanced graphs."""
        if not self.is_balanced:
            raise InputError(f"unbalanced class sizes {self.effective_sizes}")
        return self.effective_sizes[0]

    def vertices(self) -> Iterator[Vertex]:
        for i, idx in enumerate(self.alive):
            for x in idx:
                yield Vertex(i + 1, x)

    def check_vertex(self, v: Vertex) -> None:
        if not isinstance(v, tuple) or len(v) != 2:
            raise InputError(f"not a vertex: {v!r}")
        c, x = v
        if not 1 <= c <= self.k:
            raise InputError(f"vertex {tuple(v)}: class out of range 1..{self.k}")
        if not 0 <= x < self.class_sizes[c - 1]:
            raise InputError(f"vertex {tuple(v)}: index out of range for class {c}")

    def is_deleted(self, v: Vertex) -> bool:
        return v[1] in self._dead_by_class[v[0] - 1]

    def has_edge(self, e: Sequence[int]) -> bool:
        return tuple(e) in self.edges

    def projection(self, classes: tuple[int, ...]) -> dict[tuple[int, ...], list[Edge]]:
        """Group the live edges by their restriction to ``classes`` (1-based, sorted)."""
        proj = self._projections.get(classes)
        if proj is None:
            proj = {}
            pos = [c - 1 for c in classes]
            for e in self.sorted_edges:
                proj.setdefault(tuple(e[p] for p in pos), []).append(e)
            self._projections[classes] = proj
        return proj

    def completions(self, partial: Sequence[int | None], j: int) -> list[int]:
        """Indices ``x`` of class ``j`` such that ``partial`` plus ``(j, x)`` is an edge.

        ``partial`` has one slot per class, ``None`` at position ``j - 1``.
        """
        classes = tuple(c for c in range(1, self.k + 1) if c != j)
        key = tuple(partial[c - 1] for c in classes)
        return [e[j - 1] for e in self.projection(classes).get(key, ())]


def _as_vertices(H: KPGraph, S: Iterable[Vertex]) -> frozenset[Vertex]:
    out = frozenset(Vertex(*v) for v in S)
    for v in out:
        H.check_vertex(v)
    return out


def is_legal(H: KPGraph, S: Iterable[Vertex]) -> bool:
    S = _as_vertices(H, S)
    classes = [v.cls for v in S]
    return len(set(classes)) == len(classes) and not any(H.is_deleted(v) for v in S)


def _legal_key(H: KPGraph, S: Iterable[Vertex]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    S = _as_vertices(H, S)
    if not is_legal(H, S):
        raise InputError(f"set {sorted(S)} is not legal")
    if not 1 <= len(S) <= H.k - 1:
        raise InputError(f"legal set must have between 1 and {H.k - 1} vertices")
    ordered = sorted(S)
    return tuple(v.cls for v in ordered), tuple(v.index for v in ordered)


def neighborhood(H: KPGraph, S: Iterable[Vertex]) -> list[LegalSet]:
    """All legal sets completing ``S`` to an edge, in lexicographic order."""
    classes, key = _legal_key(H, S)
    rest = [c for c in range(1, H.k + 1) if c not in classes]
    out = [
        frozenset(Vertex(c, e[c - 1]) for c in rest)
        for e in H.projection(classes).get(key, ())
    ]
    out.sort(key=sorted)
    return out


def degree(H: KPGraph, S: Iterable[Vertex]) -> int:
    classes, key = _legal_key(H, S)
    return len(H.projection(classes).get(key, ()))


def min_l_degree(H: KPGraph, l: int) -> int:
    """Minimum degree over all legal l-sets; ``l = k - 1`` gives the co-degree."""
    if not 1 <= l <= H.k - 1:
        raise InputError(f"l must lie in 1..{H.k - 1}")
    sizes = H.effective_sizes
    if 0 in sizes:
        raise InputError(f"class {sizes.index(0) + 1} is empty")
    best: int | None = None
    for classes in itertools.combinations(range(1, H.k + 1), l):
        proj = H.projection(classes)
        total = math.prod(sizes[c - 1] for c in classes)
        low = 0 if len(proj) < total else min(len(v) for v in proj.values())
        best = low if best is None else min(best, low)
        if best == 0:
            break
    assert best is not None
    return best


def codegree(H: KPGraph) -> int:
    return min_l_degree(H, H.k - 1)


def is_independent(H: KPGraph, W: Iterable[Vertex]) -> bool:
    W = _as_vertices(H, W)
    per_class: list[set[int]] = [set() for _ in range(H.k)]
    for v in W:
        per_class[v.cls - 1].add(v.index)
    if any(not s for s in per_class):
        return True
    return not any(all(x in per_class[i] for i, x in enumerate(e)) for e in H.edges)


def link_count(H: KPGraph, x: Vertex, W: Iterable[Vertex]) -> int:
    """Number of edges through ``x`` whose other vertices all lie in ``W``."""
    x = Vertex(*x)
    H.check_vertex(x)
    W = _as_vertices(H, W)
    if x in W:
        raise InputError(f"vertex {x} lies in W")
    if H.is_deleted(x):
        return 0
    per_class: list[set[int]] = [set() for _ in range(H.k)]
    for v in W:
        per_class[v.cls - 1].add(v.index)
    c = x.cls - 1
    return sum(
        1
        for e in H.projection((x.cls,)).get((x.index,), ())
        if all(e[i] in per_class[i] for i in range(H.k) if i != c)
    )


def delete_vertices(H: KPGraph, X: Iterable[Vertex]) -> KPGraph:
    X = _as_vertices(H, X)
    if X <= H.deleted:
        return H
    return KPGraph._derived(H, H.deleted | X)


def induced(H: KPGraph, keep: Iterable[Vertex]) -> KPGraph:
    """The subgraph ``H[keep]``: every other vertex is masked."""
    keep = _as_vertices(H, keep)
    return delete_vertices(H, (v for v in H.vertices() if v not in keep))


@dataclass(frozen=True)
class Matching:
    """Pairwise disjoint edges, kept in sorted order.

    Disjointness is checked on construction; membership in a particular
    hypergraph is checked by :meth:`validate`.
    """

    edges: tuple[Edge, ...] = ()
    _covered: tuple[frozenset[int], ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        edges = tuple(sorted(tuple(e) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        if not edges:
            return
        k = len(edges[0])
        if any(len(e) != k for e in edges):
            raise InvalidMatching("edges of different arity")
        covered = []
        for i in range(k):
            col = [e[i] for e in edges]
            if len(set(col)) != len(col):
                raise InvalidMatching(f"edges share a vertex in class {i + 1}")
            covered.append(frozenset(col))
        object.__setattr__(self, "_covered", tuple(covered))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges)

    def __contains__(self, e: object) -> bool:
        return e in self.edges

    def covered(self, cls: int) -> frozenset[int]:
        if not self._covered:
            return frozenset()
        return self._covered[cls - 1]

    def vertices(self) -> frozenset[Vertex]:
        return frozenset(v for e in self.edges for v in edge_vertices(e))

    def uncovered(self, H: KPGraph) -> list[list[int]]:
        """Live, uncovered vertex indices of every class."""
        return [[x for x in H.alive[i] if x not in self.covered(i + 1)] for i in range(H.k)]

    def add(self, *edges: Edge) -> Matching:
        return Matching(self.edges + tuple(edges))

    def remove(self, *edges: Edge) -> Matching:
        drop = set(edges)
        missing = drop - set(self.edges)
        if missing:
            raise InvalidMatching(f"edges {sorted(missing)} not in matching")
        return Matching(tuple(e for e in self.edges if e not in drop))

    def union(self, *others: Matching) -> Matching:
        return Matching(self.edges + tuple(e for m in others for e in m.edges))

    def validate(self, H: KPGraph) -> None:
        for e in self.edges:
            if len(e) != H.k:
                raise InvalidMatching(f"edge {e} has wrong arity for k={H.k}")
            if e not in H.edges:
                raise InvalidMatching(f"edge {e} is not a live edge of H")

    def is_valid(self, H: KPGraph) -> bool:
        try:
            self.validate(H)
        except InvalidMatching:
            return False
        return True
