"""Constructive matching growth.

``boost_to_kr`` runs the pigeonhole exchange that turns co-degree ``r``
into a matching of size ``k*r``.  The non-extremal local search inverts
the exchange argument for ``n - k**2`` matchings: it keeps ``k**2``
disjoint helper sets ``A[i, j]`` of uncovered vertices (``A[i, j]`` misses
class ``j``) and applies whichever augmentation move is available.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .core import Edge, KPGraph, Matching, Vertex, codegree, edge_vertices
from .errors import HypothesisViolated, InputError, InvalidMatching, NoAugment, Stalled, TooClose
from .oracle import as_fraction

log = logging.getLogger(__name__)

Partial = tuple  # one slot per class, None in the class still to be filled


def _fill(partial: Sequence[int | None], j: int, x: int) -> Edge:
    out = list(partial)
    out[j - 1] = x
    return tuple(out)  # type: ignore[return-value]


def greedy_maximal(H: KPGraph, start: Matching | None = None) -> Matching:
    """Extend ``start`` by scanning the edges in lexicographic order."""
    used = [set(start.covered(c + 1)) if start else set() for c in range(H.k)]
    picked = list(start.edges) if start else []
    for e in H.sorted_edges:
        if all(x not in used[c] for c, x in enumerate(e)):
            picked.append(e)
            for c, x in enumerate(e):
                used[c].add(x)
    return Matching(tuple(picked))


def boost_to_kr(
    H: KPGraph,
    r: int,
    start: Matching | None = None,
    trace: list[int] | None = None,
) -> Matching:
    """Grow a matching to at least ``k*r`` edges.

    Needs a balanced ``H`` with ``n >= k*r + k - 1`` and co-degree at least
    ``r``.  Every pass picks k disjoint uncovered (k-1)-sets ``f_i``
    avoiding class ``i``.  A free completion extends the matching
    directly; otherwise two of the ``f_i`` complete into the same matching
    edge, which is swapped for the two new edges.  ``trace`` receives the
    matching size after each pass.
    """
    k = H.k
    if r < 0:
        raise InputError("r must be nonnegative")
    if r == 0:
        return Matching()
    n = H.n
    if n < k * r + k - 1:
        raise InputError(f"n={n} < k*r + k - 1 = {k * r + k - 1}")
    delta = codegree(H)
    if delta < r:
        raise InputError(f"co-degree {delta} < r={r}")
    M = start if start is not None else Matching()
    M.validate(H)
    target = k * r
    while len(M) < target:
        before = len(M)
        free = M.uncovered(H)
        pos = [0] * k
        fs: list[list[int | None]] = []
        for i in range(k):
            f: list[int | None] = [None] * k
            for c in range(k):
                if c != i:
                    f[c] = free[c][pos[c]]
                    pos[c] += 1
            fs.append(f)
        nbrs = [H.completions(fs[i], i + 1) for i in range(k)]
        direct = None
        for i in range(k):
            spare = [x for x in nbrs[i] if x not in M.covered(i + 1)]
            if spare:
                direct = _fill(fs[i], i + 1, spare[0])
                break
        if direct is not None:
            M = M.add(direct)
        else:
            nbr_sets = [set(s) for s in nbrs]
            for e in M:
                hits = [i for i in range(k) if e[i] in nbr_sets[i]]
                if len(hits) >= 2:
                    a, b = hits[0], hits[1]
                    M = M.remove(e).add(_fill(fs[a], a + 1, e[a]), _fill(fs[b], b + 1, e[b]))
                    break
            else:
                raise HypothesisViolated(
                    f"pigeonhole step failed: sum of neighborhood sizes "
                    f"{sum(len(s) for s in nbrs)} vs |M| = {len(M)}"
                )
        if len(M) <= before:
            raise HypothesisViolated("boost pass did not grow the matching")
        if trace is not None:
            trace.append(len(M))
    return M


@dataclass(frozen=True)
class AugState:
    """Helper sets and degree classes around a matching ``M``.

    ``A[(i, j)]`` is a partial edge of uncovered vertices with ``None`` in
    class ``j``.  ``C[j-1]`` holds class-j vertices completing some
    ``A[(i, j)]``, ``D[j-1]`` those completing all of them.  ``V_D`` is the
    vertex set of the matching edges meeting ``D``.
    """

    M: Matching
    U: tuple[frozenset[int], ...]
    A: dict[tuple[int, int], Partial]
    nbrs: dict[tuple[int, int], frozenset[int]]
    C: tuple[frozenset[int], ...]
    D: tuple[frozenset[int], ...]
    V_D: frozenset[Vertex]

    @property
    def k(self) -> int:
        return len(self.U)

    def check(self) -> None:
        """Re-verify the structural invariants; raises HypothesisViolated."""
        k = self.k
        seen: set[Vertex] = set()
        for (i, j), part in self.A.items():
            if part[j - 1] is not None:
                raise HypothesisViolated(f"A[{i},{j}] meets class {j}")
            for c, x in enumerate(part):
                if c == j - 1:
                    continue
                v = Vertex(c + 1, x)
                if v in seen or x not in self.U[c]:
                    raise HypothesisViolated(f"A[{i},{j}] not disjoint or not uncovered")
                seen.add(v)
        for c in range(k):
            if not self.D[c] <= self.C[c]:
                raise HypothesisViolated(f"D_{c + 1} not inside C_{c + 1}")
        expect = frozenset(
            v for e in self.M if any(e[c] in self.D[c] for c in range(k)) for v in edge_vertices(e)
        )
        if expect != self.V_D:
            raise HypothesisViolated("V_D does not match the edges meeting D")


def build_aug_state(H: KPGraph, M: Matching) -> AugState:
    """Place the ``k**2`` helper sets greedily and compute C, D and V_D.

    Raises :class:`TooClose` unless every class keeps more than ``k**2``
    uncovered vertices; at that point ``|M| >= n - k**2`` already.
    """
    k = H.k
    free = M.uncovered(H)
    need = k * k + 1
    if any(len(f) < need for f in free):
        raise TooClose(
            f"need more than k^2 = {k * k} uncovered vertices per class",
            [len(f) for f in free],
            need,
        )
    pos = [0] * k
    A: dict[tuple[int, int], Partial] = {}
    for j in range(1, k + 1):
        for i in range(1, k + 1):
            part: list[int | None] = [None] * k
            for c in range(k):
                if c != j - 1:
                    part[c] = free[c][pos[c]]
                    pos[c] += 1
            A[(i, j)] = tuple(part)
    nbrs = {key: frozenset(H.completions(part, key[1])) for key, part in A.items()}
    C = tuple(frozenset().union(*(nbrs[(i, j)] for i in range(1, k + 1))) for j in range(1, k + 1))
    D = tuple(frozenset.intersection(*(nbrs[(i, j)] for i in range(1, k + 1))) for j in range(1, k + 1))
    V_D = frozenset(
        v for e in M if any(e[c] in D[c] for c in range(k)) for v in edge_vertices(e)
    )
    state = AugState(M, tuple(frozenset(f) for f in free), A, nbrs, C, D, V_D)
    state.check()
    return state


class Augmented(NamedTuple):
    matching: Matching
    move: str


def _first_edge_inside(H: KPGraph, allowed: Sequence[frozenset[int] | set[int]]) -> Edge | None:
    for e in H.sorted_edges:
        if all(x in allowed[c] for c, x in enumerate(e)):
            return e
    return None


def nonextremal_step(H: KPGraph, state: AugState) -> Augmented:
    """Enlarge ``state.M`` by one edge or raise :class:`NoAugment`.

    Moves, in order: (i) add an edge lying entirely in the uncovered set;
    (ii) a matching edge meeting C twice is replaced by two edges built
    from helper sets; (iii) an edge ``e0`` inside ``V_D - D`` is added
    after every matching edge it meets is traded for a helper-set edge
    through that edge's D-vertex.
    """
    k = H.k
    M = state.M
    e = _first_edge_inside(H, state.U)
    if e is not None:
        return Augmented(M.add(e), "uncovered-edge")

    for e in M:
        hit = [c for c in range(k) if e[c] in state.C[c]]
        if len(hit) >= 2:
            new = []
            for c in hit[:2]:
                j = c + 1
                i = min(i for i in range(1, k + 1) if e[c] in state.nbrs[(i, j)])
                new.append(_fill(state.A[(i, j)], j, e[c]))
            try:
                return Augmented(M.remove(e).add(*new), "two-edge-swap")
            except InvalidMatching as exc:
                raise HypothesisViolated(f"two-edge swap produced an invalid matching: {exc}") from exc

    outside = [set() for _ in range(k)]
    for v in state.V_D:
        if v.index not in state.D[v.cls - 1]:
            outside[v.cls - 1].add(v.index)
    e0 = _first_edge_inside(H, outside)
    if e0 is not None:
        released = [e for e in M if any(e[c] == e0[c] for c in range(k))]
        taken: dict[int, set[int]] = {j: set() for j in range(1, k + 1)}
        new = []
        for e in released:
            dcls = [c for c in range(k) if e[c] in state.D[c]]
            if len(dcls) != 1:
                raise HypothesisViolated(f"edge {e} meets D in {len(dcls)} vertices")
            j = dcls[0] + 1
            free_i = [i for i in range(1, k + 1) if i not in taken[j]]
            if not free_i:
                raise HypothesisViolated(f"ran out of helper sets avoiding class {j}")
            i = free_i[0]
            taken[j].add(i)
            new.append(_fill(state.A[(i, j)], j, e[j - 1]))
        try:
            out = M.remove(*released).add(*new, e0)
        except InvalidMatching as exc:
            raise HypothesisViolated(f"e0 exchange produced an invalid matching: {exc}") from exc
        if len(out) != len(M) + 1:
            raise HypothesisViolated("e0 exchange did not add exactly one edge")
        return Augmented(out, "e0-exchange")

    raise NoAugment(
        "no augmentation move applies",
        {
            "failed_move": "e0-exchange",
            "C_sizes": [len(c) for c in state.C],
            "D_sizes": [len(d) for d in state.D],
            "VD_minus_D_sizes": [len(s) for s in outside],
            "VD_minus_D": sorted(Vertex(c + 1, x) for c in range(k) for x in outside[c]),
        },
    )


def almost_perfect_nonextremal(
    H: KPGraph, beta: float, trace: list[str] | None = None
) -> Matching:
    """Local search for a matching of size at least ``n - k**2``.

    Starts from the greedy maximal matching and applies
    :func:`nonextremal_step` until the target is met.  Raises
    :class:`Stalled` with the failing move and the sizes of every ``C_j``
    and ``D_j`` next to the bounds ``(1 + (k-1)beta) n/k`` and
    ``(1 - k^2 beta) n/k`` they obey under the non-extremal hypothesis.
    """
    k = H.k
    b = as_fraction(beta)
    if not 0 < b < Fraction(1, 2 * k * k):
        raise InputError(f"beta must lie in (0, 1/(2k^2)) = (0, {1 / (2 * k * k):.4g})")
    n = H.n
    target = n - k * k
    M = greedy_maximal(H)
    while len(M) < target:
        state = build_aug_state(H, M)
        try:
            M, move = nonextremal_step(H, state)
        except NoAugment as exc:
            ev = dict(exc.evidence)
            ev["C_upper_bound"] = float((1 + (k - 1) * b) * Fraction(n, k))
            ev["D_lower_bound"] = float((1 - k * k * b) * Fraction(n, k))
            ev["size"] = len(M)
            ev["target"] = target
            log.info("local search stalled at %d < %d", len(M), target)
            raise Stalled(f"stalled at {len(M)} < {target}", M, ev) from exc
        M.validate(H)
        if trace is not None:
            trace.append(move)
    return M
