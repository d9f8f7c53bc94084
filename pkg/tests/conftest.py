from __future__ import annotations

import itertools

from hypermatch.core import KPGraph, Vertex


def brute_nu(H: KPGraph) -> int:
    """Largest set of pairwise disjoint edges, by trying sizes from the top."""
    edges = sorted(H.edges)
    upper = min(H.effective_sizes) if H.k else 0
    for size in range(min(upper, len(edges)), 0, -1):
        for combo in itertools.combinations(edges, size):
            if all(len({e[c] for e in combo}) == size for c in range(H.k)):
                return size
    return 0


def brute_neighborhood(H: KPGraph, S: set[Vertex]) -> set[frozenset[Vertex]]:
    out = set()
    for e in H.edges:
        ev = {Vertex(c + 1, x) for c, x in enumerate(e)}
        if S <= ev:
            out.add(frozenset(ev - S))
    return out


def all_legal_sets(H: KPGraph, l: int):
    for classes in itertools.combinations(range(1, H.k + 1), l):
        for idx in itertools.product(*(range(H.class_sizes[c - 1]) for c in classes)):
            yield {Vertex(c, x) for c, x in zip(classes, idx)}


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])
