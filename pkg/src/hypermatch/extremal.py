"""Matching assembly for graphs with a large independent set.

Given an independent set ``W`` with about ``(1 - 1/k) n`` vertices per
class, the pipeline

1. trims ``W`` to exactly ``ceil((1 - 1/k - gamma) n)`` vertices per class;
2. picks the vertices ``A_i`` outside ``W`` that link densely into ``W``
   and keeps ``a = ceil((1/k - eps) n)`` of them per class (``A'``);
3. boosts a matching ``M0'`` of ``H - A'`` and trims it so that
   ``n - |M0'| = k a``;
4. covers the leftover non-``A'``, non-``W`` vertices ``D`` greedily (``M1``);
5. balances the residual ``A'`` and ``W`` counts with ``M2``;
6. sets aside a legal k-set ``L`` and splits the rest into blocks ``F_i``,
   each matched perfectly by the exact oracle.

The result misses exactly the k vertices of ``L``.  Every stage raises
:class:`StageFailure` with the violated inequality when it cannot proceed,
which is routine at small ``n``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .core import (
    Edge,
    KPGraph,
    Matching,
    Vertex,
    codegree,
    delete_vertices,
    induced,
    link_count,
)
from .errors import HypothesisViolated, InputError, StageFailure
from .augmenting import boost_to_kr
from .oracle import DEFAULT_BUDGET, as_fraction, max_matching_exact, pikhurko_precheck

log = logging.getLogger(__name__)

PerClass = tuple[frozenset[int], ...]

# cap on candidate (k-2)- or (k-1)-tuples tried before a completion step gives up
COMBO_CAP = 20_000


def _evidence(lhs: Any, relation: str, rhs: Any, **extra: Any) -> dict[str, Any]:
    return {"lhs": lhs, "relation": relation, "rhs": rhs, **extra}


def _frac_ceil(x: Fraction) -> int:
    return math.ceil(x)


def witness_size(k: int, n: int, gamma: float) -> int:
    return _frac_ceil((1 - Fraction(1, k) - as_fraction(gamma)) * n)


def a_size(k: int, n: int, epsilon: float) -> int:
    return _frac_ceil((Fraction(1, k) - as_fraction(epsilon)) * n)


def m0_sizes(k: int, n: int, epsilon: float) -> tuple[int, int, int]:
    """``(r, s, |M0'|)`` with ``n = m k + s``, ``1 <= s <= k``."""
    r = -(-n // k) - a_size(k, n, epsilon)
    s = (n - 1) % k + 1
    return r, s, k * (r - 1) + s


def strict_constant_checks(k: int, gamma: float, epsilon: float) -> list[dict[str, Any]]:
    """Evaluate the parameter regime the extremal argument asks for."""
    g, e = as_fraction(gamma), as_fraction(epsilon)
    base = 1 - Fraction(1, k) - g
    checks = [
        ("0 < gamma < epsilon", g, "<", e, 0 < g < e),
        ("epsilon < 1/(100k^3)", e, "<", Fraction(1, 100 * k**3), e < Fraction(1, 100 * k**3)),
        ("gamma(1-1/k-gamma)^(k-1) < epsilon^2", g * base ** (k - 1), "<", e * e, g * base ** (k - 1) < e * e),
        (
            "epsilon < (1/k - 4k epsilon)^(k-1)/100",
            e,
            "<",
            (Fraction(1, k) - 4 * k * e) ** (k - 1) / 100,
            e < (Fraction(1, k) - 4 * k * e) ** (k - 1) / 100,
        ),
    ]
    return [
        {"check": name, "lhs": float(lhs), "relation": rel, "rhs": float(rhs), "ok": ok}
        for name, lhs, rel, rhs, ok in checks
    ]


@dataclass
class ExtremalRun:
    """Everything the pipeline built, kept for inspection even on failure."""

    k: int
    n: int
    gamma: float
    epsilon: float
    W: PerClass = ()
    A: PerClass = ()
    A_prime: PerClass = ()
    r: int | None = None
    s: int | None = None
    M0p: Matching = field(default_factory=Matching)
    D: PerClass = ()
    M1: Matching = field(default_factory=Matching)
    M2: Matching = field(default_factory=Matching)
    l: int | None = None
    delta_trace: list[int] = field(default_factory=list)
    f_trace: list[list[int]] = field(default_factory=list)
    degenerate: bool = False
    L: Edge | None = None
    A2: PerClass = ()
    W2: PerClass = ()
    F: list[PerClass] = field(default_factory=list)
    F_matchings: list[Matching] = field(default_factory=list)
    precheck: list[bool | None] = field(default_factory=list)
    matching: Matching | None = None
    stages: list[tuple[str, str]] = field(default_factory=list)


def _per_class(k: int, vertices) -> PerClass:
    out: list[set[int]] = [set() for _ in range(k)]
    for v in vertices:
        out[v[0] - 1].add(v[1])
    return tuple(frozenset(s) for s in out)


def _as_vertices(per: PerClass) -> frozenset[Vertex]:
    return frozenset(Vertex(c + 1, x) for c, xs in enumerate(per) for x in xs)


def trim_witness(H: KPGraph, W, gamma: float) -> PerClass:
    """Keep the lowest-indexed ``ceil((1 - 1/k - gamma) n)`` witness vertices per class."""
    k, n = H.k, H.n
    size = witness_size(k, n, gamma)
    per = _per_class(k, W)
    for c, xs in enumerate(per):
        if len(xs) < size:
            raise StageFailure(
                "trim_witness",
                f"witness has {len(xs)} vertices in class {c + 1}",
                _evidence(len(xs), ">=", size, cls=c + 1),
            )
    return tuple(frozenset(sorted(xs)[:size]) for xs in per)


def select_A_sets(
    H: KPGraph, W_trimmed: PerClass, gamma: float, epsilon: float
) -> tuple[PerClass, PerClass]:
    """Vertices outside ``W`` with many edges into ``W``, and the kept subsets ``A'``.

    ``A_i`` collects ``x`` in ``V_i - W_i`` whose link count into ``W`` is
    at least ``((1 - 1/k - gamma)^(k-1) - eps) n^(k-1)``; ``A'_i`` is its
    lowest-indexed ``ceil((1/k - eps) n)`` elements.
    """
    k, n = H.k, H.n
    g, e = as_fraction(gamma), as_fraction(epsilon)
    if Fraction(1, k) - e <= 0:
        raise InputError("epsilon must be below 1/k")
    threshold = ((1 - Fraction(1, k) - g) ** (k - 1) - e) * n ** (k - 1)
    Wv = _as_vertices(W_trimmed)
    A: list[frozenset[int]] = []
    for c in range(k):
        outside = [x for x in H.alive[c] if x not in W_trimmed[c]]
        A.append(frozenset(x for x in outside if link_count(H, Vertex(c + 1, x), Wv) >= threshold))
    need = a_size(k, n, epsilon)
    short = [c for c in range(k) if len(A[c]) < need]
    if short:
        raise StageFailure(
            "select_A_sets",
            f"too few densely linked vertices in class {short[0] + 1}",
            _evidence(
                [len(a) for a in A],
                ">=",
                need,
                link_threshold=float(threshold),
            ),
        )
    A_prime = tuple(frozenset(sorted(a)[:need]) for a in A)
    return tuple(A), A_prime


def build_M0(H: KPGraph, A_prime: PerClass, epsilon: float) -> tuple[Matching, int, int]:
    """Matching ``M0'`` of ``H - A'`` with ``n - |M0'| = k |A'_1|``; returns ``(M0', r, s)``."""
    k, n = H.k, H.n
    a = a_size(k, n, epsilon)
    if any(len(x) != a for x in A_prime):
        raise InputError(f"A' must have exactly {a} vertices per class")
    r, s, target = m0_sizes(k, n, epsilon)
    if target < 0:
        raise StageFailure(
            "build_M0",
            "k(r-1)+s is negative",
            _evidence(target, ">=", 0, r=r, s=s),
        )
    M0 = Matching()
    if r > 0:
        H_minus = delete_vertices(H, _as_vertices(A_prime))
        try:
            M0 = boost_to_kr(H_minus, r)
        except (InputError, HypothesisViolated) as exc:
            evid = _evidence(codegree(H_minus) if min(H_minus.effective_sizes) else 0, ">=", r)
            evid["detail"] = str(exc)
            raise StageFailure("build_M0", f"boost to k*r = {k * r} failed", evid) from exc
    if len(M0) < target:
        raise StageFailure("build_M0", "boosted matching too small", _evidence(len(M0), ">=", target))
    M0p = Matching(M0.edges[:target])
    n_prime = n - len(M0p)
    if n_prime != k * a:
        raise HypothesisViolated(f"n' = {n_prime} != k|A'_1| = {k * a}")
    return M0p, r, s


def _leftover(H: KPGraph, M: Matching) -> list[set[int]]:
    return [set(x for x in H.alive[c] if x not in M.covered(c + 1)) for c in range(H.k)]


def cover_D(
    H_prime: KPGraph, A_prime: PerClass, W: PerClass
) -> tuple[Matching, PerClass]:
    """Greedy matching of ``H'`` covering ``D = V(H') - A' - W``.

    Each edge contains at least one ``D`` vertex and at most one ``A'``
    vertex.  Returns ``(M1, D)``.
    """
    k = H_prime.k
    D = tuple(
        frozenset(x for x in H_prime.alive[c] if x not in A_prime[c] and x not in W[c])
        for c in range(k)
    )
    M1 = Matching()
    for c in range(k):
        for v in sorted(D[c]):
            if v in M1.covered(c + 1):
                continue
            edge = _complete_for(H_prime, M1, A_prime, c, v)
            if edge is None:
                raise StageFailure(
                    "cover_D",
                    f"no edge through D-vertex ({c + 1},{v}) avoids the current cover",
                    _evidence(0, ">", 0, vertex=(c + 1, v), covered=len(M1)),
                )
            M1 = M1.add(edge)
    for e in M1:
        nd = sum(1 for c in range(k) if e[c] in D[c])
        na = sum(1 for c in range(k) if e[c] in A_prime[c])
        if nd < 1 or na > 1:
            raise HypothesisViolated(f"M1 edge {e} has {nd} D-vertices and {na} A'-vertices")
    return M1, D


def _complete_for(
    H: KPGraph, M1: Matching, A_prime: PerClass, c: int, v: int
) -> Edge | None:
    k = H.k
    free = _leftover(H, M1)
    for j2 in [(c + 1) % k] + [x for x in range(k) if x not in (c, (c + 1) % k)]:
        pools = []
        for l in range(k):
            if l in (c, j2):
                pools.append([None])
            else:
                pools.append(sorted(x for x in free[l] if x not in A_prime[l]))
        for tried, combo in enumerate(itertools.product(*pools)):
            if tried >= COMBO_CAP:
                break
            part = list(combo)
            part[c] = v
            for x in H.completions(part, j2 + 1):
                if x in free[j2]:
                    part[j2] = x
                    return tuple(part)  # type: ignore[return-value]
    return None


def _residual_sizes(A_res: Sequence[set[int]], W_res: Sequence[set[int]]) -> list[int]:
    return [len(a) + len(w) for a, w in zip(A_res, W_res)]


def balance_M2(
    H1: KPGraph,
    A_res: PerClass,
    W_res: PerClass,
    max_size: int | None = None,
    trace: list[int] | None = None,
    f_trace: list[list[int]] | None = None,
) -> tuple[Matching, int, bool]:
    """Grow ``M2`` until ``(k-1)(sum|A| - l) = sum|W| - (k - l)`` for some ``l < k``.

    ``H1`` is ``H' - V(M1)``; ``A_res`` and ``W_res`` are the residual
    ``A'`` and ``W`` classes.  Writing ``Delta = (k-1) sum|A| - sum|W|`` and
    ``f(l) = Delta - k(l - 1)``, the loop stops at the first ``l`` with
    ``f(l) = 0``.  Otherwise it adds an edge through one residual ``A'``
    vertex in each of the classes ``1..k-1``, which lowers ``Delta`` by at
    least ``k``.  Returns ``(M2, l, degenerate)``; ``degenerate`` means
    nothing was left to balance.
    """
    k = H1.k
    A_cur = [set(a) for a in A_res]
    W_cur = [set(w) for w in W_res]
    R = Matching()
    while True:
        sizes = _residual_sizes(A_cur, W_cur)
        if len(set(sizes)) != 1:
            raise StageFailure(
                "balance_M2",
                "residual classes have different sizes",
                _evidence(sizes, "all equal", sizes[0]),
            )
        a_sum = sum(len(a) for a in A_cur)
        w_sum = sum(len(w) for w in W_cur)
        delta = (k - 1) * a_sum - w_sum
        if trace is not None:
            trace.append(delta)
        if delta < 0:
            raise StageFailure("balance_M2", "Delta went negative", _evidence(delta, ">=", 0))
        fs = [delta - k * (l - 1) for l in range(1, k)]
        if f_trace is not None:
            f_trace.append(fs)
        bad = [f for f in fs if f % k]
        if bad:
            raise HypothesisViolated(f"f(l) = {bad[0]} is not divisible by k = {k}")
        if a_sum == 0 and w_sum == 0:
            return R, 1, True
        hit = [l for l, f in zip(range(1, k), fs) if f == 0]
        if hit:
            return R, hit[0], False
        pools = [sorted(A_cur[s]) for s in range(k - 1)]
        edge = None
        for tried, combo in enumerate(itertools.product(*pools)):
            if tried >= COMBO_CAP:
                break
            part = list(combo) + [None]
            for x in H1.completions(part, k):
                if x in A_cur[k - 1] or x in W_cur[k - 1]:
                    edge = tuple(part[:-1]) + (x,)
                    break
            if edge is not None:
                break
        if edge is None:
            raise StageFailure(
                "balance_M2",
                "no residual edge through A'_1..A'_{k-1}",
                _evidence(0, ">", 0, delta=delta, size=len(R)),
            )
        R = R.add(edge)
        for c, x in enumerate(edge):
            A_cur[c].discard(x)
            W_cur[c].discard(x)
        new_delta = (k - 1) * sum(len(a) for a in A_cur) - sum(len(w) for w in W_cur)
        if new_delta > delta - k:
            raise HypothesisViolated(f"Delta fell from {delta} to only {new_delta}")
        if max_size is not None and len(R) > max_size:
            raise StageFailure(
                "balance_M2", "|M2| exceeds |M1|", _evidence(len(R), "<=", max_size)
            )


def choose_L(A_res: PerClass, W_res: PerClass, l: int) -> Edge:
    """Lowest legal k-set with ``l`` residual ``A'`` vertices (lowest classes first)."""
    k = len(A_res)
    for a_classes in itertools.combinations(range(k), l):
        if all(A_res[c] if c in a_classes else W_res[c] for c in range(k)):
            return tuple(min(A_res[c]) if c in a_classes else min(W_res[c]) for c in range(k))
    raise StageFailure(
        "choose_L",
        f"no legal k-set with exactly {l} residual A'-vertices",
        _evidence([len(a) for a in A_res], "nonempty in some l classes", l),
    )


def partition_F(A2: PerClass, W2: PerClass) -> list[PerClass]:
    """Split the residual vertices into blocks ``F_1..F_k``.

    ``F_i`` takes ``A''_i`` in class ``i`` and the lowest ``|A''_i|``
    unassigned ``W''`` vertices of every other class.
    """
    k = len(A2)
    sizes = [len(a) for a in A2]
    n2 = sum(sizes)
    if (k - 1) * n2 != sum(len(w) for w in W2):
        raise StageFailure(
            "partition_F",
            "(k-1) sum|A''| != sum|W''|",
            _evidence((k - 1) * n2, "==", sum(len(w) for w in W2)),
        )
    for i in range(k):
        other = n2 - sizes[i]
        if len(W2[i]) != other:
            raise StageFailure(
                "partition_F",
                f"|W''_{i + 1}| != sum of the other |A''_j|",
                _evidence(len(W2[i]), "==", other, cls=i + 1),
            )
    pools = [sorted(w) for w in W2]
    pos = [0] * k
    blocks: list[PerClass] = []
    for i in range(k):
        block: list[frozenset[int]] = []
        for j in range(k):
            if j == i:
                block.append(frozenset(A2[i]))
            else:
                block.append(frozenset(pools[j][pos[j] : pos[j] + sizes[i]]))
                pos[j] += sizes[i]
        blocks.append(tuple(block))
    return blocks


def run_extremal(
    H: KPGraph,
    W,
    gamma: float = 0.1,
    epsilon: float = 0.2,
    strict: bool = False,
    budget: int = DEFAULT_BUDGET,
    alpha: float = 0.1,
) -> ExtremalRun:
    """Assemble a matching of size ``n - 1`` from an independent set ``W``.

    Raises :class:`StageFailure` (carrying the partial run) when a stage
    cannot be completed.
    """
    k = H.k
    if k < 3:
        raise InputError("the extremal route needs k >= 3")
    n = H.n
    if strict:
        failed = [c for c in strict_constant_checks(k, gamma, epsilon) if not c["ok"]]
        if failed:
            raise InputError(f"strict constants rejected: {failed[0]['check']}")
    run = ExtremalRun(k, n, gamma, epsilon)

    def stage(name: str, fn, *args, **kwargs):
        try:
            out = fn(*args, **kwargs)
        except StageFailure as exc:
            exc.run = run
            run.stages.append((name, f"failed: {exc}"))
            raise
        run.stages.append((name, "ok"))
        return out

    run.W = stage("trim_witness", trim_witness, H, W, gamma)
    run.A, run.A_prime = stage("select_A_sets", select_A_sets, H, run.W, gamma, epsilon)
    run.M0p, run.r, run.s = stage("build_M0", build_M0, H, run.A_prime, epsilon)
    H_prime = delete_vertices(H, run.M0p.vertices())
    run.M1, run.D = stage("cover_D", cover_D, H_prime, run.A_prime, run.W)

    H1 = delete_vertices(H_prime, run.M1.vertices())
    A_res = tuple(frozenset(x for x in H1.alive[c] if x in run.A_prime[c]) for c in range(k))
    W_res = tuple(frozenset(x for x in H1.alive[c] if x in run.W[c]) for c in range(k))
    run.M2, run.l, run.degenerate = stage(
        "balance_M2",
        balance_M2,
        H1,
        A_res,
        W_res,
        len(run.M1),
        run.delta_trace,
        run.f_trace,
    )
    base = run.M0p.union(run.M1, run.M2)
    if run.degenerate:
        run.matching = base
        base.validate(H)
        run.stages.append(("assemble", "ok: nothing left after M0', M1"))
        return run

    H2 = delete_vertices(H1, run.M2.vertices())
    A_res2 = tuple(frozenset(x for x in H2.alive[c] if x in A_res[c]) for c in range(k))
    W_res2 = tuple(frozenset(x for x in H2.alive[c] if x in W_res[c]) for c in range(k))
    run.L = stage("choose_L", choose_L, A_res2, W_res2, run.l)
    run.A2 = tuple(a - {run.L[c]} for c, a in enumerate(A_res2))
    run.W2 = tuple(w - {run.L[c]} for c, w in enumerate(W_res2))
    run.F = stage("partition_F", partition_F, run.A2, run.W2)

    for i, block in enumerate(run.F):
        size = len(block[i])
        if size == 0:
            run.F_matchings.append(Matching())
            run.precheck.append(None)
            continue
        sub = induced(H, _as_vertices(block))
        run.precheck.append(pikhurko_precheck(sub, 1, alpha))
        res = max_matching_exact(sub, budget)
        if res.size < size:
            failure = StageFailure(
                "F_matching",
                f"block F_{i + 1} has no perfect matching",
                _evidence(res.size, ">=", size, block=i + 1, exact=res.exact),
                run,
            )
            run.stages.append(("F_matching", f"failed: {failure}"))
            raise failure
        run.F_matchings.append(res.matching)
    run.stages.append(("F_matching", "ok"))

    final = base.union(*run.F_matchings)
    final.validate(H)
    missed = [set(x) for x in final.uncovered(H)]
    if len(final) != n - 1 or any(missed[c] != {run.L[c]} for c in range(k)):
        raise HypothesisViolated("assembled matching does not miss exactly L")
    run.matching = final
    run.stages.append(("assemble", f"ok: {len(final)} edges"))
    return run
