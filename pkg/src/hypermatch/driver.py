"""Top-level solver, theorem check, and threshold scans."""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .absorbing import (
    TypeJSet,
    absorb_one,
    asymptotic_floor,
    asymptotic_size_cap,
    sample_absorbing_matching,
)
from .augmenting import almost_perfect_nonextremal, greedy_maximal
from .core import KPGraph, Matching, codegree, delete_vertices
from .errors import (
    AbsorbPlanUnavailable,
    AbsorptionFailed,
    HypermatchError,
    HypothesisViolated,
    InputError,
    Stalled,
    StageFailure,
)
from .extremal import run_extremal
from .generators import GenSpec
from .oracle import DEFAULT_BUDGET, max_matching_exact, witness_search
from .textio import format_instance

log = logging.getLogger(__name__)

ROUTES = ("extremal", "nonextremal", "oracle_fallback")
SCAN_HEADER = ["k", "n", "gen", "seed", "delta", "route", "size", "nu_exact", "verdict", "ms"]


def default_fallback_cap(k: int) -> int:
    return {2: 30, 3: 9, 4: 6}.get(k, 4)


def hypothesis_met(k: int, n: int, delta: int) -> bool:
    """Integer reading of ``delta >= n/k``."""
    return delta * k >= n


@dataclass(frozen=True)
class SolveParams:
    gamma: float = 0.1
    epsilon: float = 0.2
    beta: float | None = None  # default gamma / (2 k^2)
    c: float | None = None  # default 1/k
    seed: int = 0
    strict: bool = False
    fallback_cap: int | None = None
    budget: int = DEFAULT_BUDGET
    absorb_t: int | None = None
    absorb_size_cap: int | None = None
    retries: int = 200
    route: str = "auto"

    def resolved(self, k: int) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "beta": self.beta if self.beta is not None else self.gamma / (2 * k * k),
            "c": self.c if self.c is not None else 1 / k,
            "seed": self.seed,
            "strict": self.strict,
            "fallback_cap": self.fallback_cap if self.fallback_cap is not None else default_fallback_cap(k),
        }


@dataclass
class SolveReport:
    route_taken: str
    matching: Matching
    size: int
    target: int
    n: int
    k: int
    delta: int
    hypothesis_met: bool
    stage_log: list[tuple[str, str]]
    params: dict[str, Any]
    timings: dict[str, float] = field(default_factory=dict)
    exact_fallback: bool | None = None
    evidence: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, timings: bool = False) -> dict[str, Any]:
        out = {
            "route": self.route_taken,
            "size": self.size,
            "target": self.target,
            "n": self.n,
            "k": self.k,
            "delta": self.delta,
            "hypothesis_met": self.hypothesis_met,
            "exact_fallback": self.exact_fallback,
            "params": self.params,
            "stages": [list(s) for s in self.stage_log],
            "matching": [list(e) for e in self.matching],
        }
        if timings:
            out["timings_ms"] = {k: round(v * 1000, 3) for k, v in self.timings.items()}
        return out

    def to_text(self, timings: bool = False) -> str:
        lines = [
            f"route: {self.route_taken}",
            f"size: {self.size} (target n-1 = {self.target})",
            f"co-degree: {self.delta} (hypothesis {'met' if self.hypothesis_met else 'NOT met'})",
        ]
        if self.exact_fallback is not None:
            lines.append(f"fallback exact: {self.exact_fallback}")
        lines.append("stages:")
        lines += [f"  {name}: {outcome}" for name, outcome in self.stage_log]
        if timings:
            lines.append("timings (ms):")
            lines += [f"  {k}: {v * 1000:.1f}" for k, v in self.timings.items()]
        lines.append("matching:")
        lines += ["  " + " ".join(map(str, e)) for e in self.matching]
        return "\n".join(lines) + "\n"


class _Clock:
    def __init__(self, timings: dict[str, float]):
        self.timings = timings

    def __call__(self, name: str):
        clock = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                clock.timings[name] = clock.timings.get(name, 0.0) + time.perf_counter() - self.t0
                return False

        return _Ctx()


def _absorption_loop(
    H: KPGraph, M: Matching, plan, stages: list[tuple[str, str]]
) -> Matching:
    k = H.k
    free = M.uncovered(H)
    counts = [len(f) for f in free]
    if len(set(counts)) != 1:
        raise HypothesisViolated(f"uncovered counts differ across classes: {counts}")
    start = counts[0]
    steps = 0
    while True:
        free = M.uncovered(H)
        counts = [len(f) for f in free]
        j = max(range(k), key=lambda c: (counts[c], -c)) + 1
        if counts[j - 1] <= 1:
            break
        if min(counts) == 0:
            raise AbsorptionFailed(f"cannot form a type-{j} set from uncovered counts {counts}")
        slots = tuple(f[0] for f in free)
        S = TypeJSet(j, slots, free[j - 1][1])
        M_next = absorb_one(H, M, plan, S)
        M_next.validate(H)
        drop = counts[j - 1] - len(M_next.uncovered(H)[j - 1])
        if drop != 1 or len(M_next) != len(M) + 1:
            raise HypothesisViolated("absorption did not remove exactly one uncovered vertex")
        M = M_next
        steps += 1
        if start <= k * k and steps > k * k - 1:
            raise HypothesisViolated("absorption loop ran more than k^2 - 1 times")
    stages.append(("absorb", f"ok: {steps} absorptions"))
    return M


def solve(H: KPGraph, params: SolveParams = SolveParams()) -> SolveReport:
    """Run the extremal / non-extremal dichotomy with an exact fallback.

    Never raises on algorithmic failure: every failed stage is logged and
    the run drops to the next option, ending in the oracle (or the best
    matching found, flagged inexact, above ``fallback_cap``).
    """
    if not H.is_balanced:
        raise InputError(f"solve needs equal class sizes, got {H.effective_sizes}")
    k, n = H.k, H.n
    p = params.resolved(k)
    timings: dict[str, float] = {}
    clock = _Clock(timings)
    stages: list[tuple[str, str]] = []
    target = n - 1
    with clock("codegree"):
        delta = codegree(H) if n else 0
    met = hypothesis_met(k, n, delta)
    stages.append(("hypothesis", f"delta={delta}, need delta*k >= n: {'met' if met else 'unmet'}"))
    if not met:
        log.warning("co-degree %d is below n/k = %d/%d; theorem hypothesis unmet", delta, n, k)

    best = greedy_maximal(H)
    evidence: dict[str, Any] = {}

    def report(route: str, M: Matching, exact_fallback: bool | None = None) -> SolveReport:
        M.validate(H)
        return SolveReport(
            route, M, len(M), target, n, k, delta, met, stages, p, timings, exact_fallback, evidence
        )

    route = params.route
    if route not in ("auto", "extremal", "nonextremal", "oracle"):
        raise InputError(f"unknown route {route!r}")

    witness = None
    if route in ("auto", "extremal") and k >= 3:
        with clock("witness"):
            ws = witness_search(H, p["gamma"])
        witness = ws.witness
        kind = "exact" if ws.exact else "heuristic"
        stages.append(("witness", f"found ({kind})" if witness else f"none ({kind})"))
    if witness is not None:
        try:
            with clock("extremal"):
                run = run_extremal(
                    H, witness.W, p["gamma"], p["epsilon"], strict=params.strict, budget=params.budget
                )
            stages.extend(("extremal/" + s, o) for s, o in run.stages)
            assert run.matching is not None
            if len(run.matching) >= target:
                return report("extremal", run.matching)
            best = max(best, run.matching, key=len)
        except StageFailure as exc:
            if exc.run is not None:
                stages.extend(("extremal/" + s, o) for s, o in exc.run.stages)
            else:
                stages.append(("extremal/" + exc.stage, f"failed: {exc}"))
            evidence["extremal"] = exc.evidence
        except (InputError, HypothesisViolated) as exc:
            stages.append(("extremal", f"failed: {exc}"))
    elif route in ("auto", "nonextremal") and k >= 3:
        M = _nonextremal(H, params, p, stages, evidence, clock)
        if M is not None:
            if len(M) >= target:
                return report("nonextremal", M)
            best = max(best, M, key=len)

    if n <= p["fallback_cap"] or route == "oracle":
        with clock("oracle"):
            res = max_matching_exact(H, params.budget)
        stages.append(("oracle", f"size {res.size}, {'exact' if res.exact else 'budget exhausted'}"))
        M = max(best, res.matching, key=len)
        return report("oracle_fallback", M, res.exact)
    stages.append(("oracle", f"skipped: n={n} > fallback_cap={p['fallback_cap']}; best found kept"))
    return report("oracle_fallback", best, False)


def _nonextremal(
    H: KPGraph,
    params: SolveParams,
    p: dict[str, Any],
    stages: list[tuple[str, str]],
    evidence: dict[str, Any],
    clock: _Clock,
) -> Matching | None:
    k, n = H.k, H.n
    c = Fraction(1, k) if params.c is None else params.c
    if params.strict:
        t = params.absorb_t if params.absorb_t is not None else asymptotic_floor(k, n)
        cap = params.absorb_size_cap if params.absorb_size_cap is not None else asymptotic_size_cap(k, n, c)
    else:
        t = params.absorb_t if params.absorb_t is not None else 1
        cap = params.absorb_size_cap if params.absorb_size_cap is not None else 2 * k
    try:
        with clock("absorbing_plan"):
            plan = sample_absorbing_matching(H, c, t, cap, params.seed, params.retries)
    except (AbsorbPlanUnavailable, InputError) as exc:
        stages.append(("absorbing_plan", f"failed: {exc}"))
        evidence["absorbing_plan"] = getattr(exc, "evidence", {})
        return None
    stages.append(
        ("absorbing_plan", f"ok: |M'|={len(plan.M_prime)}, min count {plan.min_count}, tries {plan.retries_used}")
    )
    H1 = delete_vertices(H, plan.M_prime.vertices())
    try:
        with clock("local_search"):
            M2 = almost_perfect_nonextremal(H1, p["beta"])
    except Stalled as exc:
        stages.append(("local_search", f"stalled: {exc}"))
        evidence["local_search"] = {k2: v for k2, v in exc.evidence.items() if k2 != "VD_minus_D"}
        return plan.M_prime.union(exc.matching)
    except InputError as exc:
        stages.append(("local_search", f"failed: {exc}"))
        return plan.M_prime
    stages.append(("local_search", f"ok: {len(M2)} edges on n'={H1.n}"))
    M = plan.M_prime.union(M2)
    try:
        with clock("absorb"):
            return _absorption_loop(H, M, plan, stages)
    except (AbsorptionFailed, HypothesisViolated) as exc:
        stages.append(("absorb", f"failed: {exc}"))
        return M


@dataclass(frozen=True)
class Verdict:
    verdict: str  # hypothesis-false | confirmed | counterexample | inconclusive
    k: int
    n: int
    delta: int
    nu: int | None
    exact: bool
    dump: str | None = None

    @property
    def is_finding(self) -> bool:
        return self.verdict in ("counterexample", "inconclusive")


def check_theorem(H: KPGraph, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Compare the co-degree hypothesis with the exact matching number."""
    k, n = H.k, H.n
    delta = codegree(H) if n else 0
    if not hypothesis_met(k, n, delta):
        return Verdict("hypothesis-false", k, n, delta, None, False)
    res = max_matching_exact(H, budget)
    if res.size >= n - 1:
        return Verdict("confirmed", k, n, delta, res.size, res.exact)
    if not res.exact:
        return Verdict("inconclusive", k, n, delta, res.size, False)
    return Verdict("counterexample", k, n, delta, res.size, True, format_instance(H))


def _scan_row(args: tuple[GenSpec, SolveParams, bool]) -> dict[str, Any]:
    spec, params, timed = args
    row: dict[str, Any] = {"k": spec.k, "n": spec.n, "gen": spec.label, "seed": spec.seed}
    t0 = time.perf_counter()
    try:
        H = spec.build()
        row["delta"] = codegree(H)
        rep = solve(H, replace(params, seed=spec.seed))
        row["route"] = rep.route_taken
        row["size"] = rep.size
        res = max_matching_exact(H, params.budget)
        row["nu_exact"] = res.size if res.exact else ""
        if not hypothesis_met(spec.k, spec.n, row["delta"]):
            row["verdict"] = "hypothesis-false"
        elif res.size >= spec.n - 1:
            row["verdict"] = "confirmed"
        else:
            row["verdict"] = "counterexample" if res.exact else "inconclusive"
    except HypermatchError as exc:
        row.setdefault("route", "error")
        row["verdict"] = f"error: {exc}"
    row["ms"] = f"{(time.perf_counter() - t0) * 1000:.1f}" if timed else ""
    return {key: row.get(key, "") for key in SCAN_HEADER}


def scan(
    grid: Iterable[GenSpec],
    params: SolveParams = SolveParams(),
    workers: int = 1,
    timings: bool = False,
) -> list[dict[str, Any]]:
    """One result row per grid entry, in grid order.

    ``ms`` stays blank unless ``timings`` is set so that repeated scans are
    byte-identical.
    """
    jobs = [(spec, params, timings) for spec in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_row, jobs))
    return [_scan_row(job) for job in jobs]


def scan_csv(rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SCAN_HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
