"""Instance factories.

Randomness comes from numpy's Philox counter-based generator.  Every
random draw uses a named stream: the stream for ``(seed, stream_id)`` is
``Philox(SeedSequence([seed, stream_id]))``, where stream 0 samples edges
and stream 1 drives the co-degree repair pass.  Identical
``(GenSpec, seed)`` pairs therefore give identical instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import KPGraph
from .errors import InputError

EDGE_STREAM = 0
REPAIR_STREAM = 1

KINDS = ("h0", "complete", "empty", "random", "codegree_floor")


def philox(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


def h0_core_size(k: int, n: int) -> int:
    """Size of each low-index block ``U_i`` in the space-barrier construction."""
    return (n - 1) // k


def gen_h0(k: int, n: int) -> KPGraph:
    """All legal k-sets meeting the union of the first ``(n-1)//k`` indices of each class."""
    if not n >= k >= 2:
        raise InputError("gen_h0 needs n >= k >= 2")
    u = h0_core_size(k, n)
    edges = (e for e in itertools.product(range(n), repeat=k) if min(e) < u)
    return KPGraph([n] * k, edges)


def gen_complete(k: int, n: int) -> KPGraph:
    return KPGraph([n] * k, itertools.product(range(n), repeat=k))


def gen_empty(k: int, n: int) -> KPGraph:
    return KPGraph([n] * k)


def gen_random(k: int, n: int, p: float, seed: int) -> KPGraph:
    """Include each legal k-set independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise InputError("p must lie in [0, 1]")
    draws = philox(seed, EDGE_STREAM).random(n**k)
    cells = itertools.product(range(n), repeat=k)
    return KPGraph([n] * k, (e for e, u in zip(cells, draws) if u < p))


def gen_codegree_floor(k: int, n: int, d_min: int, seed: int) -> KPGraph:
    """Random instance with every legal (k-1)-set of degree at least ``d_min``.

    Starts from ``gen_random`` at density ``d_min / n``; then every deficient
    (k-1)-set, visited in (missing class, indices) order, receives uniformly
    chosen missing completions drawn without replacement.
    """
    if not 0 <= d_min <= n:
        raise InputError("d_min must lie in 0..n")
    if n == 0:
        return gen_empty(k, n)
    base = gen_random(k, n, d_min / n, seed)
    edges = set(base.edges)
    rng = philox(seed, REPAIR_STREAM)
    for j in range(k):
        for rest in itertools.product(range(n), repeat=k - 1):
            present = [x for x in range(n) if rest[:j] + (x,) + rest[j:] in edges]
            short = d_min - len(present)
            if short <= 0:
                continue
            have = set(present)
            missing = [x for x in range(n) if x not in have]
            for x in sorted(rng.choice(missing, size=short, replace=False).tolist()):
                edges.add(rest[:j] + (x,) + rest[j:])
    return KPGraph([n] * k, edges)


@dataclass(frozen=True)
class GenSpec:
    kind: str
    k: int
    n: int
    p: float | None = None
    d_min: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InputError(f"unknown generator kind {self.kind!r}")
        if self.kind == "random" and self.p is None:
            raise InputError("random instances need p")
        if self.kind == "codegree_floor" and self.d_min is None:
            raise InputError("codegree_floor instances need d_min")

    def build(self) -> KPGraph:
        if self.kind == "h0":
            return gen_h0(self.k, self.n)
        if self.kind == "complete":
            return gen_complete(self.k, self.n)
        if self.kind == "empty":
            return gen_empty(self.k, self.n)
        if self.kind == "random":
            return gen_random(self.k, self.n, self.p, self.seed)  # type: ignore[arg-type]
        return gen_codegree_floor(self.k, self.n, self.d_min, self.seed)  # type: ignore[arg-type]

    @property
    def label(self) -> str:
        """Short generator description used in scan rows."""
        if self.kind == "random":
            return f"random:p={self.p}"
        if self.kind == "codegree_floor":
            return f"codegree_floor:d_min={self.d_min}"
        return self.kind

    def header(self) -> str:
        parts = [f"kind={self.kind}", f"k={self.k}", f"n={self.n}"]
        if self.p is not None:
            parts.append(f"p={self.p}")
        if self.d_min is not None:
            parts.append(f"d_min={self.d_min}")
        parts.append(f"seed={self.seed}")
        parts.append("prng=philox4x64")
        return "# genspec: " + " ".join(parts)

    @classmethod
    def from_header(cls, line: str) -> GenSpec:
        body = line.split("genspec:", 1)[1]
        fields = dict(tok.split("=", 1) for tok in body.split())
        return cls(
            kind=fields["kind"],
            k=int(fields["k"]),
            n=int(fields["n"]),
            p=float(fields["p"]) if "p" in fields else None,
            d_min=int(fields["d_min"]) if "d_min" in fields else None,
            seed=int(fields.get("seed", 0)),
        )
