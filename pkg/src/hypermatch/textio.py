"""Plain-text instance format.

Line 1 is ``k n_1 ... n_k``; every later non-blank line that does not start
with ``#`` lists one edge as k class-local indices.  Comment lines are kept
so a ``# genspec: ...`` header survives a round trip.
"""

from __future__ import annotations

from pathlib import Path

from .core import KPGraph
from .errors import InputError


def parse_instance(text: str) -> tuple[KPGraph, list[str]]:
    """Parse instance text, returning the graph and its comment lines."""
    comments: list[str] = []
    header: list[int] | None = None
    edges: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        try:
            nums = [int(tok) for tok in line.split()]
        except ValueError:
            raise InputError(f"line {lineno}: expected integers, got {line!r}") from None
        if header is None:
            if not nums or nums[0] < 2 or len(nums) != nums[0] + 1:
                raise InputError(f"line {lineno}: header must be 'k n_1 ... n_k' with k >= 2")
            header = nums
            continue
        k = header[0]
        if len(nums) != k:
            raise InputError(f"line {lineno}: edge needs {k} indices, got {len(nums)}")
        e = tuple(nums)
        if e in seen:
            raise InputError(f"line {lineno}: duplicate edge {e}")
        seen.add(e)
        edges.append(e)
    if header is None:
        raise InputError("missing header line")
    try:
        H = KPGraph(header[1:], edges)
    except InputError as exc:
        raise InputError(f"invalid instance: {exc}") from None
    return H, comments


def format_instance(H: KPGraph, comments: list[str] | None = None) -> str:
    """Serialize the live edges of ``H``; masked vertices keep their indices."""
    lines = [c if c.startswith("#") else f"# {c}" for c in comments or []]
    lines.append(" ".join(str(x) for x in (H.k, *H.class_sizes)))
    lines.extend(" ".join(map(str, e)) for e in H.sorted_edges)
    return "\n".join(lines) + "\n"


def load_instance(path: str | Path) -> tuple[KPGraph, list[str]]:
    return parse_instance(Path(path).read_text())


def save_instance(H: KPGraph, path: str | Path, comments: list[str] | None = None) -> None:
    Path(path).write_text(format_instance(H, comments))
