"""Matching toolkit for k-partite k-graphs under co-degree conditions."""

from .core import (
    KPGraph,
    Matching,
    Vertex,
    codegree,
    degree,
    delete_vertices,
    induced,
    is_independent,
    is_legal,
    link_count,
    min_l_degree,
    neighborhood,
)
from .driver import SolveParams, SolveReport, check_theorem, scan, solve
from .generators import GenSpec, gen_codegree_floor, gen_complete, gen_empty, gen_h0, gen_random
from .oracle import find_extremal_witness, max_matching_exact, pikhurko_precheck

__version__ = "0.1.0"

__all__ = [
    "GenSpec",
    "KPGraph",
    "Matching",
    "SolveParams",
    "SolveReport",
    "Vertex",
    "check_theorem",
    "codegree",
    "degree",
    "delete_vertices",
    "find_extremal_witness",
    "gen_codegree_floor",
    "gen_complete",
    "gen_empty",
    "gen_h0",
    "gen_random",
    "induced",
    "is_independent",
    "is_legal",
    "link_count",
    "max_matching_exact",
    "min_l_degree",
    "neighborhood",
    "pikhurko_precheck",
    "scan",
    "solve",
]
