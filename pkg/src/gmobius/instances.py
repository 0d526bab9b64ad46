"""Named matroids and graphs used throughout the test suite and CLI.

Point ids for the rank-3 geometries follow the source figures: Fano points
are listed in the order 100, 010, 001, 011, 101, 110, 111 of their
homogeneous coordinates over GF(2); AG(2,3) points are (x, y) over GF(3)
with id 3x + y; the Betsy Ross ids put the center at 0, the star tips at
1..5 clockwise from the top, and the inner pentagon at 6..10.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Optional

from . import matroid as mt
from .errors import BadArgument
from .graphs import Graph, broken_trampoline, trampoline


def rank3_from_lines(n_points: int, lines: list[tuple[int, ...]]) -> mt.Matroid:
    """Rank-3 simple matroid from its nontrivial lines.

    Circuits are the collinear triples plus every 4-set with no 3 points
    on a common line.  Lines must pairwise meet in at most one point.
    """
    line_masks = []
    for line in lines:
        if len(line) < 3:
            raise BadArgument(f"line {line} has fewer than 3 points")
        if any(p < 0 or p >= n_points for p in line):
            raise BadArgument(f"line {line} out of range")
        line_masks.append(mt.to_mask(line))
    for a, b in itertools.combinations(line_masks, 2):
        if (a & b).bit_count() > 1:
            raise BadArgument("two lines share two points")
    circuits = []
    for lm in line_masks:
        for trip in itertools.combinations(mt.from_mask(lm), 3):
            circuits.append(trip)
    for quad in itertools.combinations(range(n_points), 4):
        qm = mt.to_mask(quad)
        if not any((qm & lm).bit_count() >= 3 for lm in line_masks):
            circuits.append(quad)
    return mt.from_circuits(n_points, circuits, check=True)


def fano() -> mt.Matroid:
    lines = [(0, 1, 5), (0, 2, 4), (0, 3, 6), (1, 2, 3),
             (1, 4, 6), (2, 5, 6), (3, 4, 5)]
    return rank3_from_lines(7, lines)


FANO_POINT_ORDER = (0, 1, 2, 3, 4, 5, 6)  # 100 < 010 < 001 < 011 < 101 < 110 < 111


def ag23() -> mt.Matroid:
    pts = [(x, y) for x in range(3) for y in range(3)]
    lines = []
    for (i, p), (j, q) in itertools.combinations(enumerate(pts), 2):
        r = ((-p[0] - q[0]) % 3, (-p[1] - q[1]) % 3)
        k = 3 * r[0] + r[1]
        if k > j:
            lines.append((i, j, k))
    return rank3_from_lines(9, lines)


def betsy_ross() -> mt.Matroid:
    center_lines = [(0, 1, 6), (0, 2, 7), (0, 3, 8), (0, 4, 9), (0, 5, 10)]
    star_lines = [(1, 3, 9, 10), (2, 4, 6, 10), (3, 5, 6, 7),
                  (1, 4, 7, 8), (2, 5, 8, 9)]
    return rank3_from_lines(11, center_lines + star_lines)


def whirl3() -> mt.Matroid:
    """Rank-3 whirl: 6 elements, triangles 012, 234, 045."""
    circuits = [(0, 1, 2), (2, 3, 4), (0, 4, 5),
                (0, 1, 3, 4), (0, 1, 3, 5), (0, 2, 3, 5),
                (1, 2, 3, 5), (1, 2, 4, 5), (1, 3, 4, 5)]
    return mt.from_circuits(6, circuits, check=True)


def l23() -> mt.Matroid:
    """U_{3,5} with the basis {1,2,3} demoted to a circuit."""
    circuits = [(1, 2, 3), (0, 1, 2, 4), (0, 1, 3, 4), (0, 2, 3, 4)]
    return mt.from_circuits(5, circuits, check=True)


def uniform(rank: int, n: int) -> mt.Matroid:
    if rank < 0 or n < 0:
        raise BadArgument("uniform matroid needs nonnegative parameters")
    if rank >= n:
        return mt.from_circuits(n, [], check=True)
    circuits = itertools.combinations(range(n), rank + 1)
    return mt.from_circuits(n, circuits, check=True)


def example_2_1_graph() -> Graph:
    """Two triangles glued along an edge; edge ids a..e = 0..4."""
    return Graph(4, ((0, 1), (1, 2), (0, 2), (0, 3), (2, 3)))


def cycle_matroid(g: Graph) -> mt.Matroid:
    return mt.from_graph(g.n_vertices, list(g.edges))


@dataclass(frozen=True)
class NamedInstance:
    name: str
    matroid: mt.Matroid
    graph: Optional[Graph]
    description: str


_FIXED = {
    "fano": (fano, None, "Fano plane PG(2,2), 7 points"),
    "ag23": (ag23, None, "affine plane AG(2,3), 9 points"),
    "betsy-ross": (betsy_ross, None, "Betsy Ross 11-point rank-3 geometry"),
    "whirl3": (whirl3, None, "rank-3 whirl on 6 elements"),
    "l23": (l23, None, "U_{3,5} with one basis demoted to a circuit"),
    "example-2-1": (None, example_2_1_graph,
                    "two triangles glued along an edge (5 edges)"),
}


def named_instance(name: str) -> NamedInstance:
    """Look up a named matroid or graph; graph-backed instances carry both."""
    key = name.strip().lower()
    if key in _FIXED:
        mk, gk, desc = _FIXED[key]
        g = gk() if gk else None
        m = mk() if mk else cycle_matroid(g)
        return NamedInstance(key, m, g, desc)
    m_tramp = re.fullmatch(r"(broken-)?trampoline(\d+)", key)
    if m_tramp:
        n = int(m_tramp.group(2))
        g = broken_trampoline(n) if m_tramp.group(1) else trampoline(n)
        kind = "broken trampoline" if m_tramp.group(1) else "trampoline"
        return NamedInstance(key, cycle_matroid(g), g, f"{kind} on n = {n}")
    m_unif = re.fullmatch(r"u(\d)(\d+)", key)
    if m_unif:
        r, n = int(m_unif.group(1)), int(m_unif.group(2))
        return NamedInstance(key, uniform(r, n), None, f"uniform U_{{{r},{n}}}")
    raise BadArgument(
        f"unknown instance {name!r}; try fano, ag23, betsy-ross, whirl3, "
        f"l23, example-2-1, trampolineN, broken-trampolineN, or uRN")
