"""Readers and writers for the documented JSON schemas.

Matroids travel as {"ground": n, "circuits": [[ints]]}, graphs as
{"vertices": n, "edges": [[u, v]]}. Lattices export to JSON and DOT,
labelings and orders to small JSON lists. Loading validates against the
matroid axioms and raises ParseError on malformed documents.
"""
from __future__ import annotations

import json
from typing import Optional

from . import matroid as mt
from .errors import BadArgument, ParseError
from .graphs import Graph


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParseError(msg)


def matroid_to_json(matroid: mt.Matroid) -> dict:
    return {"ground": matroid.ground_size,
            "circuits": [list(mt.from_mask(c))
                         for c in sorted(matroid.circuits)]}


def matroid_from_json(doc: dict) -> mt.Matroid:
    _require(isinstance(doc, dict), "matroid document must be an object")
    _require("ground" in doc and "circuits" in doc,
             'matroid document needs "ground" and "circuits"')
    n = doc["ground"]
    circuits = doc["circuits"]
    _require(isinstance(n, int) and n >= 0, '"ground" must be a nonnegative '
             "integer")
    _require(isinstance(circuits, list) and all(
        isinstance(c, list) and all(isinstance(e, int) for e in c)
        for c in circuits), '"circuits" must be a list of integer lists')
    try:
        return mt.from_circuits(n, circuits, check=True)
    except BadArgument as exc:
        raise ParseError(str(exc)) from exc


def graph_to_json(g: Graph) -> dict:
    return {"vertices": g.n_vertices, "edges": [list(e) for e in g.edges]}


def graph_from_json(doc: dict) -> Graph:
    _require(isinstance(doc, dict), "graph document must be an object")
    _require("vertices" in doc and "edges" in doc,
             'graph document needs "vertices" and "edges"')
    n = doc["vertices"]
    edges = doc["edges"]
    _require(isinstance(n, int) and n >= 0,
             '"vertices" must be a nonnegative integer')
    _require(isinstance(edges, list) and all(
        isinstance(e, list) and len(e) == 2
        and all(isinstance(v, int) for v in e) for e in edges),
        '"edges" must be a list of [u, v] pairs')
    try:
        return Graph.build(n, [tuple(e) for e in edges])
    except (BadArgument, ValueError) as exc:
        raise ParseError(str(exc)) from exc


def load_document(path: str) -> dict:
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), f"{path}: top level must be an object")
    return doc


def load_instance(path: str) -> tuple[mt.Matroid, Optional[Graph]]:
    """Load a matroid or graph file; graphs also yield their cycle
    matroid."""
    doc = load_document(path)
    if "vertices" in doc:
        g = graph_from_json(doc)
        return mt.from_graph(g.n_vertices, list(g.edges)), g
    if "ground" in doc:
        return matroid_from_json(doc), None
    raise ParseError(f"{path}: expected a matroid or graph document")


def lattice_to_json(lat: mt.FlatLattice) -> dict:
    return {"flats": [{"elements": list(mt.from_mask(f)),
                       "rank": lat.rank_of[i]}
                      for i, f in enumerate(lat.flats)],
            "whitney": list(lat.whitney())}


def lattice_to_dot(lat: mt.FlatLattice) -> str:
    """Hasse diagram; one node per flat labeled by element set and rank."""
    lines = ["digraph flats {", "  rankdir=BT;"]
    for i, f in enumerate(lat.flats):
        elems = ",".join(str(e) for e in mt.from_mask(f))
        lines.append(f'  n{i} [label="{{{elems}}} r{lat.rank_of[i]}"];')
    for i, f in enumerate(lat.flats):
        ri = lat.rank_of[i]
        for k, g in enumerate(lat.flats):
            if lat.rank_of[k] == ri + 1 and f & g == f:
                lines.append(f"  n{i} -> n{k};")
    lines.append("}")
    return "\n".join(lines)


def mat_labeling_to_json(label: dict) -> list[dict]:
    return [{"edge": list(e), "label": k}
            for e, k in sorted(label.items())]


def edge_order_to_json(order: list[tuple[int, int]]) -> list[list[int]]:
    return [list(e) for e in order]


def parse_element_order(text: str, ground_size: int):
    """Comma-separated element ids, most significant first."""
    from .groebner import ElementOrder
    try:
        seq = tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError as exc:
        raise ParseError(f"order must be comma-separated integers: {text!r}"
                         ) from exc
    if sorted(seq) != list(range(ground_size)):
        raise ParseError(f"order must be a permutation of 0..{ground_size - 1}")
    return ElementOrder(seq)


__all__ = [
    "matroid_to_json", "matroid_from_json", "graph_to_json",
    "graph_from_json", "load_document", "load_instance", "lattice_to_json",
    "lattice_to_dot", "mat_labeling_to_json", "edge_order_to_json",
    "parse_element_order",
]
