"""Lex initial ideals and strong elimination orders.

An element order lists the ground set most-precedent first, and the
variable order runs the other way: earlier elements get larger
variables.  Under any such lex order the squares and circuit binomials
form a Groebner basis of the defining ideal, so the initial ideal is
the squares plus the circuit monomials that keep the most-precedent
element of their circuit.  An order is certified when every circuit of
size at least 4 is a MAT-circuit; this matches the initial ideal being
quadratic, and both tests are run against each other.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import graphs as gr
from . import matroid as mt
from .errors import BadArgument, MismatchBug, NotSimple, SizeLimit
from .gma import presentation

EXHAUSTIVE_CAP = 10


@dataclass(frozen=True)
class ElementOrder:
    """Ground-set permutation, most-precedent element first."""

    sequence: tuple[int, ...]

    def __post_init__(self):
        n = len(self.sequence)
        if sorted(self.sequence) != list(range(n)):
            raise BadArgument(f"not a permutation of 0..{n - 1}")

    @property
    def position(self) -> dict[int, int]:
        return {e: p for p, e in enumerate(self.sequence)}

    def precedes(self, e: int, f: int) -> bool:
        return self.position[e] < self.position[f]

    def as_json(self) -> list[int]:
        return list(self.sequence)


def identity_order(n: int) -> ElementOrder:
    return ElementOrder(tuple(range(n)))


# --------------------------------------------------------------------------
# lex initial ideal
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class MonomialIdealSummary:
    """Minimal monomial generators, each a sorted tuple of elements with
    repetition (squares appear as (e, e))."""

    ground_size: int
    generators: tuple[tuple[int, ...], ...]

    @property
    def degree_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for g in self.generators:
            hist[len(g)] = hist.get(len(g), 0) + 1
        return hist

    @property
    def max_degree(self) -> int:
        return max((len(g) for g in self.generators), default=0)

    def as_json(self) -> dict:
        return {
            "ground_size": self.ground_size,
            "generators": [list(g) for g in self.generators],
            "degree_histogram": {
                str(d): c for d, c in sorted(self.degree_histogram.items())},
        }


def _minimalize_monomials(monos: set[tuple[int, ...]]
                          ) -> tuple[tuple[int, ...], ...]:
    """Drop monomials divisible by another one.

    The input mixes squares (e, e) with squarefree circuit monomials, so
    squares are always minimal and squarefree divisibility is support
    containment.
    """
    squares = [m for m in monos if len(set(m)) < len(m)]
    sqfree = sorted((m for m in monos if len(set(m)) == len(m)),
                    key=lambda m: (len(m), m))
    keep_masks: list[int] = []
    keep: list[tuple[int, ...]] = []
    for m in sqfree:
        mask = mt.to_mask(m)
        if not any(k & mask == k for k in keep_masks):
            keep_masks.append(mask)
            keep.append(m)
    return tuple(sorted(squares + keep, key=lambda m: (len(m), m)))


def lex_initial_ideal(matroid: mt.Matroid, order: ElementOrder
                      ) -> MonomialIdealSummary:
    """Initial ideal of the defining ideal under the lex order induced by
    the element order: squares plus, per circuit, the monomials keeping
    the most-precedent element."""
    if not matroid.is_simple():
        raise NotSimple("lex initial ideal requires a simple matroid")
    if len(order.sequence) != matroid.ground_size:
        raise BadArgument("order length differs from the ground set")
    pos = order.position
    gens: set[tuple[int, ...]] = {(e, e) for e in range(matroid.ground_size)}
    for cmask in matroid.circuits:
        c = mt.from_mask(cmask)
        m = min(c, key=pos.__getitem__)
        for i in c:
            if i != m:
                gens.add(tuple(e for e in c if e != i))
    return MonomialIdealSummary(matroid.ground_size,
                                _minimalize_monomials(gens))


def lex_quotient_dims(matroid: mt.Matroid, order: ElementOrder
                      ) -> tuple[int, ...]:
    """Graded dimensions of S modulo the lex initial ideal.

    Standard monomials are squarefree, so this counts the subsets whose
    support contains no squarefree generator.
    """
    summary = lex_initial_ideal(matroid, order)
    sqfree = [mt.to_mask(g) for g in summary.generators if len(set(g)) == len(g)]
    n = matroid.ground_size
    rank = matroid.rank()
    dims = []
    for d in range(rank + 1):
        count = 0
        for sub in itertools.combinations(range(n), d):
            s = mt.to_mask(sub)
            if not any(q & s == q for q in sqfree):
                count += 1
        dims.append(count)
    return tuple(dims)


# --------------------------------------------------------------------------
# MAT circuits and certification
# --------------------------------------------------------------------------
def _triples_for(matroid: mt.Matroid, rest_mask: int
                 ) -> list[tuple[int, int, int]]:
    """Triangles meeting a set in exactly two elements, as (u, v, w)."""
    out = []
    for t in matroid.circuits:
        if t.bit_count() == 3 and (t & rest_mask).bit_count() == 2:
            u, v = mt.from_mask(t & rest_mask)
            (w,) = mt.from_mask(t & ~rest_mask)
            out.append((u, v, w))
    return out


def is_mat_circuit(matroid: mt.Matroid, circuit, order: ElementOrder) -> bool:
    """Whether dropping any non-minimal element leaves a set containing
    two elements that form a triangle with something later than their
    first member."""
    cmask = mt.to_mask(circuit)
    if cmask not in set(matroid.circuits):
        raise BadArgument(f"{tuple(sorted(circuit))} is not a circuit")
    if cmask.bit_count() < 4:
        raise BadArgument("MAT-circuit test applies to circuits of size >= 4")
    pos = order.position
    c = mt.from_mask(cmask)
    m = min(c, key=pos.__getitem__)
    for i in c:
        if i == m:
            continue
        rest = cmask & ~(1 << i)
        if not any(pos[w] > min(pos[u], pos[v])
                   for (u, v, w) in _triples_for(matroid, rest)):
            return False
    return True


def certify_order(matroid: mt.Matroid, order: ElementOrder) -> bool:
    """Whether every circuit of size >= 4 is a MAT-circuit for the order.

    The answer is cross-checked against the lex initial ideal being
    generated in degree <= 2; the two criteria coincide, so any
    disagreement raises MismatchBug.
    """
    if not matroid.is_simple():
        raise NotSimple("certification requires a simple matroid")
    mat_ok = all(
        is_mat_circuit(matroid, mt.from_mask(c), order)
        for c in matroid.circuits if c.bit_count() >= 4)
    lex_ok = lex_initial_ideal(matroid, order).max_degree <= 2
    if mat_ok != lex_ok:
        raise MismatchBug(
            f"MAT criterion ({mat_ok}) disagrees with the lex initial "
            f"ideal criterion ({lex_ok}) for order {order.sequence}")
    return mat_ok


# --------------------------------------------------------------------------
# search
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class SearchReport:
    outcome: str                     # "found" | "exhausted_none" | "timed_out"
    order: Optional[ElementOrder]
    orders_examined: int
    witness_circuit: Optional[tuple[int, ...]] = None
    stats: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "order": self.order.as_json() if self.order else None,
            "orders_examined": self.orders_examined,
            "witness_circuit": (list(self.witness_circuit)
                                if self.witness_circuit else None),
            "stats": self.stats,
        }


def _constraints(matroid: mt.Matroid):
    """Per circuit of size >= 4: (elements, [(i, triples) for i in C])."""
    out = []
    for cmask in sorted(matroid.circuits,
                        key=lambda m: (m.bit_count(), mt.from_mask(m))):
        if cmask.bit_count() < 4:
            continue
        c = mt.from_mask(cmask)
        per_i = [(i, _triples_for(matroid, cmask & ~(1 << i))) for i in c]
        out.append((c, per_i))
    return out


def _search_exhaustive(matroid: mt.Matroid, time_limit: Optional[float],
                       chunk: int = 8192) -> SearchReport:
    n = matroid.ground_size
    if n > EXHAUSTIVE_CAP:
        raise SizeLimit(
            f"exhaustive search capped at {EXHAUSTIVE_CAP} elements")
    cons = _constraints(matroid)
    deadline = time.monotonic() + time_limit if time_limit else None
    examined = 0
    fails = {c: 0 for (c, _) in cons}
    perms = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(perms, chunk))
        if not block:
            break
        arr = np.array(block, dtype=np.int64)
        pos = np.argsort(arr, axis=1)
        total = np.ones(arr.shape[0], dtype=bool)
        for (c, per_i) in cons:
            cpos = pos[:, list(c)]
            minpos = cpos.min(axis=1)
            sat_c = np.ones(arr.shape[0], dtype=bool)
            for (i, triples) in per_i:
                ok = pos[:, i] == minpos
                for (u, v, w) in triples:
                    ok = ok | (pos[:, w] > np.minimum(pos[:, u], pos[:, v]))
                sat_c &= ok
            fails[c] += int(arr.shape[0] - sat_c.sum())
            total &= sat_c
        hit = np.nonzero(total)[0]
        if hit.size:
            k = int(hit[0])
            order = ElementOrder(tuple(int(x) for x in arr[k]))
            if not certify_order(matroid, order):
                raise MismatchBug(
                    f"search accepted order {order.sequence} that fails "
                    f"certification")
            examined += k + 1
            return SearchReport("found", order, examined,
                                stats={"strategy": "exhaustive"})
        examined += arr.shape[0]
        if deadline and time.monotonic() > deadline:
            return SearchReport(
                "timed_out", None, examined,
                stats={"strategy": "exhaustive"})
    witness = max(fails, key=fails.get) if fails else None
    return SearchReport(
        "exhausted_none", None, examined, witness_circuit=witness,
        stats={"strategy": "exhaustive",
               "circuit_fail_counts": {str(list(k)): v
                                       for k, v in fails.items()}})


def _search_dfs(matroid: mt.Matroid, time_limit: Optional[float]
                ) -> SearchReport:
    """Prefix extension with constraint propagation.

    Each (circuit, dropped element) constraint is a disjunction of
    triples plus "the dropped element is the circuit minimum"; a triple
    dies exactly when its witness is placed before both its feet, and
    the minimum disjunct dies when another circuit element is placed
    first.  A node is pruned as soon as some constraint has no live
    disjunct, which is sound because dead disjuncts stay dead in every
    completion; a full prefix with no dead constraint is a certificate.
    """
    n = matroid.ground_size
    cons = _constraints(matroid)
    ncon = sum(len(per_i) for (_, per_i) in cons)
    sat = [False] * ncon
    min_alive = [True] * ncon
    triples: list[list[tuple[int, int, int]]] = []
    circuit_of = []
    drop_of = []
    by_witness: dict[int, list[int]] = {}
    by_circuit_elem: dict[int, list[int]] = {}
    idx = 0
    for (c, per_i) in cons:
        for (i, tri) in per_i:
            triples.append(list(tri))
            circuit_of.append(c)
            drop_of.append(i)
            for (u, v, w) in tri:
                by_witness.setdefault(w, []).append(idx)
            for e in c:
                by_circuit_elem.setdefault(e, []).append(idx)
            idx += 1
    alive_count = [len(t) for t in triples]
    placed = [False] * n
    prefix: list[int] = []
    deadline = time.monotonic() + time_limit if time_limit else None
    stats = {"nodes": 0, "pruned": 0, "strategy": "dfs_pruned"}
    fails: dict[tuple, int] = {}

    def place(x: int) -> tuple[Optional[tuple], list]:
        """Apply updates; returns (dead constraint's circuit, trail)."""
        trail = []
        dead = None
        placed[x] = True
        prefix.append(x)
        for k in by_witness.get(x, ()):
            if sat[k]:
                continue
            for (u, v, w) in triples[k]:
                if w != x:
                    continue
                if placed[u] or placed[v]:
                    sat[k] = True
                    trail.append(("sat", k))
                else:
                    alive_count[k] -= 1
                    trail.append(("tri", k))
        for k in by_circuit_elem.get(x, ()):
            if sat[k]:
                continue
            i = drop_of[k]
            if not min_alive[k]:
                continue
            if x == i:
                # i placed with the minimum disjunct still alive means no
                # other circuit element came first: i is the minimum
                sat[k] = True
                trail.append(("sat", k))
            elif not placed[i]:
                min_alive[k] = False
                trail.append(("min", k))
        for k in by_witness.get(x, ()):
            if not sat[k] and alive_count[k] == 0 and not min_alive[k]:
                dead = circuit_of[k]
                break
        if dead is None:
            for k in by_circuit_elem.get(x, ()):
                if not sat[k] and alive_count[k] == 0 and not min_alive[k]:
                    dead = circuit_of[k]
                    break
        return dead, trail

    def unplace(x: int, trail: list):
        for tag, k in reversed(trail):
            if tag == "sat":
                sat[k] = False
            elif tag == "tri":
                alive_count[k] += 1
            else:
                min_alive[k] = True
        placed[x] = False
        prefix.pop()

    result: Optional[SearchReport] = None

    def dfs() -> Optional[str]:
        nonlocal result
        stats["nodes"] += 1
        if deadline and stats["nodes"] % 4096 == 0 \
                and time.monotonic() > deadline:
            return "timeout"
        if len(prefix) == n:
            order = ElementOrder(tuple(prefix))
            if not certify_order(matroid, order):
                raise MismatchBug(
                    f"pruned search reached order {order.sequence} that "
                    f"fails certification")
            result = SearchReport("found", order, stats["nodes"],
                                  stats=dict(stats))
            return "found"
        for x in range(n):
            if placed[x]:
                continue
            dead, trail = place(x)
            if dead is None:
                out = dfs()
                if out:
                    unplace(x, trail)
                    return out
            else:
                stats["pruned"] += 1
                fails[dead] = fails.get(dead, 0) + 1
            unplace(x, trail)
        return None

    out = dfs()
    if out == "found":
        return result
    if out == "timeout":
        return SearchReport("timed_out", None, stats["nodes"],
                            stats=dict(stats))
    witness = max(fails, key=fails.get) if fails else None
    return SearchReport("exhausted_none", None, stats["nodes"],
                        witness_circuit=witness, stats=dict(stats))


def _search_graphic(matroid: mt.Matroid) -> SearchReport:
    if matroid.graph is None:
        raise BadArgument("graphic_mat strategy needs a cycle matroid "
                          "built from a graph")
    nv, edges = matroid.graph
    g = gr.Graph.build(nv, list(edges))
    elem_of = {gr._norm_edge(u, v): i for i, (u, v) in enumerate(edges)}
    seeo = gr.strong_edge_elimination_order(g)
    if seeo is None:
        return SearchReport("exhausted_none", None, 0,
                            stats={"strategy": "graphic_mat"})
    # higher MAT label means more precedent, and the elimination order
    # already lists edges that way
    sequence = tuple(elem_of[e] for e in seeo)
    order = ElementOrder(sequence)
    if not certify_order(matroid, order):
        raise MismatchBug(
            "MAT-labeling order failed certification on the cycle matroid")
    return SearchReport("found", order, 1, stats={"strategy": "graphic_mat"})


def search_strong_elimination_order(
        matroid: mt.Matroid, strategy: str = "dfs_pruned",
        time_limit: Optional[float] = None) -> SearchReport:
    """Hunt for an element order making every circuit of size >= 4 a
    MAT-circuit.  Strategies: exhaustive (all n! orders, small ground
    sets only), dfs_pruned (complete, propagates dead constraints), and
    graphic_mat (cycle matroids, order derived from a MAT-labeling)."""
    if not matroid.is_simple():
        raise NotSimple("search requires a simple matroid")
    if strategy == "exhaustive":
        return _search_exhaustive(matroid, time_limit)
    if strategy == "dfs_pruned":
        return _search_dfs(matroid, time_limit)
    if strategy == "graphic_mat":
        return _search_graphic(matroid)
    raise BadArgument(f"unknown strategy {strategy!r}")


# --------------------------------------------------------------------------
# Buchberger oracle
# --------------------------------------------------------------------------
def _lex_key(mono: tuple[int, ...], seq: tuple[int, ...]):
    """Sort key for lex with earlier elements as larger variables."""
    degs = {}
    for e in mono:
        degs[e] = degs.get(e, 0) + 1
    return tuple(degs.get(e, 0) for e in seq)


def _poly_lead(poly: dict, seq) -> tuple[int, ...]:
    return max(poly, key=lambda m: _lex_key(m, seq))


def _mono_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(a + b))


def _mono_divide(m: tuple[int, ...], d: tuple[int, ...]
                 ) -> Optional[tuple[int, ...]]:
    rest = list(m)
    for e in d:
        if e in rest:
            rest.remove(e)
        else:
            return None
    return tuple(rest)


def _reduce(poly: dict, basis: list[tuple[tuple[int, ...], dict]], seq
            ) -> dict:
    """Full multivariate division; returns the remainder."""
    rem: dict[tuple[int, ...], Fraction] = {}
    work = dict(poly)
    while work:
        lead = _poly_lead(work, seq)
        coef = work[lead]
        hit = None
        for (lm, g) in basis:
            q = _mono_divide(lead, lm)
            if q is not None:
                hit = (q, g)
                break
        if hit is None:
            rem[lead] = rem.get(lead, Fraction(0)) + coef
            del work[lead]
            continue
        q, g = hit
        glead = _poly_lead(g, seq)
        factor = coef / g[glead]
        for m, c in g.items():
            mm = _mono_mul(m, q)
            nv = work.get(mm, Fraction(0)) - factor * c
            if nv:
                work[mm] = nv
            else:
                work.pop(mm, None)
    return {m: c for m, c in rem.items() if c}


def buchberger_oracle(matroid: mt.Matroid, order: ElementOrder,
                      degree_cap: int = 4) -> bool:
    """S-pair check that squares + dependent monomials + equal-closure
    binomials form a Groebner basis under the lex order, up to the cap.

    Runs over the rationals; every S-polynomial whose lcm degree is
    within the cap must reduce to zero against the generating set.
    """
    n = matroid.ground_size
    if n > 8:
        raise SizeLimit("Buchberger oracle limited to 8 elements")
    if not matroid.is_simple():
        raise NotSimple("oracle requires a simple matroid")
    seq = order.sequence
    pres = presentation(matroid, with_closure_binomials=True)
    polys: list[dict] = []
    for e in pres.squares:
        polys.append({(e, e): Fraction(1)})
    for c in pres.stanley_reisner:
        polys.append({tuple(c): Fraction(1)})
    for (lhs, rhs) in pres.closure_binomials:
        if tuple(lhs) != tuple(rhs):
            polys.append({tuple(lhs): Fraction(1), tuple(rhs): Fraction(-1)})
    basis = [(_poly_lead(p, seq), p) for p in polys]
    for (la, ga), (lb, gb) in itertools.combinations(basis, 2):
        union = {}
        for e in la:
            union[e] = max(union.get(e, 0), la.count(e))
        for e in lb:
            union[e] = max(union.get(e, 0), lb.count(e))
        lcm = tuple(sorted(
            e for e, k in union.items() for _ in range(k)))
        if len(lcm) > degree_cap:
            continue
        if len(lcm) == len(la) + len(lb):
            continue  # coprime leading monomials
        qa = _mono_divide(lcm, la)
        qb = _mono_divide(lcm, lb)
        spoly: dict[tuple[int, ...], Fraction] = {}
        fa = ga[la]
        fb = gb[lb]
        for m, c in ga.items():
            mm = _mono_mul(m, qa)
            spoly[mm] = spoly.get(mm, Fraction(0)) + c / fa
        for m, c in gb.items():
            mm = _mono_mul(m, qb)
            spoly[mm] = spoly.get(mm, Fraction(0)) - c / fb
        spoly = {m: c for m, c in spoly.items() if c}
        if spoly and _reduce(spoly, basis, seq):
            return False
    return True
