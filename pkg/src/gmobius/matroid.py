"""Matroids on ground sets of at most 64 elements, subsets as int bitmasks.

A matroid is stored by its circuit list (each circuit an int bitmask).
Construction checks the circuit axioms: incomparability always, circuit
elimination exhaustively for |E| <= 20 and on a random sample above that.
Graphic matroids carry their graph so rank and closure run through a
union-find oracle instead of the circuit scan.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (AxiomViolation, BadArgument, MismatchBug, NotSimple,
                     SizeLimit)

MAX_GROUND = 64
ELIM_EXHAUSTIVE_MAX = 20
ELIM_SAMPLES = 4000


def to_mask(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << e
    return m


def from_mask(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        b = mask & -mask
        out.append(b.bit_length() - 1)
        mask ^= b
    return tuple(out)


def iter_bits(mask: int):
    while mask:
        b = mask & -mask
        yield b.bit_length() - 1
        mask ^= b


@dataclass(frozen=True)
class Matroid:
    """Circuit-presented matroid; use from_circuits / from_graph to build."""

    ground_size: int
    circuits: tuple[int, ...]
    graph: Optional[tuple[int, tuple[tuple[int, int], ...]]] = field(
        default=None, compare=False)

    @property
    def ground_mask(self) -> int:
        return (1 << self.ground_size) - 1

    @property
    def loops(self) -> tuple[int, ...]:
        return tuple(from_mask(c)[0] for c in self.circuits
                     if c.bit_count() == 1)

    @property
    def parallel_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(from_mask(c) for c in self.circuits
                     if c.bit_count() == 2)

    def is_simple(self) -> bool:
        return all(c.bit_count() >= 3 for c in self.circuits)

    # -- oracles ---------------------------------------------------------

    def is_independent(self, mask: int) -> bool:
        for c in self.circuits:
            if c & mask == c:
                return False
        return True

    def basis_of(self, mask: int) -> int:
        """Greedy maximal independent subset of mask (lowest elements first)."""
        if self.graph is not None:
            return self._graphic_basis(mask)
        b = 0
        for e in iter_bits(mask):
            cand = b | (1 << e)
            if self.is_independent(cand):
                b = cand
        return b

    def rank(self, mask: Optional[int] = None) -> int:
        if mask is None:
            mask = self.ground_mask
        if self.graph is not None:
            return self._graphic_rank_closure(mask)[0]
        return self.basis_of(mask).bit_count()

    def closure(self, mask: int) -> int:
        """Smallest flat containing mask."""
        if self.graph is not None:
            return self._graphic_rank_closure(mask)[1]
        b = self.basis_of(mask)
        out = mask
        for c in self.circuits:
            d = c & ~b
            if d != 0 and d & (d - 1) == 0:
                out |= d
        return out

    # -- graphic fast path --------------------------------------------------

    def _uf(self, mask: int):
        nv, edges = self.graph
        parent = list(range(nv))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        touched = 0
        comps = 0
        for e in iter_bits(mask):
            u, v = edges[e]
            for w in (u, v):
                if not (touched >> w) & 1:
                    touched |= 1 << w
                    comps += 1
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                comps -= 1
        return find, touched, comps

    def _graphic_rank_closure(self, mask: int) -> tuple[int, int]:
        find, touched, comps = self._uf(mask)
        rank = touched.bit_count() - comps
        closure = mask
        nv, edges = self.graph
        for e in range(self.ground_size):
            if (mask >> e) & 1:
                continue
            u, v = edges[e]
            if u == v:
                closure |= 1 << e
            elif ((touched >> u) & 1 and (touched >> v) & 1
                  and find(u) == find(v)):
                closure |= 1 << e
        return rank, closure

    def _graphic_basis(self, mask: int) -> int:
        nv, edges = self.graph
        parent = list(range(nv))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        b = 0
        for e in iter_bits(mask):
            u, v = edges[e]
            if u == v:
                continue
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                b |= 1 << e
        return b


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------
def _canonical_circuits(ground_size: int, circuits: Iterable[Iterable[int]]
                        ) -> tuple[int, ...]:
    masks = set()
    for c in circuits:
        cm = 0
        for e in c:
            if not 0 <= e < ground_size:
                raise AxiomViolation(
                    f"circuit element {e} outside ground set of size "
                    f"{ground_size}", witness=tuple(c))
            cm |= 1 << e
        if cm == 0:
            raise AxiomViolation("empty circuit", witness=())
        masks.add(cm)
    return tuple(sorted(masks, key=lambda m: (m.bit_count(), from_mask(m))))


def _check_incomparable(circuits: tuple[int, ...]):
    by_size = sorted(circuits, key=int.bit_count)
    for i, c1 in enumerate(by_size):
        for c2 in by_size[i + 1:]:
            if c1 & c2 == c1 and c1 != c2:
                raise AxiomViolation(
                    "circuit contains another circuit",
                    witness=(from_mask(c1), from_mask(c2)))


def _contains_circuit(circuits, mask: int) -> bool:
    for c in circuits:
        if c & mask == c:
            return True
    return False


def _check_elimination(ground_size: int, circuits: tuple[int, ...],
                       seed: int = 0):
    n = len(circuits)
    if n < 2:
        return
    exhaustive = ground_size <= ELIM_EXHAUSTIVE_MAX
    if exhaustive:
        pairs = ((i, k) for i in range(n) for k in range(i + 1, n))
    else:
        rng = random.Random(seed)
        pairs = ((rng.randrange(n), rng.randrange(n))
                 for _ in range(ELIM_SAMPLES))
    for i, k in pairs:
        c1, c2 = circuits[i], circuits[k]
        if c1 == c2:
            continue
        common = c1 & c2
        union = c1 | c2
        for e in iter_bits(common):
            if not _contains_circuit(circuits, union & ~(1 << e)):
                raise AxiomViolation(
                    "circuit elimination fails",
                    witness=(from_mask(c1), from_mask(c2), e))


def from_circuits(ground_size: int, circuits: Iterable[Iterable[int]],
                  check: bool = True) -> Matroid:
    """Build a matroid from its circuit list.

    Raises AxiomViolation (with a witness) if the family is not an
    antichain or fails circuit elimination. Non-simple inputs are allowed;
    callers needing simplicity test is_simple().
    """
    if not 0 <= ground_size <= MAX_GROUND:
        raise BadArgument(f"ground size {ground_size} outside 0..{MAX_GROUND}")
    masks = _canonical_circuits(ground_size, circuits)
    if check:
        _check_incomparable(masks)
        _check_elimination(ground_size, masks)
    return Matroid(ground_size, masks)


def _simple_cycles(nv: int, adj: dict[int, set[int]]) -> list[tuple[int, ...]]:
    """All vertex-simple cycles (length >= 3), each rooted at its min vertex."""
    cycles = []

    def dfs(root, path, seen):
        u = path[-1]
        for v in adj.get(u, ()):
            if v == root and len(path) >= 3:
                if path[1] < path[-1]:  # each cycle once per direction
                    cycles.append(tuple(path))
            elif v > root and v not in seen:
                seen.add(v)
                path.append(v)
                dfs(root, path, seen)
                path.pop()
                seen.remove(v)

    for root in range(nv):
        dfs(root, [root], {root})
    return cycles


def from_graph(n_vertices: int, edges: list[tuple[int, int]],
               check: bool = False, max_circuits: int = 1_000_000) -> Matroid:
    """Cycle matroid of a graph; ground set = edge indices.

    Loops give size-1 circuits, parallel edges size-2 circuits, and each
    vertex-simple cycle expands over the parallel copies of its edges.
    """
    m = len(edges)
    if m > MAX_GROUND:
        raise SizeLimit(f"{m} edges exceeds the {MAX_GROUND}-element cap")
    for u, v in edges:
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise BadArgument(f"edge ({u}, {v}) outside vertex range")
    circuits: list[list[int]] = []
    by_pair: dict[tuple[int, int], list[int]] = {}
    for i, (u, v) in enumerate(edges):
        if u == v:
            circuits.append([i])
        else:
            by_pair.setdefault((min(u, v), max(u, v)), []).append(i)
    for ids in by_pair.values():
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                circuits.append([ids[a], ids[b]])
    adj: dict[int, set[int]] = {}
    for (u, v) in by_pair:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    for cyc in _simple_cycles(n_vertices, adj):
        pairs = [(min(cyc[i], cyc[(i + 1) % len(cyc)]),
                  max(cyc[i], cyc[(i + 1) % len(cyc)]))
                 for i in range(len(cyc))]
        choices = [by_pair[pq] for pq in pairs]
        total = 1
        for ch in choices:
            total *= len(ch)
        if len(circuits) + total > max_circuits:
            raise SizeLimit("circuit expansion exceeds cap",
                            partial=len(circuits))
        stack = [[]]
        for ch in choices:
            stack = [pre + [e] for pre in stack for e in ch]
        circuits.extend(stack)
    mat = from_circuits(m, circuits, check=check)
    return Matroid(mat.ground_size, mat.circuits,
                   graph=(n_vertices, tuple((u, v) for u, v in edges)))


# --------------------------------------------------------------------------
# flats and the lattice
# --------------------------------------------------------------------------
def flats_by_rank(matroid: Matroid, max_flats: int = 200_000
                  ) -> list[list[int]]:
    """All flats as bitmasks, grouped by rank, BFS from closure of the empty
    set. Each level is sorted by element tuple. Raises SizeLimit past the cap.
    """
    bottom = matroid.closure(0)
    levels = [[bottom]]
    seen = {bottom}
    total = 1
    ground = matroid.ground_mask
    current = [bottom]
    while current:
        nxt = set()
        for f in current:
            rest = ground & ~f
            for e in iter_bits(rest):
                g = matroid.closure(f | (1 << e))
                if g not in seen:
                    seen.add(g)
                    nxt.add(g)
                    total += 1
                    if total > max_flats:
                        raise SizeLimit(
                            f"flat count exceeds {max_flats}",
                            partial=levels)
        if not nxt:
            break
        current = sorted(nxt, key=from_mask)
        levels.append(current)
    return levels


def brute_force_flats(matroid: Matroid) -> set[int]:
    """Closure test over every subset; oracle for small ground sets."""
    if matroid.ground_size > 14:
        raise SizeLimit("brute force flat scan limited to 14 elements")
    out = set()
    for mask in range(1 << matroid.ground_size):
        if matroid.closure(mask) == mask:
            out.add(mask)
    return out


class FlatLattice:
    """Lattice of flats with deterministic (rank, element-set) ordering.

    join/meet work on flat indices; the dense join and rank-additive
    product tables back the resolution engine.
    """

    def __init__(self, matroid: Matroid, max_flats: int = 200_000):
        self.matroid = matroid
        levels = flats_by_rank(matroid, max_flats=max_flats)
        self.flats: list[int] = [f for lev in levels for f in lev]
        self.index: dict[int, int] = {f: i for i, f in enumerate(self.flats)}
        self.rank_of: list[int] = []
        for r, lev in enumerate(levels):
            self.rank_of.extend([r] * len(lev))
        self.by_rank: list[list[int]] = [
            [self.index[f] for f in lev] for lev in levels]
        self.top_rank = len(levels) - 1
        self._join_table = None
        self._prod_table = None

    def __len__(self):
        return len(self.flats)

    def whitney(self) -> tuple[int, ...]:
        return tuple(len(lev) for lev in self.by_rank)

    def join(self, i: int, k: int) -> int:
        if self._join_table is not None:
            return int(self._join_table[i, k])
        return self.index[self.matroid.closure(self.flats[i] | self.flats[k])]

    def meet(self, i: int, k: int) -> int:
        return self.index[self.flats[i] & self.flats[k]]

    def _element_join_table(self):
        """ejoin[i, e] = index of closure(flat_i + {e}).

        By the covering property, when e is outside flat F the closure of
        F + {e} is the unique flat of rank r(F) + 1 containing it, so each
        entry is found by a containment scan one rank level up. Masks are
        packed into uint64, hence the ground-size guard at the call site.
        """
        import numpy as np
        n = len(self.flats)
        ground = self.matroid.ground_size
        masks = np.array(self.flats, dtype=np.uint64)
        ejoin = np.empty((n, ground), dtype=np.int32)
        for r, level in enumerate(self.by_rank):
            idx = np.array(level, dtype=np.int64)
            lev_masks = masks[idx]
            if r == self.top_rank:
                ejoin[idx, :] = idx[:, None]
                continue
            nxt = np.array(self.by_rank[r + 1], dtype=np.int64)
            nxt_masks = masks[nxt]
            for e in range(ground):
                bit = np.uint64(1) << np.uint64(e)
                inside = (lev_masks & bit) != 0
                ejoin[idx[inside], e] = idx[inside]
                q = lev_masks[~inside] | bit
                if not q.size:
                    continue
                hit = (nxt_masks[None, :] & q[:, None]) == q[:, None]
                am = np.argmax(hit, axis=1)
                if not hit[np.arange(len(q)), am].all():
                    raise MismatchBug("flat cover lookup found no superflat")
                ejoin[idx[~inside], e] = nxt[am]
        return ejoin

    def tables(self):
        """(join, prod) as dense numpy arrays; prod is the join when ranks
        add and -1 otherwise. Built once, reused by the engine."""
        if self._join_table is None:
            import numpy as np
            n = len(self.flats)
            rank = np.array(self.rank_of, dtype=np.int32)
            if self.matroid.ground_size <= 62 and n > 300:
                ejoin = self._element_join_table()
                join = np.empty((n, n), dtype=np.int32)
                all_rows = np.arange(n, dtype=np.int64)
                for g in range(n):
                    # walk a spanning subset of flat g through ejoin
                    col = all_rows
                    j = 0
                    for e in iter_bits(self.flats[g]):
                        j2 = int(ejoin[j, e])
                        if j2 != j:
                            col = ejoin[col, e]
                            j = j2
                    if j != g:
                        raise MismatchBug("element walk missed its flat")
                    join[:, g] = col
            else:
                join = np.empty((n, n), dtype=np.int32)
                for i in range(n):
                    fi = self.flats[i]
                    for k in range(i, n):
                        j = self.index[
                            self.matroid.closure(fi | self.flats[k])]
                        join[i, k] = j
                        join[k, i] = j
            prod = np.where(
                rank[join] == rank[:, None] + rank[None, :], join, -1
            ).astype(np.int32)
            self._join_table = join
            self._prod_table = prod
        return self._join_table, self._prod_table


# --------------------------------------------------------------------------
# minors and simplification
# --------------------------------------------------------------------------
def _minimalize(masks: Iterable[int]) -> list[int]:
    out = []
    for c in sorted(set(masks), key=int.bit_count):
        if not any(prev & c == prev for prev in out):
            out.append(c)
    return out


def _reindex(circuits: Iterable[int], keep_mask: int
             ) -> tuple[list[list[int]], dict[int, int]]:
    emap = {e: i for i, e in enumerate(iter_bits(keep_mask))}
    return [[emap[e] for e in iter_bits(c)] for c in circuits], emap


def restriction(matroid: Matroid, subset: Iterable[int]
                ) -> tuple[Matroid, dict[int, int]]:
    """Restriction to subset; returns the minor and the old->new element map."""
    mask = to_mask(subset)
    inside = [c for c in matroid.circuits if c & mask == c]
    circs, emap = _reindex(inside, mask)
    return from_circuits(mask.bit_count(), circs, check=False), emap


def contraction(matroid: Matroid, subset: Iterable[int]
                ) -> tuple[Matroid, dict[int, int]]:
    """Contraction of subset; circuits are the minimal nonempty C - X."""
    mask = to_mask(subset)
    keep = matroid.ground_mask & ~mask
    leftovers = [c & ~mask for c in matroid.circuits if c & ~mask]
    circs, emap = _reindex(_minimalize(leftovers), keep)
    return from_circuits(keep.bit_count(), circs, check=False), emap


def simplification(matroid: Matroid) -> tuple[Matroid, dict[int, int]]:
    """Remove loops and collapse parallel classes to their minimum element.

    The element map sends every non-loop element to the new index of its
    class representative; loops are absent from the map.
    """
    loop_mask = 0
    for c in matroid.circuits:
        if c.bit_count() == 1:
            loop_mask |= c
    rep = list(range(matroid.ground_size))

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for c in matroid.circuits:
        if c.bit_count() == 2:
            a, b = from_mask(c)
            ra, rb = find(a), find(b)
            if ra != rb:
                rep[max(ra, rb)] = min(ra, rb)
    keep = 0
    for e in range(matroid.ground_size):
        if not (loop_mask >> e) & 1 and find(e) == e:
            keep |= 1 << e
    emap_keep = {e: i for i, e in enumerate(iter_bits(keep))}
    emap = {e: emap_keep[find(e)] for e in range(matroid.ground_size)
            if not (loop_mask >> e) & 1}
    big = [c for c in matroid.circuits if c.bit_count() >= 3]
    images = set()
    for c in big:
        images.add(to_mask(emap[e] for e in iter_bits(c)))
    simple = from_circuits(keep.bit_count(),
                           [from_mask(c) for c in _minimalize(images)],
                           check=False)
    return simple, emap


# --------------------------------------------------------------------------
# broken circuits
# --------------------------------------------------------------------------
def broken_circuits(matroid: Matroid) -> list[int]:
    """C minus its smallest element, for every circuit, in the ground order."""
    out = set()
    for c in matroid.circuits:
        low = c & -c
        out.add(c ^ low)
    out.discard(0)
    return sorted(out, key=lambda m: (m.bit_count(), from_mask(m)))


def nbc_sets(matroid: Matroid, max_sets: int = 2_000_000) -> list[int]:
    """All subsets containing no broken circuit, as bitmasks.

    Grows level-by-level (an NBC set minus its largest element is NBC), so
    the cost is proportional to the output. SizeLimit past max_sets.
    """
    bc = broken_circuits(matroid)
    if any(b == 0 for b in bc):
        return [0]

    def ok(mask):
        for b in bc:
            if b & mask == b:
                return False
        return True

    out = [0]
    current = [0]
    n = matroid.ground_size
    while current:
        nxt = []
        for s in current:
            top = s.bit_length()  # only extend upward, each set built once
            for e in range(top, n):
                cand = s | (1 << e)
                if ok(cand):
                    nxt.append(cand)
                    if len(out) + len(nxt) > max_sets:
                        raise SizeLimit("NBC family exceeds cap",
                                        partial=out)
        out.extend(nxt)
        current = nxt
    return out
