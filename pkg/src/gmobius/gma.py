"""Graded Möbius algebra of a simple matroid.

The algebra B has k-basis {y_F} over the flats F, graded by rank, with
y_F y_G = y_{F v G} when rk(F v G) = rk F + rk G and 0 otherwise.  As a
quotient of the polynomial ring S on the ground set, its defining ideal
is generated by the variable squares together with the circuit binomials
y_{C-i} - y_{C-j}; the same ideal is also generated by the squares, the
dependent-set monomials, and the equal-closure binomials between
independent sets.  Quadraticity, the matroid chordality predicates, and
the colon-ideal structure of the algebra all live here.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import matroid as mt
from .errors import BadArgument, MismatchBug, NotSimple, SizeLimit


@dataclass(frozen=True)
class GmaAlgebra:
    """Flat-indexed basis with the rank-additive product."""

    matroid: mt.Matroid
    lattice: mt.FlatLattice

    @property
    def whitney(self) -> tuple[int, ...]:
        return self.lattice.whitney()

    @property
    def top_rank(self) -> int:
        return self.lattice.top_rank

    def atom(self, e: int) -> int:
        """Flat index of the rank-1 flat containing element e."""
        if not 0 <= e < self.matroid.ground_size:
            raise BadArgument(f"element {e} outside the ground set")
        return self.lattice.index[self.matroid.closure(1 << e)]

    def mult(self, i: int, k: int) -> int:
        """Product of two basis elements: flat index, or -1 for zero."""
        j = self.lattice.join(i, k)
        ranks = self.lattice.rank_of
        return j if ranks[j] == ranks[i] + ranks[k] else -1

    def monomial(self, elements) -> int:
        """Product of the atoms over elements; flat index or -1 for zero."""
        acc = self.lattice.index[self.matroid.closure(0)]
        for e in elements:
            acc = self.mult(acc, self.atom(e))
            if acc < 0:
                return -1
        return acc


def build_gma(matroid: mt.Matroid, max_flats: int = 200_000) -> GmaAlgebra:
    """Construct the algebra; the matroid must be simple."""
    if not matroid.is_simple():
        raise NotSimple(
            f"loops {matroid.loops} / parallel pairs {matroid.parallel_pairs}")
    lattice = mt.FlatLattice(matroid, max_flats=max_flats)
    algebra = GmaAlgebra(matroid, lattice)
    _spot_check_associativity(algebra)
    return algebra


def _spot_check_associativity(algebra: GmaAlgebra, trials: int = 50):
    rng = random.Random(11)
    n = len(algebra.lattice)
    for _ in range(trials):
        i, k, l = (rng.randrange(n) for _ in range(3))
        ik = algebra.mult(i, k)
        kl = algebra.mult(k, l)
        left = algebra.mult(ik, l) if ik >= 0 else -1
        right = algebra.mult(i, kl) if kl >= 0 else -1
        if left != right:
            raise MismatchBug(f"associativity failed on flats {(i, k, l)}")


def hilbert_function(algebra: GmaAlgebra) -> tuple[int, ...]:
    """Graded dimensions; these are the Whitney numbers of the lattice."""
    return algebra.whitney


# --------------------------------------------------------------------------
# presentation
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class PresentationIdeal:
    """Defining ideal of the algebra inside k[y_e : e in E].

    circuit_binomials lists (C, i, j) for y_{C-i} - y_{C-j} with j = min C
    and i ranging over the rest of C; stanley_reisner holds the minimal
    dependent monomials (the circuits); closure_binomials, when computed,
    pairs every independent set with the lexicographically first one
    having the same closure.
    """

    ground_size: int
    squares: tuple[int, ...]
    stanley_reisner: tuple[tuple[int, ...], ...]
    circuit_binomials: tuple[tuple[tuple[int, ...], int, int], ...]
    closure_binomials: Optional[
        tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]] = None

    def as_json(self) -> dict:
        out = {
            "ground_size": self.ground_size,
            "squares": list(self.squares),
            "circuit_binomials": [
                {"circuit": list(c), "i": i, "j": j}
                for (c, i, j) in self.circuit_binomials],
        }
        if self.closure_binomials is not None:
            out["closure_binomials"] = [
                {"lhs": list(a), "rhs": list(b)}
                for (a, b) in self.closure_binomials]
        return out

    def as_text(self) -> str:
        def mono(elems):
            return "*".join(f"y{e}" for e in sorted(elems)) or "1"

        lines = [" ".join(f"y{e}^2" for e in self.squares)]
        for (c, i, j) in self.circuit_binomials:
            lhs = mono(e for e in c if e != i)
            rhs = mono(e for e in c if e != j)
            lines.append(f"{lhs} - {rhs}")
        return "\n".join(lines)


def presentation(matroid: mt.Matroid, with_closure_binomials: bool = False,
                 max_independent_sets: int = 2_000_000) -> PresentationIdeal:
    """Squares plus circuit binomials; optionally the equal-closure form."""
    if not matroid.is_simple():
        raise NotSimple("presentation requires a simple matroid")
    binomials = []
    circuits = []
    for cmask in sorted(matroid.circuits,
                        key=lambda m: (m.bit_count(), mt.from_mask(m))):
        c = mt.from_mask(cmask)
        circuits.append(c)
        j = c[0]
        for i in c[1:]:
            binomials.append((c, i, j))
    closure_pairs = None
    if with_closure_binomials:
        by_flat: dict[int, list[int]] = {}
        for ind in _independent_sets(matroid, max_independent_sets):
            by_flat.setdefault(matroid.closure(ind), []).append(ind)
        closure_pairs = tuple(
            (mt.from_mask(a), mt.from_mask(b))
            for _, group in sorted(by_flat.items())
            for a, b in itertools.combinations(group, 2))
    return PresentationIdeal(
        ground_size=matroid.ground_size,
        squares=tuple(range(matroid.ground_size)),
        stanley_reisner=tuple(circuits),
        circuit_binomials=tuple(binomials),
        closure_binomials=closure_pairs)


def _independent_sets(matroid: mt.Matroid, cap: int) -> list[int]:
    """All independent sets as masks, grown one larger element at a time."""
    out = [0]
    frontier = [0]
    n = matroid.ground_size
    while frontier:
        nxt = []
        for s in frontier:
            for e in range(s.bit_length(), n):
                t = s | (1 << e)
                if matroid.is_independent(t):
                    nxt.append(t)
                    if len(out) + len(nxt) > cap:
                        raise SizeLimit(
                            f"independent set count exceeds {cap}")
        out.extend(nxt)
        frontier = nxt
    return out


# --------------------------------------------------------------------------
# quadraticity
# --------------------------------------------------------------------------
def is_quadratic(matroid: mt.Matroid, max_subsets: int = 5_000_000) -> bool:
    """Whether the defining ideal is generated by its quadrics.

    Modulo the squares ideal, every multiple of a generator has at most
    two nonzero squarefree-monomial coordinates, so the degree-d slice
    comparison reduces to counting components of a graph on the
    d-subsets: subsets containing a 3-circuit are killed, and two
    subsets are joined when they differ by swapping one element of a
    3-circuit whose third element they share.  The slice of the full
    ideal has one surviving component per rank-d flat, so the quadratic
    part generates in degree d exactly when the unkilled component count
    equals the Whitney number W_d.  Both ideals are generated in degrees
    at most rank, so checking d = 3..rank decides quadraticity.
    """
    if not matroid.is_simple():
        raise NotSimple("quadraticity test requires a simple matroid")
    n = matroid.ground_size
    rank = matroid.rank()
    if rank <= 2:
        return True
    if n > 62:
        raise SizeLimit("packed subset representation needs at most 62"
                        " elements")
    whitney = [len(lev) for lev in mt.flats_by_rank(matroid)]
    triangles = [c for c in matroid.circuits if c.bit_count() == 3]
    for d in range(3, rank + 1):
        count = 1
        for t in range(d):
            count = count * (n - t) // (t + 1)
        if count > max_subsets:
            raise SizeLimit(
                f"degree-{d} slice needs {count} subsets (cap {max_subsets})")
        subs = np.sort(np.array(
            [mt.to_mask(c) for c in itertools.combinations(range(n), d)],
            dtype=np.int64))
        nsub = subs.size
        parent = list(range(nsub + 1))
        kill = nsub

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        for tri in triangles:
            inter = subs & tri
            pc = np.bitwise_count(inter)
            for si in np.nonzero(pc == 3)[0]:
                union(int(si), kill)
            rows = np.nonzero(pc == 2)[0]
            if rows.size == 0:
                continue
            it = inter[rows]
            other = np.int64(tri) ^ it
            b1 = it & -it
            for swapped in (b1, it ^ b1):
                nbr = np.searchsorted(subs, (subs[rows] ^ swapped) | other)
                for si, ni in zip(rows.tolist(), nbr.tolist()):
                    union(si, ni)
        alive = set()
        kill_root = find(kill)
        for si in range(nsub):
            r = find(si)
            if r != kill_root:
                alive.add(r)
        if len(alive) != whitney[d]:
            return False
    return True


# --------------------------------------------------------------------------
# chordality predicates
# --------------------------------------------------------------------------
def is_T_chordal(matroid: mt.Matroid) -> bool:
    """Every circuit of size >= 4 contains two elements that form a
    3-circuit with some element outside the circuit."""
    if not matroid.is_simple():
        raise NotSimple("chordality predicates require a simple matroid")
    triangles = [c for c in matroid.circuits if c.bit_count() == 3]
    for c in matroid.circuits:
        if c.bit_count() < 4:
            continue
        if not any((t & c).bit_count() == 2 for t in triangles):
            return False
    return True


def is_C_chordal(matroid: mt.Matroid) -> bool:
    """Every circuit of size >= 4 splits as (A - e) u (B - e) for circuits
    A, B meeting exactly in an element e outside the circuit."""
    if not matroid.is_simple():
        raise NotSimple("chordality predicates require a simple matroid")
    circuit_set = set(matroid.circuits)
    for c in matroid.circuits:
        if c.bit_count() < 4:
            continue
        found = False
        for a in matroid.circuits:
            diff = a & ~c
            if diff == 0 or diff.bit_count() != 1:
                continue
            b = (c & ~a) | diff
            if b in circuit_set:
                found = True
                break
        if not found:
            return False
    return True


def _line_closure_non_flat(matroid: mt.Matroid, max_sets: int
                           ) -> Optional[int]:
    """First set closed under pairwise closures that is not a flat."""
    n = matroid.ground_size
    pair_cl = {}
    for i in range(n):
        for j in range(i + 1, n):
            pair_cl[(i, j)] = matroid.closure((1 << i) | (1 << j))

    def lc(mask: int) -> int:
        while True:
            new = mask
            elems = mt.from_mask(mask)
            for i, j in itertools.combinations(elems, 2):
                new |= pair_cl[(i, j)]
            if new == mask:
                return mask
            mask = new

    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for s in frontier:
            for e in range(n):
                if (s >> e) & 1:
                    continue
                t = lc(s | (1 << e))
                if t not in seen:
                    if matroid.closure(t) != t:
                        return t
                    seen.add(t)
                    nxt.append(t)
                    if len(seen) > max_sets:
                        raise SizeLimit(
                            f"line-closed set count exceeds {max_sets}")
        frontier = nxt
    return None


def is_line_closed(matroid: mt.Matroid, max_sets: int = 200_000) -> bool:
    """Whether every set closed under pairwise closures is a flat."""
    if not matroid.is_simple():
        raise NotSimple("chordality predicates require a simple matroid")
    return _line_closure_non_flat(matroid, max_sets) is None


# --------------------------------------------------------------------------
# colon ideals and contraction
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ColonIdeal:
    """The annihilator (0 : y_a), described by generators and dimensions.

    binomial_gens lists (C, i, j) over circuits C of the single-element
    contraction by a, read in the labels of the original ground set;
    linear_form_gens, present when the matroid is C-chordal, lists pairs
    (i, j) for the forms y_i - y_j with {a, i, j} a 3-circuit.
    """

    element: int
    dims: tuple[int, ...]
    binomial_gens: tuple[tuple[tuple[int, ...], int, int], ...]
    linear_form_gens: Optional[tuple[tuple[int, int], ...]] = None

    def as_json(self) -> dict:
        out = {
            "element": self.element,
            "dims": list(self.dims),
            "generators": {
                "monomial": [self.element],
                "binomials": [
                    {"circuit": list(c), "i": i, "j": j}
                    for (c, i, j) in self.binomial_gens],
            },
        }
        if self.linear_form_gens is not None:
            out["generators"]["linear_forms"] = [
                {"i": i, "j": j} for (i, j) in self.linear_form_gens]
        return out


def _kernel_dims(algebra: GmaAlgebra, a: int) -> list[int]:
    """dim ker(y_a *) per degree, from the image count of the flat basis."""
    lat = algebra.lattice
    af = algebra.atom(a)
    dims = []
    for d in range(lat.top_rank + 1):
        images = set()
        for fi in lat.by_rank[d]:
            pr = algebra.mult(af, fi)
            if pr >= 0:
                images.add(pr)
        dims.append(len(lat.by_rank[d]) - len(images))
    return dims


def _ideal_slice_dims(algebra: GmaAlgebra, gens: list[tuple[int, dict]]
                      ) -> list[int]:
    """Graded dimensions of the ideal generated by homogeneous elements.

    Each generator is (degree, {flat index: coefficient}).  Slices grow
    by multiplying a spanning basis with every atom; ranks are exact
    over the rationals.
    """
    lat = algebra.lattice
    atoms = [algebra.atom(e) for e in range(algebra.matroid.ground_size)]
    dims = []
    basis: list[dict] = []
    for d in range(lat.top_rank + 1):
        rows = [dict(v) for (deg, v) in gens if deg == d]
        for v in basis:
            for af in atoms:
                w: dict[int, object] = {}
                for fi, cf in v.items():
                    pr = algebra.mult(af, fi)
                    if pr >= 0:
                        w[pr] = w.get(pr, 0) + cf
                w = {k: c for k, c in w.items() if c}
                if w:
                    rows.append(w)
        basis = _reduced_basis(rows)
        dims.append(len(basis))
    return dims


def _reduced_basis(rows: list[dict]) -> list[dict]:
    """Reduced row basis over Q of sparse {column: value} rows."""
    basis: dict[int, dict] = {}
    for row in rows:
        cur = {c: Fraction(v) for c, v in row.items() if v}
        while cur:
            c = min(cur)
            if c in basis:
                f = cur.pop(c)
                for bc, bv in basis[c].items():
                    if bc == c:
                        continue
                    nv = cur.get(bc, Fraction(0)) - f * bv
                    if nv:
                        cur[bc] = nv
                    else:
                        cur.pop(bc, None)
            else:
                inv = Fraction(1) / cur[c]
                basis[c] = {k: v * inv for k, v in cur.items()}
                cur = {}
    return list(basis.values())


def colon_ideal_basis(algebra: GmaAlgebra, a: int,
                      check_c_chordal: bool = True) -> ColonIdeal:
    """Generators and graded dimensions of (0 : y_a).

    The dimension vector is computed as the kernel of multiplication by
    y_a on the flat basis and, independently, as the slice dimensions of
    the ideal spanned by y_a and the contraction-circuit binomials; a
    disagreement raises MismatchBug.  When the matroid is C-chordal the
    linear-form description (y_a) + (y_j - y_i) is checked as well.
    """
    matroid = algebra.matroid
    if not 0 <= a < matroid.ground_size:
        raise BadArgument(f"element {a} outside the ground set")
    lat = algebra.lattice
    ker_dims = _kernel_dims(algebra, a)

    contracted, emap = mt.contraction(matroid, [a])
    back = {new: old for old, new in emap.items()}
    gens: list[tuple[int, dict]] = [(1, {algebra.atom(a): 1})]
    binomial_gens = []
    for cmask in sorted(contracted.circuits,
                        key=lambda m: (m.bit_count(), mt.from_mask(m))):
        c = tuple(sorted(back[e] for e in mt.from_mask(cmask)))
        j = c[0]
        fj = algebra.monomial(e for e in c if e != j)
        for i in c[1:]:
            fi = algebra.monomial(e for e in c if e != i)
            if fi < 0 or fj < 0:
                raise MismatchBug(
                    f"contraction circuit {c} gave a dependent monomial")
            binomial_gens.append((c, i, j))
            if fi != fj:
                gens.append((len(c) - 1, {fi: 1, fj: -1}))
    span_dims = _ideal_slice_dims(algebra, gens)
    if span_dims != ker_dims:
        raise MismatchBug(
            f"colon ideal dims disagree: kernel {ker_dims}, "
            f"generator span {span_dims}")

    linear_forms = None
    if check_c_chordal and is_C_chordal(matroid):
        pairs = []
        lgens: list[tuple[int, dict]] = [(1, {algebra.atom(a): 1})]
        for t in matroid.circuits:
            if t.bit_count() == 3 and (t >> a) & 1:
                i, j = (e for e in mt.from_mask(t) if e != a)
                pairs.append((i, j))
                lgens.append((1, {algebra.atom(i): 1, algebra.atom(j): -1}))
        linear_dims = _ideal_slice_dims(algebra, lgens)
        if linear_dims != ker_dims:
            raise MismatchBug(
                f"C-chordal linear-form description failed: kernel "
                f"{ker_dims}, linear span {linear_dims}")
        linear_forms = tuple(pairs)

    return ColonIdeal(element=a, dims=tuple(ker_dims),
                      binomial_gens=tuple(binomial_gens),
                      linear_form_gens=linear_forms)


def quotient_by_colon(algebra: GmaAlgebra, a: int) -> GmaAlgebra:
    """The algebra modulo (0 : y_a), realized on the simplified contraction.

    Graded dimensions of the linear quotient must match the Whitney
    numbers of si(M/a); a disagreement raises MismatchBug.
    """
    matroid = algebra.matroid
    if not 0 <= a < matroid.ground_size:
        raise BadArgument(f"element {a} outside the ground set")
    ker_dims = _kernel_dims(algebra, a)
    quot_dims = tuple(w - k for w, k in zip(algebra.whitney, ker_dims))
    contracted, _ = mt.contraction(matroid, [a])
    simple, _ = mt.simplification(contracted)
    result = build_gma(simple)
    want = result.whitney + (0,) * (len(quot_dims) - len(result.whitney))
    if quot_dims != want:
        raise MismatchBug(
            f"quotient dims {quot_dims} differ from the simplified "
            f"contraction's Whitney vector {result.whitney}")
    return result
