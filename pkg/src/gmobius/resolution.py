"""Minimal graded free resolutions over finite-dimensional graded algebras.

The resolutions are computed degree by degree: at each homological step the
kernel of the previous differential is found in each internal degree, and the
minimal generators are the kernel modulo the span of lower-degree multiples.
For algebras built from a flat lattice the differentials preserve an extra
flat labeling, so every degree slice splits into small independent blocks
indexed by the join flat; that split carries the large trampoline tables.
Large blocks fall back to exact sparse GF(p) rank computations.

A separate dense rational-arithmetic engine recomputes small tables over Q
and serves as the cross-check oracle for the finite-field path.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import matroid as mt
from .errors import BadArgument, MismatchBug, SizeLimit
from .gma import GmaAlgebra
from .linalg import (DEFAULT_PRIME, SPARSE_CUTOFF, RationalSpan, Reducer,
                     rational_nullspace, reducer_rref, sparse_rank)

MAX_RATIONAL_DIM = 60          # total algebra dimension for the Q engine
MAX_BLOCK_AMBIENT = 2_000_000  # rows of a single dense reduction


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# --------------------------------------------------------------------------
# structured algebras
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class StructuredAlgebra:
    """Standard graded algebra whose basis products are monomial.

    The product of two basis elements is coef * (another basis element) or
    zero; `prod` holds the target index (-1 for zero) and `coef` the scalar.
    That shape covers graded Moebius algebras, where every structure
    constant is 0 or 1, and keeps the resolution engine label-indexed.
    `lattice` is set when the basis is a lattice of flats; it enables the
    join-flat block split inside the engine.
    """

    degree: tuple[int, ...]
    prod: np.ndarray
    coef: np.ndarray
    char: int = DEFAULT_PRIME
    lattice: Optional[mt.FlatLattice] = None

    def __post_init__(self):
        if self.char != 0 and not _is_prime(self.char):
            raise BadArgument(f"characteristic {self.char} is not prime")
        if not self.degree or self.degree[0] != 0:
            raise BadArgument("basis must start with the degree-0 unit")

    @property
    def n_basis(self) -> int:
        return len(self.degree)

    @property
    def top_degree(self) -> int:
        return max(self.degree)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(int(np.sum(np.array(self.degree) == d))
                     for d in range(self.top_degree + 1))

    def by_degree(self, d: int) -> np.ndarray:
        deg = np.array(self.degree)
        return np.nonzero(deg == d)[0].astype(np.int64)

    def check(self) -> None:
        """Verify gradedness, a unique unit, and degree-1 generation."""
        deg = np.array(self.degree, dtype=np.int64)
        n = self.n_basis
        if int(np.sum(deg == 0)) != 1:
            raise BadArgument("degree-0 component must be one-dimensional")
        if not np.array_equal(self.prod[0], np.arange(n)):
            raise BadArgument("basis element 0 must act as the unit")
        live = self.prod >= 0
        tgt = self.prod[live]
        add = (deg[:, None] + deg[None, :])[live]
        if not np.array_equal(deg[tgt], add):
            raise BadArgument("products do not respect the grading")
        if np.any(self.coef[live] == 0) or np.any(self.coef[~live] != 0):
            raise BadArgument("coef support must match the product table")
        if not (np.array_equal(self.prod, self.prod.T)
                and np.array_equal(self.coef, self.coef.T)):
            raise BadArgument("product table must be commutative")
        atoms = self.by_degree(1)
        for d in range(2, self.top_degree + 1):
            prev = self.by_degree(d - 1)
            hit = set(self.prod[np.ix_(atoms, prev)].ravel().tolist())
            hit.discard(-1)
            want = set(self.by_degree(d).tolist())
            if not want <= hit:
                raise BadArgument(
                    f"degree-{d} component not generated in degree 1")

    @staticmethod
    def from_gma(algebra: GmaAlgebra, char: int = DEFAULT_PRIME
                 ) -> "StructuredAlgebra":
        lat = algebra.lattice
        _, prodt = lat.tables()
        coef = (prodt >= 0).astype(np.int64)
        return StructuredAlgebra(degree=tuple(lat.rank_of),
                                 prod=prodt, coef=coef, char=char,
                                 lattice=lat)

    @staticmethod
    def from_table(degree, prod, coef=None, char: int = DEFAULT_PRIME
                   ) -> "StructuredAlgebra":
        prod = np.asarray(prod, dtype=np.int32)
        if coef is None:
            coef = (prod >= 0).astype(np.int64)
        alg = StructuredAlgebra(degree=tuple(int(d) for d in degree),
                                prod=prod,
                                coef=np.asarray(coef, dtype=np.int64),
                                char=char, lattice=None)
        alg.check()
        return alg


# --------------------------------------------------------------------------
# tables and series
# --------------------------------------------------------------------------
@dataclass(eq=False)
class BettiTable:
    """Graded Betti numbers beta_{i,j} within stated truncation bounds."""

    entries: dict[tuple[int, int], int]
    char: int
    max_step: int
    max_internal_degree: int
    strand_cap: Optional[int] = None

    def beta(self, i: int, j: int) -> int:
        return self.entries.get((i, j), 0)

    def total(self, i: int) -> int:
        return sum(v for (s, _), v in self.entries.items() if s == i)

    def row(self, r: int) -> tuple[int, ...]:
        return tuple(self.beta(i, i + r) for i in range(self.max_step + 1))

    def step_cap(self, i: int) -> int:
        cap = self.max_internal_degree
        if self.strand_cap is not None:
            cap = min(cap, i + self.strand_cap)
        return cap

    def same_entries(self, other: "BettiTable") -> bool:
        mine = {k: v for k, v in self.entries.items() if v}
        theirs = {k: v for k, v in other.entries.items() if v}
        return mine == theirs

    def as_json(self) -> dict:
        ent = [{"i": i, "j": j, "beta": v}
               for (i, j), v in sorted(self.entries.items()) if v]
        return {"entries": ent, "char": self.char,
                "truncation": {"max_step": self.max_step,
                               "max_internal_degree":
                                   self.max_internal_degree,
                               "strand_cap": self.strand_cap}}

    def as_text(self) -> str:
        rows = sorted({j - i for (i, j), v in self.entries.items() if v})
        if not rows:
            rows = [0]
        cols = range(self.max_step + 1)
        grid = [[""] + [str(i) for i in cols]]
        for r in rows:
            line = [f"{r}:"]
            for i in cols:
                v = self.beta(i, i + r)
                line.append(str(v) if v else "--")
            grid.append(line)
        widths = [max(len(row[c]) for row in grid)
                  for c in range(len(grid[0]))]
        return "\n".join(" ".join(cell.rjust(w)
                                  for cell, w in zip(row, widths))
                         for row in grid)


EXACT = 1 << 30  # total-degree bound of an exact (untruncated) series


@dataclass(eq=False)
class TruncatedBiSeries:
    """Power series in (s, t), exact through total degree `total_bound`."""

    coeffs: dict[tuple[int, int], int]
    total_bound: int

    def coeff(self, i: int, j: int) -> int:
        return self.coeffs.get((i, j), 0)

    def _trim(self) -> "TruncatedBiSeries":
        self.coeffs = {k: v for k, v in self.coeffs.items()
                       if v and k[0] + k[1] <= self.total_bound}
        return self

    def __add__(self, other):
        bound = min(self.total_bound, other.total_bound)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TruncatedBiSeries(out, bound)._trim()

    def __sub__(self, other):
        bound = min(self.total_bound, other.total_bound)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) - v
        return TruncatedBiSeries(out, bound)._trim()

    def __mul__(self, other):
        bound = min(self.total_bound, other.total_bound)
        out: dict[tuple[int, int], int] = {}
        for (a, b), u in self.coeffs.items():
            if a + b > bound:
                continue
            for (c, d), v in other.coeffs.items():
                if a + b + c + d > bound:
                    continue
                key = (a + c, b + d)
                out[key] = out.get(key, 0) + u * v
        return TruncatedBiSeries(out, bound)._trim()

    def shift(self, ds: int, dt: int) -> "TruncatedBiSeries":
        return TruncatedBiSeries(
            {(i + ds, j + dt): v for (i, j), v in self.coeffs.items()},
            self.total_bound + ds + dt)._trim()

    @staticmethod
    def one(bound: int = EXACT) -> "TruncatedBiSeries":
        return TruncatedBiSeries({(0, 0): 1}, bound)

    def nonzero(self) -> list[tuple[int, int, int]]:
        return [(i, j, v) for (i, j), v in sorted(self.coeffs.items()) if v]

    def as_json(self) -> dict:
        return {"terms": [{"s": i, "t": j, "coeff": v}
                          for i, j, v in self.nonzero()],
                "total_degree_bound":
                    None if self.total_bound >= EXACT else self.total_bound}


def hilbert_series(algebra: StructuredAlgebra | GmaAlgebra
                   ) -> TruncatedBiSeries:
    """HS(t) as a bi-series with no s terms; exact, the algebra is
    finite-dimensional."""
    dims = (algebra.whitney if isinstance(algebra, GmaAlgebra)
            else algebra.dims)
    return TruncatedBiSeries({(0, j): int(d) for j, d in enumerate(dims)},
                             EXACT)


def poincare_series(table: BettiTable) -> TruncatedBiSeries:
    """Bigraded Poincare series of a Betti table, with the total-degree
    bound implied by the table's truncation."""
    bound = 0
    while True:
        d = bound + 1
        top = d // 2
        if top > table.max_step:
            break
        if any(table.step_cap(i) < d - i for i in range(top + 1)):
            break
        bound = d
    coeffs = {(i, j): v for (i, j), v in table.entries.items() if v}
    return TruncatedBiSeries(coeffs, bound)._trim()


# --------------------------------------------------------------------------
# graded maps (materialized blocks, for verification on small instances)
# --------------------------------------------------------------------------
@dataclass(eq=False)
class GradedMap:
    """One differential F_s -> F_{s-1}, with dense per-degree blocks.

    Rows of block j are the degree-j slice labels of the target, columns
    those of the source; entries live in the coefficient field.
    """

    step: int
    source_degrees: tuple[int, ...]
    target_degrees: tuple[int, ...]
    blocks: dict[int, np.ndarray]
    source_labels: dict[int, list[tuple[int, int]]]
    target_labels: dict[int, list[tuple[int, int]]]


# --------------------------------------------------------------------------
# the block engine over GF(p)
# --------------------------------------------------------------------------
class BlockEngine:
    """Degree-by-degree minimal resolution engine over GF(p).

    Free modules carry labeled bases (generator, basis element); the
    differential of a generator is stored as a sparse vector over the
    labels of the previous module. With `split` set (lattice-backed
    algebras), labels group into independent blocks by join flat.
    """

    def __init__(self, algebra: StructuredAlgebra, p: Optional[int] = None,
                 split: Optional[bool] = None,
                 module_gens: Optional[list[dict[int, int]]] = None,
                 threads: int = 1):
        self.alg = algebra
        self.p = algebra.char if p is None else p
        if self.p == 0 or not _is_prime(self.p):
            raise BadArgument("block engine needs a prime characteristic")
        self.threads = max(1, threads)
        lat = algebra.lattice
        self.deg_arr = np.array(algebra.degree, dtype=np.int64)
        self.top_deg = int(self.deg_arr.max())
        self.nbasis = algebra.n_basis
        self.by_deg = [algebra.by_degree(d)
                       for d in range(self.top_deg + 1)]
        self.prod = algebra.prod
        self.coef = algebra.coef
        monomial_gens = module_gens is None or all(
            len(g) == 1 for g in module_gens)
        if split is None:
            split = lat is not None and monomial_gens
        if split and lat is None:
            raise BadArgument("the block split needs a lattice-backed "
                              "algebra")
        if split and not monomial_gens:
            raise BadArgument("the block split needs monomial generators")
        self.split = split
        self.join = lat.tables()[0] if split else None
        self.k_seed = module_gens is None

        unit = int(self.by_deg[0][0])
        self.gens = [dict(zdeg=np.zeros(1, np.int64),
                          lflat=np.array([unit], np.int64), diff=[None])]
        self.beta = {(0, 0): 1}
        if module_gens is None:
            atoms = self.by_deg[1]
            self.gens.append(dict(
                zdeg=np.ones(len(atoms), np.int64),
                lflat=atoms.copy(),
                diff=[(np.array([0]), np.array([a]), np.array([1]))
                      for a in atoms]))
            self.beta[(1, 1)] = len(atoms)
        else:
            zdeg, lflat, diff = [], [], []
            for g in module_gens:
                items = sorted(g.items())
                fs = np.array([f for f, _ in items], np.int64)
                cs = np.array([c for _, c in items], np.int64)
                d = int(self.deg_arr[fs[0]])
                zdeg.append(d)
                lflat.append(int(fs[0]) if len(fs) == 1 and split else unit)
                diff.append((np.zeros(len(fs), np.int64), fs, cs))
                self.beta[(1, d)] = self.beta.get((1, d), 0) + 1
            self.gens.append(dict(zdeg=np.array(zdeg, np.int64),
                                  lflat=np.array(lflat, np.int64),
                                  diff=diff))
        self.dimK: dict[tuple, int] = {}
        self.rkB: dict[tuple, int] = {}
        # F_0 and F_1 are complete in every degree from the seeding
        self.capdeg: dict[int, int] = {0: EXACT, 1: EXACT}
        self.slices: dict[tuple, Optional[dict]] = {}
        self._ce_cache: dict = {}

    # ---- slices ----------------------------------------------------------
    def slice_of(self, gens, j):
        gis, bs, gs = [], [], []
        zdeg, lflat = gens["zdeg"], gens["lflat"]
        for need in range(0, self.top_deg + 1):
            sel = np.nonzero(zdeg == j - need)[0]
            if sel.size == 0 or self.by_deg[need].size == 0:
                continue
            Bs = self.by_deg[need]
            gg = np.repeat(sel, Bs.size)
            bb = np.tile(Bs, sel.size)
            gis.append(gg)
            bs.append(bb)
            gs.append(self.join[lflat[gg], bb].astype(np.int64)
                      if self.split else np.zeros(gg.size, np.int64))
        if not gis:
            return None
        gi = np.concatenate(gis)
        B = np.concatenate(bs)
        G = np.concatenate(gs)
        order = np.argsort(G, kind="stable")
        gi, B, G = gi[order], B[order], G[order]
        cut = np.nonzero(np.diff(G))[0] + 1
        starts = np.concatenate([[0], cut, [len(G)]]).astype(np.int64)
        blocks = {}
        for t in range(len(starts) - 1):
            a, b = int(starts[t]), int(starts[t + 1])
            if a < b:
                blocks[int(G[a])] = (a, b)
        return dict(gi=gi, B=B, blocks=blocks)

    def ensure_slice(self, s, j):
        key = (s, j)
        if key not in self.slices:
            self.slices[key] = (self.slice_of(self.gens[s], j)
                                if s < len(self.gens) else None)
        return self.slices[key]

    def label_index(self, sl, ngens):
        idx = np.full(ngens * self.nbasis, -1, dtype=np.int64)
        idx[sl["gi"] * self.nbasis + sl["B"]] = np.arange(len(sl["gi"]))
        return idx

    # ---- dense column assembly --------------------------------------------
    def column_batches(self, gens_s, col_gi, col_B, tgt_idx, tgt_off, amb,
                       chunk=384):
        nb = self.nbasis
        diffs = gens_s["diff"]
        n = len(col_gi)
        for c0 in range(0, n, chunk):
            c1 = min(c0 + chunk, n)
            k = c1 - c0
            rows_all, cols_all, vals_all = [], [], []
            for t in range(k):
                h, F, c = diffs[col_gi[c0 + t]]
                B = col_B[c0 + t]
                Pr = self.prod[B, F]
                keep = Pr >= 0
                if not keep.any():
                    continue
                pos = tgt_idx[h[keep] * nb + Pr[keep]] - tgt_off
                rows_all.append(np.full(pos.size, t, dtype=np.int64))
                cols_all.append(pos)
                vals_all.append(c[keep].astype(np.float64)
                                * self.coef[B, F][keep])
            M = np.zeros((k, amb), dtype=np.float64)
            if rows_all:
                rr = np.concatenate(rows_all)
                cc = np.concatenate(cols_all)
                vv = np.concatenate(vals_all)
                M.ravel()[:] = np.bincount(rr * amb + cc, weights=vv,
                                           minlength=k * amb)
            yield c0, np.remainder(M, self.p)

    # ---- sparse global assembly ---------------------------------------------
    def _class_entries(self, s, z):
        key = (s, z)
        if key in self._ce_cache:
            return self._ce_cache[key]
        gens = self.gens[s]
        sel = np.nonzero(gens["zdeg"] == z)[0]
        if sel.size == 0:
            self._ce_cache[key] = None
            return None
        hs, Fs, cs, gid = [], [], [], []
        for t, g in enumerate(sel.tolist()):
            h, F, c = gens["diff"][g]
            hs.append(h)
            Fs.append(F)
            cs.append(c)
            gid.append(np.full(h.size, t, dtype=np.int64))
        out = dict(sel=sel, h=np.concatenate(hs), F=np.concatenate(Fs),
                   c=np.concatenate(cs).astype(np.float64),
                   gid=np.concatenate(gid))
        self._ce_cache[key] = out
        return out

    def assemble_coo(self, s, j, zmax=None):
        """Global COO of the degree-j block of d_s; columns are (g, B)
        labels with zdeg(g) <= zmax, rows the degree-j slice of F_{s-1}."""
        nb = self.nbasis
        prev_sl = self.ensure_slice(s - 1, j)
        nrows = len(prev_sl["gi"]) if prev_sl else 0
        tgt_idx = (self.label_index(prev_sl, len(self.gens[s - 1]["zdeg"]))
                   if prev_sl else None)
        zvals = sorted(set(self.gens[s]["zdeg"].tolist()))
        if zmax is not None:
            zvals = [z for z in zvals if z <= zmax]
        rrs, ccs, vvs = [], [], []
        cgi, cB, cG = [], [], []
        off = 0
        for z in zvals:
            need = j - z
            if need < 0 or need > self.top_deg:
                continue
            Bs = self.by_deg[need]
            if Bs.size == 0:
                continue
            ce = self._class_entries(s, z)
            if ce is None:
                continue
            nsel = ce["sel"].size
            lf = self.gens[s]["lflat"][ce["sel"]]
            for bi, B in enumerate(Bs.tolist()):
                cgi.append(ce["sel"])
                cB.append(np.full(nsel, B, dtype=np.int64))
                cG.append(self.join[lf, B].astype(np.int64) if self.split
                          else np.zeros(nsel, np.int64))
                if tgt_idx is None:
                    continue
                Pr = self.prod[B, ce["F"]]
                keep = Pr >= 0
                if keep.any():
                    pos = tgt_idx[ce["h"][keep] * nb + Pr[keep]]
                    rrs.append(pos)
                    ccs.append(off + bi * nsel + ce["gid"][keep])
                    vvs.append(ce["c"][keep] * self.coef[B, ce["F"]][keep])
            off += Bs.size * nsel
        ncols = off
        if rrs:
            rr = np.concatenate(rrs)
            cc = np.concatenate(ccs)
            vv = np.concatenate(vvs)
            if rr.size and rr.min() < 0:
                raise MismatchBug("assembled entry outside the target slice")
        else:
            rr = np.zeros(0, np.int64)
            cc = np.zeros(0, np.int64)
            vv = np.zeros(0, np.float64)
        col_gi = np.concatenate(cgi) if cgi else np.zeros(0, np.int64)
        col_B = np.concatenate(cB) if cB else np.zeros(0, np.int64)
        colG = np.concatenate(cG) if cG else np.zeros(0, np.int64)
        return rr, cc, vv, nrows, ncols, col_gi, col_B, colG

    def block_coo(self, gens_s, col_gi, col_B, tgt_idx, tgt_off):
        nb = self.nbasis
        diffs = gens_s["diff"]
        rows_all, cols_all, vals_all = [], [], []
        for t in range(len(col_gi)):
            h, F, c = diffs[col_gi[t]]
            B = col_B[t]
            Pr = self.prod[B, F]
            keep = Pr >= 0
            if keep.any():
                pos = tgt_idx[h[keep] * nb + Pr[keep]] - tgt_off
                rows_all.append(pos)
                cols_all.append(np.full(pos.size, t, dtype=np.int64))
                vals_all.append(c[keep].astype(np.float64)
                                * self.coef[B, F][keep])
        if not rows_all:
            return (np.zeros(0, np.int64), np.zeros(0, np.int64),
                    np.zeros(0, np.float64))
        return (np.concatenate(rows_all), np.concatenate(cols_all),
                np.concatenate(vals_all))

    # ---- ranks ---------------------------------------------------------------
    def rank_of_block(self, s, j, G, ceiling=None):
        key = (s, j, G)
        if key in self.rkB:
            return self.rkB[key]
        sl = self.ensure_slice(s, j)
        if sl is None or G not in sl["blocks"]:
            return 0
        a, b = sl["blocks"][G]
        if s == 1 and self.k_seed:
            # d1 sends y_B e_a to y_B y_a, so its degree-j image is all of
            # A_j; per join-flat block that is rank one when the block's
            # flat realizes the degree
            if self.split:
                return 1 if (j >= 1 and int(self.deg_arr[G]) == j) else 0
            return len(self.by_deg[j]) if 1 <= j <= self.top_deg else 0
        prev_sl = self.ensure_slice(s - 1, j)
        if prev_sl is None or G not in prev_sl["blocks"]:
            return 0
        pa, pb = prev_sl["blocks"][G]
        if pb - pa > MAX_BLOCK_AMBIENT:
            raise SizeLimit(f"block at step {s}, degree {j} has ambient "
                            f"dimension {pb - pa}", partial=self.beta)
        tgt_idx = self.label_index(prev_sl, len(self.gens[s - 1]["zdeg"]))
        red = Reducer(pb - pa, self.p)
        for _, M in self.column_batches(self.gens[s], sl["gi"][a:b],
                                        sl["B"][a:b], tgt_idx, pa, pb - pa):
            red.absorb(M, ceiling=ceiling)
            if ceiling is not None and red.rank >= ceiling:
                break
        return red.rank

    def query_dimK(self, s, j, G):
        key = (s, j, G)
        if key in self.dimK:
            return self.dimK[key]
        sl = self.ensure_slice(s, j)
        if sl is None or G not in sl["blocks"]:
            self.dimK[key] = 0
            return 0
        a, b = sl["blocks"][G]
        if s >= 2 and self.capdeg.get(s, -1) >= j:
            self.dimK[key] = (b - a) - self.rkB.get(key, 0)
            return self.dimK[key]
        ceiling = self.query_dimK(s - 1, j, G) if s > 1 else None
        r = self.rank_of_block(s, j, G, ceiling=ceiling)
        self.dimK[key] = (b - a) - r
        return self.dimK[key]

    def _prefetch_dimK(self, s, j, Gs):
        """Fill the dimK cache for many blocks, in parallel when asked."""
        todo = [G for G in Gs if (s, j, G) not in self.dimK]
        if len(todo) < 2 or self.threads < 2:
            for G in todo:
                self.query_dimK(s, j, G)
            return
        self.ensure_slice(s, j)
        self.ensure_slice(s - 1, j)
        if s > 1:
            self._prefetch_dimK(s - 1, j, todo)
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = list(pool.map(lambda G: self.query_dimK(s, j, G),
                                    todo))
        del results

    # ---- one homological step ---------------------------------------------
    def step(self, s, cap, last=False):
        p = self.p
        new = dict(zdeg=[], lflat=[], diff=[])
        for j in range(s, cap + 1):
            prev_sl = self.ensure_slice(s - 1, j)
            if prev_sl is None:
                # nothing lives here, but the degree counts as processed
                self.capdeg[s] = j
                continue
            tgt_idx = self.label_index(prev_sl, len(self.gens[s - 1]["zdeg"]))
            tmp = dict(zdeg=np.array(new["zdeg"], np.int64),
                       lflat=np.array(new["lflat"], np.int64),
                       diff=new["diff"])
            mk_sl = self.slice_of(tmp, j) if new["zdeg"] else None
            self._prefetch_dimK(s - 1, j, list(prev_sl["blocks"]))
            for G, (pa, pb) in sorted(prev_sl["blocks"].items()):
                dk = self.query_dimK(s - 1, j, G)
                if dk == 0:
                    self.rkB[(s, j, G)] = 0
                    continue
                amb = pb - pa
                red = None
                r2 = 0
                if mk_sl is not None and G in mk_sl["blocks"]:
                    ma, mb = mk_sl["blocks"][G]
                    if amb * dk > SPARSE_CUTOFF:
                        rr, cc, vv = self.block_coo(tmp, mk_sl["gi"][ma:mb],
                                                    mk_sl["B"][ma:mb],
                                                    tgt_idx, pa)
                        r2 = sparse_rank(rr, cc, vv, amb, mb - ma, p)
                        if r2 < dk and not (last and j == cap):
                            # deficit: redo densely so extraction can
                            # reuse the reducer
                            r2 = 0
                    if r2 == 0:
                        red = Reducer(amb, p)
                        for _, M in self.column_batches(
                                tmp, mk_sl["gi"][ma:mb], mk_sl["B"][ma:mb],
                                tgt_idx, pa, amb):
                            red.absorb(M, ceiling=dk)
                            if red.rank >= dk:
                                break
                        r2 = red.rank
                if red is None:
                    red = Reducer(amb, p)
                nb = dk - r2
                if nb < 0:
                    raise MismatchBug(
                        f"multiple span exceeds the kernel at step {s}, "
                        f"degree {j}")
                if nb:
                    self.beta[(s, j)] = self.beta.get((s, j), 0) + nb
                    if not (last and j == cap):
                        vecs = self.extract_kernel(s - 1, j, G, nb, red)
                        for (h, F, c) in vecs:
                            new["zdeg"].append(j)
                            new["lflat"].append(G)
                            new["diff"].append((h, F, c))
                        tmp = dict(zdeg=np.array(new["zdeg"], np.int64),
                                   lflat=np.array(new["lflat"], np.int64),
                                   diff=new["diff"])
                        mk_sl = self.slice_of(tmp, j)
                self.rkB[(s, j, G)] = r2 + nb
            self.capdeg[s] = j
        self.gens.append(dict(zdeg=np.array(new["zdeg"], np.int64),
                              lflat=np.array(new["lflat"], np.int64),
                              diff=new["diff"]))
        self._ce_cache = {}

    def extract_kernel(self, s, j, G, nb, mk_red):
        """Kernel basis vectors of the d_s block at (j, G) that are new
        modulo the reducer holding the multiple span."""
        p = self.p
        sl = self.ensure_slice(s, j)
        a, b = sl["blocks"][G]
        prev_sl = self.ensure_slice(s - 1, j)
        if prev_sl is not None and G in prev_sl["blocks"]:
            pa, pb = prev_sl["blocks"][G]
            tgt_idx = self.label_index(prev_sl,
                                       len(self.gens[s - 1]["zdeg"]))
            batches = [M for _, M in self.column_batches(
                self.gens[s], sl["gi"][a:b], sl["B"][a:b], tgt_idx, pa,
                pb - pa)]
            At = np.concatenate(batches)
            A = np.ascontiguousarray(At.T)
            R, piv = reducer_rref(A, p)
        else:
            R = np.zeros((0, b - a), np.int16)
            piv = np.zeros(0, np.int64)
        pivset = set(piv.tolist())
        found = []
        Rf = R.astype(np.float64)
        for fc in range(b - a):
            if fc in pivset:
                continue
            ker = np.zeros(b - a)
            ker[fc] = 1
            if piv.size:
                ker[piv] = np.remainder(-Rf[:, fc], p)
            if mk_red.absorb(ker[None, :]):
                nz = np.nonzero(ker)[0]
                found.append((sl["gi"][a + nz].copy(),
                              sl["B"][a + nz].copy(),
                              ker[nz].astype(np.int64)))
                if len(found) == nb:
                    break
        if len(found) != nb:
            raise MismatchBug(
                f"found {len(found)} of {nb} kernel generators at step "
                f"{s + 1}, degree {j}")
        return found

    # ---- high internal degrees via global sparse ranks ----------------------
    def final_degree(self, s, j, last):
        prev_ok = self.capdeg.get(s - 1, -1) >= j
        sl_prev = self.ensure_slice(s - 1, j)
        dimK_G = None
        if prev_ok:
            Gs = list(sl_prev["blocks"]) if sl_prev else []
            self._prefetch_dimK(s - 1, j, Gs)
            dimK_G = {G: self.query_dimK(s - 1, j, G) for G in Gs}
            dimK_tot = sum(dimK_G.values())
        else:
            if not last:
                raise MismatchBug("an interior degree needs cached kernel "
                                  "dimensions")
            rr, cc, vv, nr, ncols, _, _, _ = self.assemble_coo(s - 1, j)
            rk = sparse_rank(rr, cc, vv, nr, ncols, self.p)
            dimK_tot = ncols - rk
        rr, cc, vv, nr, ncols, col_gi, col_B, colG = self.assemble_coo(
            s, j, zmax=j - 1)
        r2 = sparse_rank(rr, cc, vv, nr, ncols, self.p)
        nb = dimK_tot - r2
        if nb < 0:
            raise MismatchBug(
                f"multiple span exceeds the kernel at step {s}, degree {j}")
        if nb:
            self.beta[(s, j)] = self.beta.get((s, j), 0) + nb
        if nb and not last:
            self._localize_and_extract(s, j, nb, dimK_G,
                                       rr, cc, vv, col_gi, col_B, colG)
        self.capdeg[s] = j
        return nb

    def _localize_and_extract(self, s, j, nb, dimK_G,
                              rr, cc, vv, col_gi, col_B, colG):
        prev_sl = self.ensure_slice(s - 1, j)
        tgt_idx = self.label_index(prev_sl, len(self.gens[s - 1]["zdeg"]))
        remaining = nb
        extracted = []
        for G, dk in sorted(dimK_G.items()):
            if remaining == 0:
                break
            if dk == 0:
                continue
            cmask = colG[cc] == G if cc.size else np.zeros(0, bool)
            sub_cols = np.nonzero(colG == G)[0]
            r2G = 0
            if cmask.any():
                r2G = sparse_rank(rr[cmask], cc[cmask], vv[cmask],
                                  len(prev_sl["gi"]), colG.size, self.p)
            defic = dk - r2G
            if defic < 0:
                raise MismatchBug("block multiple span exceeds its kernel")
            if defic == 0:
                continue
            pa, pb = prev_sl["blocks"][G]
            amb = pb - pa
            red = Reducer(amb, self.p)
            if sub_cols.size:
                for _, M in self.column_batches(self.gens[s],
                                                col_gi[sub_cols],
                                                col_B[sub_cols], tgt_idx,
                                                pa, amb):
                    red.absorb(M, ceiling=dk)
            vecs = self.extract_kernel(s - 1, j, G, defic, red)
            for (h, F, c) in vecs:
                extracted.append((j, G, (h, F, c)))
            remaining -= defic
        if remaining:
            raise MismatchBug(f"{remaining} kernel generators unlocated at "
                              f"step {s}, degree {j}")
        g = self.gens[s]
        self.gens[s] = dict(
            zdeg=np.concatenate([g["zdeg"], np.array([e[0]
                                 for e in extracted], np.int64)]),
            lflat=np.concatenate([g["lflat"], np.array([e[1]
                                  for e in extracted], np.int64)]),
            diff=list(g["diff"]) + [e[2] for e in extracted])
        self._ce_cache = {}
        for key in [k for k in self.slices if k[0] == s]:
            del self.slices[key]

    def run(self, max_step: int, caps: Callable[[int], int],
            final_sparse: bool = True):
        for s in range(2, max_step + 1):
            cap = caps(s)
            if s == max_step and final_sparse and cap > s:
                self.step(s, s, last=False)
                for j in range(s + 1, cap + 1):
                    self.final_degree(s, j, last=(j == cap))
            else:
                self.step(s, cap, last=(s == max_step))
        return self.beta

    # ---- materialized differentials (verification on small instances) ------
    def graded_map(self, s: int, max_degree: int) -> GradedMap:
        blocks = {}
        src_labels = {}
        tgt_labels = {}
        for j in range(0, max_degree + 1):
            sl = self.ensure_slice(s, j)
            prev_sl = self.ensure_slice(s - 1, j)
            if sl is None or prev_sl is None:
                continue
            ncols = len(sl["gi"])
            nrows = len(prev_sl["gi"])
            if nrows * ncols > 4_000_000:
                raise SizeLimit(f"degree-{j} block of d_{s} too large to "
                                "materialize")
            tgt_idx = self.label_index(prev_sl,
                                       len(self.gens[s - 1]["zdeg"]))
            M = np.zeros((nrows, ncols), dtype=np.int64)
            for c0, batch in self.column_batches(
                    self.gens[s], sl["gi"], sl["B"], tgt_idx, 0, nrows):
                M[:, c0:c0 + batch.shape[0]] = batch.T.astype(np.int64)
            blocks[j] = M
            src_labels[j] = list(zip(sl["gi"].tolist(), sl["B"].tolist()))
            tgt_labels[j] = list(zip(prev_sl["gi"].tolist(),
                                     prev_sl["B"].tolist()))
        return GradedMap(
            step=s,
            source_degrees=tuple(self.gens[s]["zdeg"].tolist()),
            target_degrees=tuple(self.gens[s - 1]["zdeg"].tolist()),
            blocks=blocks, source_labels=src_labels, target_labels=tgt_labels)


# --------------------------------------------------------------------------
# dense rational engine (oracle)
# --------------------------------------------------------------------------
def _rational_betti(algebra: StructuredAlgebra, max_step: int,
                    caps: Callable[[int], int],
                    module_gens: Optional[list[dict[int, int]]] = None
                    ) -> dict[tuple[int, int], int]:
    """Minimal resolution over Q, dense Fractions, no block split.

    Labels of F_s in degree j are pairs (generator, basis element); the
    code mirrors the GF(p) engine but with none of its machinery.
    """
    if sum(1 for _ in algebra.degree) > MAX_RATIONAL_DIM:
        raise SizeLimit("rational engine limited to total dimension "
                        f"{MAX_RATIONAL_DIM}")
    deg = algebra.degree
    top = algebra.top_degree
    by_deg = {d: algebra.by_degree(d).tolist() for d in range(top + 1)}
    prod = algebra.prod
    coef = algebra.coef

    beta = {(0, 0): 1}
    # generator lists per step: (zdeg, diff) with diff a sparse dict over
    # the labels of the previous step
    gendeg: list[list[int]] = [[0]]
    diffs: list[list[Optional[dict]]] = [[None]]
    if module_gens is None:
        atoms = by_deg.get(1, [])
        gendeg.append([1] * len(atoms))
        diffs.append([{(0, a): Fraction(1)} for a in atoms])
        if atoms:
            beta[(1, 1)] = len(atoms)
    else:
        gendeg.append([])
        diffs.append([])
        for g in module_gens:
            items = sorted(g.items())
            d = deg[items[0][0]]
            gendeg[1].append(d)
            diffs[1].append({(0, f): Fraction(c) for f, c in items})
            beta[(1, d)] = beta.get((1, d), 0) + 1

    def slice_labels(s: int, j: int) -> list[tuple[int, int]]:
        out = []
        for g, zd in enumerate(gendeg[s]):
            need = j - zd
            if 0 <= need <= top:
                out.extend((g, b) for b in by_deg[need])
        return out

    def mult_into(s: int, b: int, vec: dict) -> dict:
        """y_b times a vector over the labels of F_s."""
        out: dict[tuple[int, int], Fraction] = {}
        for (h, x), c in vec.items():
            t = int(prod[b, x])
            if t >= 0:
                key = (h, t)
                out[key] = out.get(key, 0) + c * int(coef[b, x])
        return {k: v for k, v in out.items() if v}

    for s in range(2, max_step + 1):
        cap = caps(s)
        newdeg: list[int] = []
        newdiff: list[dict] = []
        for j in range(s, cap + 1):
            src = slice_labels(s - 1, j)
            if not src:
                continue
            src_idx = {lab: t for t, lab in enumerate(src)}
            tgt = slice_labels(s - 2, j)
            tgt_idx = {lab: t for t, lab in enumerate(tgt)}
            # kernel of the degree-j block of d_{s-1}
            cols = []
            for (g, b) in src:
                img = mult_into(s - 2, b, diffs[s - 1][g]) \
                    if diffs[s - 1][g] is not None else {}
                cols.append({tgt_idx[lab]: v for lab, v in img.items()})
            rows: list[dict[int, Fraction]] = [dict() for _ in tgt]
            for t, col in enumerate(cols):
                for r, v in col.items():
                    rows[r][t] = v
            kernel = rational_nullspace(rows, len(src))
            span = RationalSpan()
            for t, zd in enumerate(newdeg):
                need = j - zd
                if not (1 <= need <= top):
                    continue
                for b in by_deg[need]:
                    mul = mult_into(s - 1, b, newdiff[t])
                    row = {src_idx[lab]: v for lab, v in mul.items()}
                    if row:
                        span.absorb(row)
            for vec in kernel:
                if span.absorb(vec):
                    newdeg.append(j)
                    newdiff.append({src[t]: v for t, v in vec.items()})
                    beta[(s, j)] = beta.get((s, j), 0) + 1
        gendeg.append(newdeg)
        diffs.append(newdiff)
    return beta


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------
def _as_structured(algebra, char: Optional[int] = None) -> StructuredAlgebra:
    if isinstance(algebra, GmaAlgebra):
        algebra = StructuredAlgebra.from_gma(algebra)
    if not isinstance(algebra, StructuredAlgebra):
        raise BadArgument("expected a GmaAlgebra or StructuredAlgebra")
    if char is not None and char != algebra.char:
        algebra = replace(algebra, char=char)
    return algebra


def _caps_fn(max_step: int, max_internal_degree: Optional[int],
             strand_cap: Optional[int]) -> tuple[Callable[[int], int], int]:
    hard = max_internal_degree
    if hard is None:
        hard = max_step + (strand_cap or 0)

    def caps(s: int) -> int:
        c = hard
        if strand_cap is not None:
            c = min(c, s + strand_cap)
        return max(c, s)

    reported = max(caps(s) for s in range(max_step + 1)) if max_step >= 0 \
        else hard
    return caps, reported


def resolve_k(algebra, max_step: int,
              max_internal_degree: Optional[int] = None,
              strand_cap: Optional[int] = None,
              threads: int = 1,
              final_sparse: bool = True) -> tuple[BettiTable, BlockEngine]:
    """Betti table of the ground field plus the engine that computed it.

    The engine keeps every extracted differential, so check_dd_zero and
    check_minimality can audit the run afterwards.
    """
    alg = _as_structured(algebra)
    if alg.char == 0:
        raise BadArgument("resolve_k needs a prime characteristic")
    if max_step < 0:
        raise BadArgument("max_step must be nonnegative")
    caps, reported = _caps_fn(max_step, max_internal_degree, strand_cap)
    engine = BlockEngine(alg, threads=threads)
    if max_step >= 2:
        engine.run(max_step, caps, final_sparse=final_sparse)
    entries = {k: v for k, v in engine.beta.items()
               if v and k[0] <= max_step and k[1] <= caps(k[0])}
    table = BettiTable(entries=entries, char=alg.char, max_step=max_step,
                       max_internal_degree=reported, strand_cap=strand_cap)
    return table, engine


def betti_table_of_k(algebra, max_step: int,
                     max_internal_degree: Optional[int] = None,
                     strand_cap: Optional[int] = None,
                     threads: int = 1,
                     final_sparse: bool = True) -> BettiTable:
    """Graded Betti table of the ground field over the algebra.

    Entries are exact for i <= max_step and j within the per-step cap
    (min of max_internal_degree and i + strand_cap). Without explicit
    caps the internal degree runs to max_step plus any strand cap.
    """
    alg = _as_structured(algebra)
    if max_step < 0:
        raise BadArgument("max_step must be nonnegative")
    if alg.char == 0:
        caps, reported = _caps_fn(max_step, max_internal_degree, strand_cap)
        beta = _rational_betti(alg, max_step, caps)
        entries = {k: v for k, v in beta.items() if k[0] <= max_step}
        return BettiTable(entries=entries, char=0, max_step=max_step,
                          max_internal_degree=reported,
                          strand_cap=strand_cap)
    return resolve_k(alg, max_step, max_internal_degree=max_internal_degree,
                     strand_cap=strand_cap, threads=threads,
                     final_sparse=final_sparse)[0]


def check_dd_zero(engine: BlockEngine) -> bool:
    """Compose every stored differential with the previous one.

    Each generator's boundary is pushed through the next map entry by
    entry, so the check is independent of the rank bookkeeping that
    produced the table.
    """
    p = engine.p
    nb = engine.nbasis
    for s in range(2, len(engine.gens)):
        pdiff = engine.gens[s - 1]["diff"]
        for d in engine.gens[s]["diff"]:
            h, F, c = d
            keys, vals = [], []
            for t in range(h.size):
                dh = pdiff[int(h[t])]
                if dh is None:
                    continue
                h2, F2, c2 = dh
                Pr = engine.prod[int(F[t]), F2]
                keep = Pr >= 0
                if not keep.any():
                    continue
                keys.append(h2[keep].astype(np.int64) * nb
                            + Pr[keep].astype(np.int64))
                vals.append((int(c[t]) * c2[keep].astype(np.int64) % p)
                            * engine.coef[int(F[t]), F2][keep])
            if not keys:
                continue
            k = np.concatenate(keys)
            v = np.concatenate(vals).astype(np.float64)
            uk, inv = np.unique(k, return_inverse=True)
            tot = np.zeros(uk.size)
            np.add.at(tot, inv, v)
            if np.remainder(tot, p).any():
                return False
    return True


def check_minimality(engine: BlockEngine) -> bool:
    """No differential entry may carry a unit, i.e. a degree-0 basis
    coordinate."""
    for s in range(1, len(engine.gens)):
        for d in engine.gens[s]["diff"]:
            if d is None:
                continue
            _, F, _ = d
            if F.size and np.any(engine.deg_arr[F] == 0):
                return False
    return True


def _normalize_gens(alg: StructuredAlgebra, ideal_generators
                    ) -> list[dict[int, int]]:
    out = []
    for g in ideal_generators:
        if isinstance(g, int):
            g = {g: 1}
        if not isinstance(g, dict) or not g:
            raise BadArgument("generators are basis indices or sparse "
                              "{basis: coeff} dicts")
        items = {int(k): int(v) for k, v in g.items() if v}
        if not items:
            continue
        degs = {alg.degree[k] for k in items}
        if len(degs) > 1:
            raise BadArgument("ideal generators must be homogeneous")
        if min(items) < 0 or max(items) >= alg.n_basis:
            raise BadArgument("generator index outside the basis")
        if alg.degree[next(iter(items))] == 0:
            raise BadArgument("unit generator makes the quotient zero")
        out.append(items)
    return out


def _minimalize_gens(alg: StructuredAlgebra, gens: list[dict[int, int]]
                     ) -> list[dict[int, int]]:
    """Drop generators inside the ideal span of the kept ones, degree by
    degree over Q (structure constants are integers, so a rational
    dependency is field-independent for the instances served here)."""
    if not gens:
        return []
    gens = sorted(gens, key=lambda g: alg.degree[next(iter(g))])
    atoms = alg.by_degree(1).tolist()
    slices: dict[int, list[dict[int, Fraction]]] = {}
    spans: dict[int, RationalSpan] = {}
    kept = []
    d_prev = 0
    for g in gens:
        d = alg.degree[next(iter(g))]
        while d_prev < d:
            # propagate already-kept ideal slices up one degree
            d_prev += 1
            rows = []
            for v in slices.get(d_prev - 1, []):
                for a in atoms:
                    nv: dict[int, Fraction] = {}
                    for x, c in v.items():
                        t = int(alg.prod[a, x])
                        if t >= 0:
                            nv[t] = nv.get(t, 0) + c * int(alg.coef[a, x])
                    nv = {k: c for k, c in nv.items() if c}
                    if nv:
                        rows.append(nv)
            slices[d_prev] = rows
            span = RationalSpan()
            for r in rows:
                span.absorb(r)
            spans[d_prev] = span
        vec = {k: Fraction(v) for k, v in g.items()}
        if spans.setdefault(d, RationalSpan()).absorb(vec):
            kept.append(g)
            slices.setdefault(d, []).append(vec)
    return kept


def betti_table_of_cyclic_quotient(algebra, ideal_generators, max_step: int,
                                   max_internal_degree: Optional[int] = None,
                                   strand_cap: Optional[int] = None,
                                   threads: int = 1):
    """Betti table of A/(generators) as a module over A.

    Generators are basis indices (monomials) or sparse {basis: coeff}
    dicts; they are minimalized first so the first column of the table is
    honest. An empty list resolves A itself.
    """
    alg = _as_structured(algebra)
    if max_step < 0:
        raise BadArgument("max_step must be nonnegative")
    gens = _minimalize_gens(alg, _normalize_gens(alg, ideal_generators))
    caps, reported = _caps_fn(max_step, max_internal_degree, strand_cap)
    if alg.char == 0:
        beta = _rational_betti(alg, max_step, caps, module_gens=gens)
        entries = {k: v for k, v in beta.items() if k[0] <= max_step}
        return BettiTable(entries=entries, char=0, max_step=max_step,
                          max_internal_degree=reported,
                          strand_cap=strand_cap)
    engine = BlockEngine(alg, module_gens=gens, threads=threads)
    if max_step >= 2:
        engine.run(max_step, caps, final_sparse=False)
    entries = {k: v for k, v in engine.beta.items()
               if v and k[0] <= max_step and k[1] <= caps(k[0])}
    return BettiTable(entries=entries, char=alg.char, max_step=max_step,
                      max_internal_degree=reported, strand_cap=strand_cap)


def koszul_probe(algebra, max_step: int, strand_cap: int = 2,
                 threads: int = 1) -> dict:
    """Look for nonlinear Betti entries in the first few strands.

    Numerical evidence only: rows above strand_cap are not examined, and
    nothing beyond max_step is. linear_through is the last step whose
    examined entries are all on the diagonal.
    """
    table = betti_table_of_k(algebra, max_step,
                             max_internal_degree=max_step + strand_cap,
                             strand_cap=strand_cap, threads=threads)
    first = None
    for (i, j) in sorted(table.entries):
        if j > i and table.entries[(i, j)]:
            first = (i, j)
            break
    linear_through = max_step if first is None else first[0] - 1
    return {"linear_through": linear_through,
            "first_nonlinear": first,
            "max_step": max_step,
            "strand_cap": strand_cap}


def _full_strand_table(algebra, max_step: int, threads: int = 1
                       ) -> BettiTable:
    """Betti table with every strand complete through max_step steps.

    Generators of a syzygy module sit in degrees at most top_degree above
    the previous module's generators, so a cap clearing that bound at
    every step certifies completeness; the cap grows adaptively if a
    strand turns out longer than expected.
    """
    alg = _as_structured(algebra)
    D = alg.top_degree
    cap = max_step + D
    for _ in range(4):
        table = betti_table_of_k(alg, max_step, max_internal_degree=cap,
                                 threads=threads)
        need = 0
        maxdeg_prev = 0
        for s in range(1, max_step + 1):
            if maxdeg_prev + D > cap:
                need = maxdeg_prev + D
                break
            degs = [j for (i, j), v in table.entries.items()
                    if i == s and v]
            maxdeg_prev = max(degs) if degs else maxdeg_prev
        if not need:
            return table
        cap = need
    raise SizeLimit("strands keep extending past the adaptive cap")


def check_hs_poincare_identity(algebra, max_step: int,
                               threads: int = 1) -> dict:
    """Coefficients of HS(t) * P(-t) - 1 through t^max_step.

    P here is the one-variable Poincare series with total Betti numbers,
    so the residual vanishes in the computed range exactly when the table
    looks Koszul there. Strands are computed in full so the totals are
    honest.
    """
    alg = _as_structured(algebra)
    table = _full_strand_table(alg, max_step, threads=threads)
    hs = [0] * (max_step + 1)
    for j, d in enumerate(alg.dims):
        if j <= max_step:
            hs[j] = d
    pm = [(-1) ** i * table.total(i) for i in range(max_step + 1)]
    residual = []
    for m in range(max_step + 1):
        acc = sum(hs[m - i] * pm[i] for i in range(m + 1))
        residual.append(acc - (1 if m == 0 else 0))
    return {"coefficients": residual,
            "max_degree": max_step,
            "all_zero": not any(residual),
            "char": alg.char}


def check_trampoline_functional_equation(n: int, max_step: int,
                                         char: int = DEFAULT_PRIME,
                                         threads: int = 1) -> dict:
    """Residual of the trampoline Poincare-series identity.

    P_T(s,t) * (1 - s t (1 + P_Q(s,t))) - P_B(s,t), where T is the
    trampoline, B the broken trampoline, and Q the quotient of B's
    algebra by the long base edge. Coefficients are compared through
    (s,t)-total degree max_step.
    """
    from . import gma as gma_mod
    from . import graphs as gr
    from . import instances as ins
    if n < 3:
        raise BadArgument("trampolines need n >= 3")
    if n > 4:
        raise SizeLimit("functional equation checked for n in {3, 4}")
    m = max_step
    tg = gr.trampoline(n)
    bg = gr.broken_trampoline(n)
    a_edge = (0, n - 1)
    if a_edge not in bg.edges:
        raise MismatchBug("broken trampoline misses its long base edge")
    a_elem = bg.edges.index(a_edge)
    alg_t = _as_structured(
        gma_mod.build_gma(ins.cycle_matroid(tg)), char=char)
    alg_b = _as_structured(
        gma_mod.build_gma(ins.cycle_matroid(bg)), char=char)
    a_flat = int(np.nonzero(
        np.array(alg_b.lattice.flats) == (1 << a_elem))[0][0])

    steps = max(m // 2, 0)
    tab_t = betti_table_of_k(alg_t, steps,
                             max_internal_degree=m, threads=threads)
    tab_b = betti_table_of_k(alg_b, steps,
                             max_internal_degree=m, threads=threads)
    steps_q = max((m - 2) // 2, 0)
    tab_q = betti_table_of_cyclic_quotient(
        alg_b, [a_flat], steps_q, max_internal_degree=max(m - 2, 0),
        threads=threads)

    def series(tab: BettiTable, bound: int) -> TruncatedBiSeries:
        return TruncatedBiSeries(
            {k: v for k, v in tab.entries.items() if v}, bound)._trim()

    p_t = series(tab_t, m)
    p_b = series(tab_b, m)
    p_q = series(tab_q, max(m - 2, 0))
    one = TruncatedBiSeries.one(m)
    denom = one - (one + p_q).shift(1, 1)
    residual = p_t * denom - p_b
    nz = residual.nonzero()
    return {"n": n, "total_degree": m, "char": char,
            "nonzero": [{"s": i, "t": j, "coeff": v} for i, j, v in nz],
            "all_zero": not nz}


def cross_characteristic_check(algebra, primes, max_step: int,
                               max_internal_degree: Optional[int] = None,
                               strand_cap: Optional[int] = None,
                               threads: int = 1) -> bool:
    """Whether the Betti tables agree over every listed prime."""
    primes = list(primes)
    alg = _as_structured(algebra)
    if len(primes) < 2:
        warnings.warn("cross-characteristic check with fewer than two "
                      "primes is vacuous", stacklevel=2)
        return True
    tables = []
    for p in primes:
        tables.append(betti_table_of_k(
            replace(alg, char=p), max_step,
            max_internal_degree=max_internal_degree,
            strand_cap=strand_cap, threads=threads))
    return all(tables[0].same_entries(t) for t in tables[1:])


def _rank_mod_p(M: np.ndarray, p: int) -> int:
    if M.size == 0:
        return 0
    red = Reducer(M.shape[1], p)
    red.absorb(np.remainder(M.astype(np.float64), p))
    return red.rank


def verify_resolution(algebra, max_step: int, max_degree: int,
                      module_gens=None) -> dict:
    """Materialize the differentials and recheck the resolution axioms.

    The checks recompute everything from the dense per-degree blocks, so
    they are independent of the engine's internal bookkeeping: boundary
    composites vanish, no differential entry has degree 0, and kernel
    dimensions match image ranks inside the truncation. Sized for small
    instances only.
    """
    alg = _as_structured(algebra)
    gens = None
    if module_gens is not None:
        gens = _minimalize_gens(alg, _normalize_gens(alg, module_gens))
    engine = BlockEngine(alg, module_gens=gens)
    for s in range(2, max_step + 1):
        engine.step(s, max_degree, last=False)
    p = engine.p
    maps = {s: engine.graded_map(s, max_degree)
            for s in range(1, min(max_step, len(engine.gens) - 1) + 1)}
    dd_zero = True
    for s in range(2, max_step + 1):
        if s not in maps or (s - 1) not in maps:
            continue
        for j, M in maps[s].blocks.items():
            prev = maps[s - 1].blocks.get(j)
            if prev is None or M.size == 0 or prev.size == 0:
                continue
            if np.remainder(prev.astype(np.int64) @ M, p).any():
                dd_zero = False
    minimal = True
    for s in maps:
        for d in engine.gens[s]["diff"]:
            if d is None:
                continue
            _, F, _ = d
            if np.any(engine.deg_arr[F] == 0):
                minimal = False
    exact = True
    for s in range(1, max_step):
        for j in range(0, max_degree + 1):
            sl = engine.ensure_slice(s, j) if s < len(engine.gens) else None
            ncols = len(sl["gi"]) if sl else 0
            M = maps[s].blocks.get(j) if s in maps else None
            rank = _rank_mod_p(M.T, p) if M is not None else 0
            ker = ncols - rank
            Mn = maps[s + 1].blocks.get(j) if (s + 1) in maps else None
            img = _rank_mod_p(Mn.T, p) if Mn is not None else 0
            if ker != img:
                exact = False
    return {"dd_zero": dd_zero, "minimal": minimal, "exact": exact}
