"""Exact rank computations over GF(p) and over the rationals.

The GF(p) path is built for the resolution engine: a dense incremental
row reducer (int16 rows, float64 matmul, exact since all intermediate
values stay far below 2**53), plus a sparse pipeline that coalesces
duplicate COO entries, peels singleton rows/columns arithmetic-free,
splits into connected components, and finishes each core densely or by
Markowitz elimination.  The rational path is a small dict-based
elimination used by the ideal-slice checks.
"""
from __future__ import annotations

import time
from collections import defaultdict
from fractions import Fraction
from heapq import heappop, heappush

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csg

DEFAULT_PRIME = 32003
DENSE_CAP = 1 << 26          # max rows*cols for a dense component core
SPARSE_CUTOFF = 3 * 10**7    # dense work estimate above which COO is used


class Reducer:
    """Incremental row-echelon basis over GF(p).

    Rows are kept fully reduced; absorb() returns how many of the new
    rows were independent.  p must stay below 2**15 so rows fit int16.
    """

    __slots__ = ("amb", "p", "rows", "piv", "r", "_cap")

    def __init__(self, amb: int, p: int = DEFAULT_PRIME):
        if p >= 1 << 15:
            raise ValueError("modulus too large for int16 row storage")
        self.amb = amb
        self.p = p
        self._cap = 64
        self.rows = np.zeros((self._cap, amb), dtype=np.int16)
        self.piv = np.zeros(self._cap, dtype=np.int64)
        self.r = 0

    @property
    def rank(self) -> int:
        return self.r

    def _grow(self, need):
        if need <= self._cap:
            return
        cap = max(need, int(self._cap * 1.7) + 8)
        rows = np.zeros((cap, self.amb), dtype=np.int16)
        rows[:self.r] = self.rows[:self.r]
        self.rows = rows
        piv = np.zeros(cap, dtype=np.int64)
        piv[:self.r] = self.piv[:self.r]
        self.piv = piv
        self._cap = cap

    def residual(self, B):
        """B minus its projection onto the current row space."""
        if self.r and B.size:
            coef = B[:, self.piv[:self.r]]
            if coef.any():
                # slab size keeps every float64 accumulation exact
                slab = max(1, (1 << 24) // max(self.amb, 1))
                acc = B.copy()
                for a in range(0, self.r, slab):
                    b = min(a + slab, self.r)
                    c = coef[:, a:b]
                    if c.any():
                        acc -= c @ self.rows[a:b].astype(np.float64)
                        acc = np.remainder(acc, self.p)
                return acc
        return B

    def absorb(self, B, ceiling=None) -> int:
        """Reduce B (dense float64, rows = vectors) into the basis."""
        B = self.residual(np.remainder(B, self.p))
        k = B.shape[0]
        newrows = []
        newpiv = []
        for i in range(k):
            v = B[i]
            nz = np.nonzero(v)[0]
            if nz.size == 0:
                continue
            c = int(nz[0])
            v = np.remainder(v * float(pow(int(v[c]), self.p - 2, self.p)),
                             self.p)
            if i + 1 < k:
                col = B[i + 1:, c]
                mask = col != 0
                if mask.any():
                    B[i + 1:][mask] = np.remainder(
                        B[i + 1:][mask] - np.outer(col[mask], v), self.p)
            newrows.append(v)
            newpiv.append(c)
            if ceiling is not None and self.r + len(newrows) >= ceiling:
                break
        if not newrows:
            return 0
        N = np.array(newrows)
        npv = np.array(newpiv, dtype=np.int64)
        for t in range(len(npv) - 1, -1, -1):
            col = N[:t, npv[t]]
            mask = col != 0
            if mask.any():
                N[:t][mask] = np.remainder(
                    N[:t][mask] - np.outer(col[mask], N[t]), self.p)
        if self.r:
            coef = self.rows[:self.r, npv].astype(np.float64)
            if coef.any():
                upd = np.remainder(
                    self.rows[:self.r].astype(np.float64) - coef @ N, self.p)
                self.rows[:self.r] = upd.astype(np.int16)
        add = len(npv)
        self._grow(self.r + add)
        self.rows[self.r:self.r + add] = N.astype(np.int16)
        self.piv[self.r:self.r + add] = npv
        self.r += add
        return add


def reducer_rref(A, p: int):
    """Full RREF of dense float64 A via batched absorbs.

    Returns (rows int16 (r x n), piv int64 (r,)); faster than a
    column-at-a-time RREF for wide blocks.
    """
    red = Reducer(A.shape[1], p)
    for a in range(0, A.shape[0], 256):
        red.absorb(A[a:a + 256].astype(np.float64))
    return red.rows[:red.r], red.piv[:red.r]


# --------------------------------------------------------------------------
# sparse structural rank
# --------------------------------------------------------------------------
def coalesce(rr, cc, vv, nc: int, p: int):
    """Sum duplicate (row, col) coordinate entries mod p, drop zeros."""
    vv = np.remainder(vv.astype(np.float64), p)
    live = vv != 0
    rr, cc, vv = rr[live], cc[live], vv[live]
    if rr.size == 0:
        return rr.astype(np.int64), cc.astype(np.int64), vv
    key = rr.astype(np.int64) * np.int64(nc) + cc.astype(np.int64)
    uk, inv = np.unique(key, return_inverse=True)
    sv = np.remainder(np.bincount(inv, weights=vv, minlength=uk.size), p)
    live = sv != 0
    uk = uk[live]
    return uk // nc, uk % nc, sv[live]


def peel(rr, cc, vv, nr: int, nc: int):
    """Arithmetic-free exact rank peeling of singleton rows/columns.

    A column with a single entry pivots against its row (the row's other
    entries die with the row, with zero Schur correction); symmetrically
    for single-entry rows. Repeats to a fixed point. Returns
    (rank_gained, rr, cc, vv) on the surviving entries.
    """
    rank = 0
    while rr.size:
        changed = False
        csel = np.bincount(cc, minlength=nc)[cc] == 1
        if csel.any():
            r_of, c_of = rr[csel], cc[csel]
            uniq_r, first = np.unique(r_of, return_index=True)
            rank += uniq_r.size
            dead_r = np.zeros(nr, bool)
            dead_r[uniq_r] = True
            dead_c = np.zeros(nc, bool)
            dead_c[c_of[first]] = True
            keep = ~(dead_r[rr] | dead_c[cc])
            rr, cc, vv = rr[keep], cc[keep], vv[keep]
            changed = True
            if rr.size == 0:
                break
        rsel = np.bincount(rr, minlength=nr)[rr] == 1
        if rsel.any():
            r_of, c_of = rr[rsel], cc[rsel]
            uniq_c, first = np.unique(c_of, return_index=True)
            rank += uniq_c.size
            dead_c = np.zeros(nc, bool)
            dead_c[uniq_c] = True
            dead_r = np.zeros(nr, bool)
            dead_r[r_of[first]] = True
            keep = ~(dead_r[rr] | dead_c[cc])
            rr, cc, vv = rr[keep], cc[keep], vv[keep]
            changed = True
        if not changed:
            break
    return rank, rr, cc, vv


def dense_core_rank(rr, cc, vv, p: int) -> int:
    """Exact rank of a small coalesced COO block via dense elimination.

    Orients so the reducer ambient is the smaller dimension.
    """
    ur, ri = np.unique(rr, return_inverse=True)
    uc, ci = np.unique(cc, return_inverse=True)
    m, n = ur.size, uc.size
    if m <= n:
        big, small, amb = ci, ri, m
        nvec = n
    else:
        big, small, amb = ri, ci, n
        nvec = m
    M = np.zeros(nvec * amb, dtype=np.float64)
    M[big.astype(np.int64) * amb + small] = vv
    M = M.reshape(nvec, amb)
    red = Reducer(amb, p)
    for a in range(0, nvec, 256):
        red.absorb(M[a:a + 256])
        if red.r == amb:
            break
    return red.r


def markowitz_rank(rr, cc, vv, p: int, dense_cap: int = DENSE_CAP,
                   stats=None) -> int:
    """Sparse Gaussian elimination with min-row / min-column pivoting.

    Fallback for cores too large for dense elimination; switches to dense
    once the live submatrix fits.
    """
    if rr.size == 0:
        return 0
    order = np.argsort(rr, kind="stable")
    rr, cc, vv = rr[order], cc[order], vv[order]
    rows = {}
    starts = np.concatenate([[0], np.nonzero(np.diff(rr))[0] + 1, [rr.size]])
    for t in range(len(starts) - 1):
        a, b = int(starts[t]), int(starts[t + 1])
        rows[int(rr[a])] = dict(zip(cc[a:b].tolist(), vv[a:b].tolist()))
    cols = defaultdict(set)
    for r, d in rows.items():
        for c in d:
            cols[c].add(r)
    heap = []
    for r, d in rows.items():
        heappush(heap, (len(d), r))
    rank = 0
    since_check = 0
    while rows:
        since_check += 1
        if since_check >= 64:
            since_check = 0
            if len(rows) * len(cols) <= dense_cap:
                rr2 = np.fromiter(
                    (r for r, d in rows.items() for _ in d), np.int64)
                cc2 = np.fromiter(
                    (c for d in rows.values() for c in d), np.int64)
                vv2 = np.fromiter(
                    (v for d in rows.values() for v in d.values()),
                    np.float64)
                if stats is not None:
                    stats["mark_pivots"] = stats.get("mark_pivots", 0) + rank
                return rank + dense_core_rank(rr2, cc2, vv2, p)
        while heap:
            sz, pr = heappop(heap)
            if pr in rows and len(rows[pr]) == sz:
                break
        else:
            break
        prow = rows.pop(pr)
        pc = min(prow, key=lambda c: len(cols[c]))
        pv = prow[pc]
        for c in prow:
            cols[c].discard(pr)
        inv = pow(int(pv), p - 2, p)
        for r in list(cols[pc]):
            row = rows[r]
            f = (row.pop(pc) * inv) % p
            cols[pc].discard(r)
            for c, v in prow.items():
                if c == pc:
                    continue
                nv = (row.get(c, 0) - f * v) % p
                if nv:
                    if c not in row:
                        cols[c].add(r)
                    row[c] = nv
                elif c in row:
                    del row[c]
                    cols[c].discard(r)
            if row:
                heappush(heap, (len(row), r))
            else:
                del rows[r]
        if not cols[pc]:
            del cols[pc]
        rank += 1
    if stats is not None:
        stats["mark_pivots"] = stats.get("mark_pivots", 0) + rank
    return rank


def sparse_rank(rr, cc, vv, nr: int, nc: int, p: int, stats=None) -> int:
    """Exact GF(p) rank of a COO matrix: coalesce, peel, split, solve cores."""
    t0 = time.time()
    rr, cc, vv = coalesce(rr, cc, vv, nc, p)
    nnz0 = rr.size
    rank, rr, cc, vv = peel(rr, cc, vv, nr, nc)
    peeled = rank
    if rr.size:
        ur, ri = np.unique(rr, return_inverse=True)
        uc, ci = np.unique(cc, return_inverse=True)
        nru, ncu = ur.size, uc.size
        g = sp.coo_matrix((np.ones(rr.size, np.int8), (ri, ci + nru)),
                          shape=(nru + ncu, nru + ncu))
        ncomp, lab = csg.connected_components(g.tocsr(), directed=False)
        comp = lab[ri]
        order = np.argsort(comp, kind="stable")
        comp_s = comp[order]
        bounds = np.concatenate(
            [[0], np.nonzero(np.diff(comp_s))[0] + 1, [comp_s.size]])
        biggest = 0
        for t in range(len(bounds) - 1):
            a, b = int(bounds[t]), int(bounds[t + 1])
            idx = order[a:b]
            lr, lri = np.unique(ri[idx], return_inverse=True)
            lc, lci = np.unique(ci[idx], return_inverse=True)
            cells = lr.size * lc.size
            biggest = max(biggest, cells)
            if cells <= DENSE_CAP:
                rank += dense_core_rank(lri, lci, vv[idx], p)
            else:
                rank += markowitz_rank(lri.astype(np.int64),
                                       lci.astype(np.int64),
                                       vv[idx], p, stats=stats)
        if stats is not None:
            stats.setdefault("cores", []).append(
                dict(nnz=nnz0, peeled=peeled, rest=int(rr.size),
                     ncomp=int(ncomp), biggest=int(biggest),
                     t=time.time() - t0))
    elif stats is not None:
        stats.setdefault("cores", []).append(
            dict(nnz=nnz0, peeled=peeled, rest=0, ncomp=0, biggest=0,
                 t=time.time() - t0))
    return rank


# --------------------------------------------------------------------------
# exact rational elimination
# --------------------------------------------------------------------------
def rational_rank(rows) -> int:
    """Rank over Q of sparse rows given as {column: value} dicts."""
    basis: dict[int, dict[int, Fraction]] = {}  # pivot column -> row
    rank = 0
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
                    elif bc in cur:
                        del cur[bc]
            else:
                inv = Fraction(1) / cur[c]
                basis[c] = {k: v * inv for k, v in cur.items()}
                rank += 1
                cur = {}
    return rank


def rational_in_span(rows, target) -> bool:
    """Whether the target sparse row lies in the row span over Q."""
    rows = list(rows)
    return rational_rank(rows + [target]) == rational_rank(rows)


class RationalSpan:
    """Incremental row span over Q for sparse {column: Fraction} rows."""

    def __init__(self):
        self.pivots: dict[int, dict[int, Fraction]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row) -> dict[int, Fraction]:
        """Residual of a row against the span; does not modify the span."""
        cur = {c: Fraction(v) for c, v in row.items() if v}
        hit = True
        while hit:
            hit = False
            for c in sorted(cur):
                if c in self.pivots:
                    f = cur.pop(c)
                    for bc, bv in self.pivots[c].items():
                        if bc == c:
                            continue
                        nv = cur.get(bc, Fraction(0)) - f * bv
                        if nv:
                            cur[bc] = nv
                        else:
                            cur.pop(bc, None)
                    hit = True
                    break
        return cur

    def absorb(self, row) -> bool:
        """Add a row; True if it enlarged the span."""
        cur = self.reduce(row)
        if not cur:
            return False
        c = min(cur)
        inv = Fraction(1) / cur[c]
        self.pivots[c] = {k: v * inv for k, v in cur.items()}
        return True


def rational_nullspace(rows: list[dict[int, "Fraction"]], ncols: int
                       ) -> list[dict[int, Fraction]]:
    """Kernel basis of the matrix with the given sparse rows, over Q.

    Returns one sparse vector per free column, with a 1 in that column.
    """
    # full RREF so each free column reads off a kernel vector directly
    echelon: list[tuple[int, dict[int, Fraction]]] = []  # (pivot, row)
    for row in rows:
        cur = {c: Fraction(v) for c, v in row.items() if v}
        for pc, prow in echelon:
            if pc in cur:
                f = cur.pop(pc)
                for bc, bv in prow.items():
                    if bc == pc:
                        continue
                    nv = cur.get(bc, Fraction(0)) - f * bv
                    if nv:
                        cur[bc] = nv
                    else:
                        cur.pop(bc, None)
        if cur:
            c = min(cur)
            inv = Fraction(1) / cur[c]
            cur = {k: v * inv for k, v in cur.items()}
            for pc, prow in echelon:
                if c in prow:
                    f = prow.pop(c)
                    for bc, bv in cur.items():
                        if bc == c:
                            continue
                        nv = prow.get(bc, Fraction(0)) - f * bv
                        if nv:
                            prow[bc] = nv
                        else:
                            prow.pop(bc, None)
            echelon.append((c, cur))
    pivset = {pc for pc, _ in echelon}
    out = []
    for free in range(ncols):
        if free in pivset:
            continue
        vec = {free: Fraction(1)}
        for pc, prow in echelon:
            v = prow.get(free)
            if v:
                vec[pc] = -v
        out.append(vec)
    return out
