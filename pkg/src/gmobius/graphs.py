"""Simple graphs and the strongly-chordal toolbox.

Chordality via maximum cardinality search with a chordless-cycle witness,
strongly chordal recognition by greedy simple-vertex peeling, induced
trampoline (sun) detection, MAT-labelings of edges, and the edge
elimination orders derived from them (larger label first).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from .errors import BadArgument, SizeLimit

TRAMPOLINE_SEARCH_MAX = 16

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Finite simple graph; edges stored as sorted, deduplicated pairs."""

    n_vertices: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise BadArgument(f"loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise BadArgument(f"edge ({u},{v}) out of range")
            if (u, v) != _norm_edge(u, v):
                raise BadArgument(f"edge ({u},{v}) not sorted")
            if (u, v) in seen:
                raise BadArgument(f"duplicate edge ({u},{v})")
            seen.add((u, v))

    @staticmethod
    def build(n_vertices: int, edges) -> "Graph":
        es = sorted({_norm_edge(u, v) for u, v in edges})
        return Graph(n_vertices, tuple(es))

    @cached_property
    def adj(self) -> tuple[frozenset, ...]:
        nbr = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            nbr[u].add(v)
            nbr[v].add(u)
        return tuple(frozenset(s) for s in nbr)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    def closed_nbhd(self, v: int, within: Optional[frozenset] = None) -> frozenset:
        n = self.adj[v] | {v}
        return n if within is None else n & (within | {v})

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edge_index

    def induced(self, vertices) -> "Graph":
        """Induced subgraph on the given vertices, relabeled 0..k-1."""
        vs = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(vs)}
        es = [(pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos]
        return Graph.build(len(vs), es)

    def is_connected(self) -> bool:
        if self.n_vertices <= 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices


def complete_graph(n: int) -> Graph:
    return Graph.build(n, itertools.combinations(range(n), 2))


def path_graph(n: int) -> Graph:
    return Graph.build(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise BadArgument("cycle needs at least 3 vertices")
    return Graph.build(n, [(i, (i + 1) % n) for i in range(n)])


def trampoline(n: int) -> Graph:
    """n-trampoline (n-sun): clique v_0..v_{n-1}, spike w_i on v_i, v_{i+1}.

    Vertex ids: v_i = i, w_i = n + i.
    """
    if n < 3:
        raise BadArgument("trampoline needs n >= 3")
    edges = list(itertools.combinations(range(n), 2))
    for i in range(n):
        edges += [(n + i, i), (n + i, (i + 1) % n)]
    return Graph.build(2 * n, edges)


def broken_trampoline(n: int) -> Graph:
    """n-trampoline with the last spike vertex w_{n-1} deleted."""
    if n < 3:
        raise BadArgument("broken trampoline needs n >= 3")
    t = trampoline(n)
    return t.induced(range(2 * n - 1))


# ---------------------------------------------------------------- chordality

def _mcs_order(g: Graph) -> list[int]:
    """Maximum cardinality search; returns visit order v_n .. v_1 reversed
    so that the result is a perfect elimination order iff g is chordal."""
    n = g.n_vertices
    weight = [0] * n
    visited = [False] * n
    visit = []
    for _ in range(n):
        v = max((w for w in range(n) if not visited[w]),
                key=lambda w: (weight[w], -w))
        visited[v] = True
        visit.append(v)
        for u in g.adj[v]:
            if not visited[u]:
                weight[u] += 1
    visit.reverse()
    return visit


def _peo_violation(g: Graph, order: list[int]) -> Optional[tuple[int, int, int]]:
    """First (v, u, w) with u, w later neighbors of v and uw not an edge."""
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = sorted((u for u in g.adj[v] if pos[u] > pos[v]),
                       key=lambda u: pos[u])
        if not later:
            continue
        u = later[0]
        for w in later[1:]:
            if not g.has_edge(u, w):
                return (v, u, w)
    return None


def is_chordal(g: Graph) -> Optional[list[int]]:
    """A perfect elimination order, or None if g has a chordless cycle."""
    order = _mcs_order(g)
    if _peo_violation(g, order) is None:
        return order
    return None


def chordless_cycle(g: Graph) -> Optional[tuple[int, ...]]:
    """A chordless cycle of length >= 4, or None if g is chordal."""
    order = _mcs_order(g)
    bad = _peo_violation(g, order)
    if bad is None:
        return None
    v, u, w = bad
    # Shortest u-w path avoiding N[v] \ {u, w}; with v it closes a cycle
    # whose only possible chords would shortcut the path.
    blocked = (g.adj[v] | {v}) - {u, w}
    prev = {u: None}
    queue = [u]
    while queue:
        nxt = []
        for x in queue:
            for y in g.adj[x]:
                if y in blocked or y in prev:
                    continue
                prev[y] = x
                if y == w:
                    path = [w]
                    while path[-1] is not None:
                        path.append(prev[path[-1]])
                    path.pop()
                    return tuple([v] + path[::-1])
                nxt.append(y)
        queue = nxt
    # The violating triple did not close up; scan cycles directly.
    for cyc_edges in sorted(_cycles_of(g), key=len):
        if len(cyc_edges) < 4:
            continue
        verts = _cycle_vertices(cyc_edges)
        chords = sum(1 for a, b in itertools.combinations(verts, 2)
                     if g.has_edge(a, b)) - len(verts)
        if chords == 0:
            return verts
    raise AssertionError("PEO violation without a chordless cycle")


def _cycle_vertices(cyc_edges: tuple[Edge, ...]) -> tuple[int, ...]:
    nxt: dict[int, list[int]] = {}
    for a, b in cyc_edges:
        nxt.setdefault(a, []).append(b)
        nxt.setdefault(b, []).append(a)
    start = min(nxt)
    verts = [start]
    prev = None
    while True:
        step = [x for x in nxt[verts[-1]] if x != prev]
        prev = verts[-1]
        if step[0] == start:
            break
        verts.append(step[0])
    return tuple(verts)


def is_simplicial(g: Graph, v: int, within: Optional[frozenset] = None) -> bool:
    nbrs = g.adj[v] if within is None else g.adj[v] & within
    return all(g.has_edge(u, w) for u, w in itertools.combinations(sorted(nbrs), 2))


def is_simple_vertex(g: Graph, v: int, within: Optional[frozenset] = None) -> bool:
    """Closed neighborhoods of N[v] totally ordered by inclusion."""
    if within is None:
        within = frozenset(range(g.n_vertices))
    if v not in within:
        raise BadArgument(f"vertex {v} outside restriction")
    hood = [g.closed_nbhd(u, within) for u in sorted((g.adj[v] & within) | {v})]
    hood.sort(key=len)
    return all(a <= b for a, b in zip(hood, hood[1:]))


def simple_vertices(g: Graph, within: Optional[frozenset] = None) -> list[int]:
    if within is None:
        within = frozenset(range(g.n_vertices))
    return [v for v in sorted(within) if is_simple_vertex(g, v, within)]


def is_strongly_chordal(g: Graph) -> Optional[list[int]]:
    """A simple elimination order built by greedy peeling, or None.

    Greedy is complete: strong chordality is hereditary and every induced
    subgraph of a strongly chordal graph keeps a simple vertex.
    """
    remaining = frozenset(range(g.n_vertices))
    order = []
    while remaining:
        cands = simple_vertices(g, remaining)
        if not cands:
            return None
        v = cands[0]
        order.append(v)
        remaining -= {v}
    return order


def _is_trampoline_layout(g: Graph, vertices: tuple[int, ...]
                          ) -> Optional[tuple[tuple[int, ...], tuple[int, ...]]]:
    """If g restricted to vertices is an n-sun, return (hub, spike) tuples
    with spike[i] adjacent to hub[i] and hub[(i+1) % n]."""
    vs = set(vertices)
    n2 = len(vs)
    if n2 % 2 or n2 < 6:
        return None
    n = n2 // 2
    deg = {v: len(g.adj[v] & vs) for v in vs}
    spikes = sorted(v for v in vs if deg[v] == 2)
    hubs = sorted(v for v in vs if deg[v] != 2)
    if len(spikes) != n:
        return None
    for u, w in itertools.combinations(hubs, 2):
        if not g.has_edge(u, w):
            return None
    # Spike attachment pairs must tile the hubs as one n-cycle.
    pair_of = {}
    for s in spikes:
        a, b = sorted(g.adj[s] & vs)
        if a not in hubs or b not in hubs or (a, b) in pair_of:
            return None
        pair_of[(a, b)] = s
    succ = {h: [] for h in hubs}
    for a, b in pair_of:
        succ[a].append(b)
        succ[b].append(a)
    if any(len(x) != 2 for x in succ.values()):
        return None
    cyc = [hubs[0]]
    prev = None
    while True:
        nxt = [x for x in succ[cyc[-1]] if x != prev]
        prev = cyc[-1]
        cyc.append(nxt[0])
        if cyc[-1] == hubs[0]:
            break
    if len(cyc) != n + 1:
        return None
    hub_cycle = tuple(cyc[:-1])
    spike_cycle = tuple(pair_of[_norm_edge(hub_cycle[i], hub_cycle[(i + 1) % n])]
                        for i in range(n))
    return hub_cycle, spike_cycle


def find_induced_trampoline(g: Graph
                            ) -> Optional[tuple[int, tuple[tuple[int, ...], tuple[int, ...]]]]:
    """An induced n-sun as (n, (hub vertices, spike vertices)), or None.

    Exhaustive over vertex subsets, so only graphs with at most
    TRAMPOLINE_SEARCH_MAX vertices are accepted when no witness is found.
    """
    if is_chordal(g) is None:
        raise BadArgument("trampoline search expects a chordal graph")
    nv = g.n_vertices
    for size in range(6, nv + 1, 2):
        for sub in itertools.combinations(range(nv), size):
            hit = _is_trampoline_layout(g, sub)
            if hit is not None:
                return size // 2, hit
    if nv > TRAMPOLINE_SEARCH_MAX:
        raise SizeLimit(f"no witness found and |V| = {nv} exceeds "
                        f"exhaustive cap {TRAMPOLINE_SEARCH_MAX}")
    return None


# -------------------------------------------------------------- MAT-labeling

def verify_mat_labeling(g: Graph, label: dict[Edge, int]
                        ) -> tuple[bool, Optional[str]]:
    """Check (ML1) each level is a forest, (ML2) the cycle-matroid closure
    of level k misses all lower levels, (ML3) each level-k edge makes
    exactly k-1 triangles with lower levels."""
    if set(label) != set(g.edges):
        return False, "labeling domain differs from edge set"
    if any(k < 1 for k in label.values()):
        return False, "labels must be positive"
    top = max(label.values(), default=0)
    levels = {k: [e for e in g.edges if label[e] == k] for k in range(1, top + 1)}

    def forest_components(edges):
        parent = list(range(g.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for u, v in edges:
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
            parent[ru] = rv
        return ok, find

    for k in range(1, top + 1):
        ok, find = forest_components(levels[k])
        if not ok:
            return False, f"ML1: level {k} contains a cycle"
        lower = {e for e in g.edges if label[e] < k}
        # cl(pi_k) = edges inside one component of the level forest.
        for u, v in lower:
            if find(u) == find(v):
                return False, f"ML2: closure of level {k} meets edge ({u},{v})"
        for u, v in levels[k]:
            tri = sum(1 for z in g.adj[u] & g.adj[v]
                      if label[_norm_edge(u, z)] < k and label[_norm_edge(v, z)] < k)
            if tri != k - 1:
                return False, (f"ML3: edge ({u},{v}) at level {k} has {tri} "
                               f"triangles below, wants {k - 1}")
    return True, None


def _ms3_ok(g: Graph, label: dict[Edge, int], w: int, nbrs: list[int],
            assign: dict[int, int]) -> bool:
    for u, v in itertools.combinations(nbrs, 2):
        lab_uv = label.get(_norm_edge(u, v))
        if lab_uv is not None and lab_uv >= max(assign[u], assign[v]):
            return False
    return True


def _ms_assignments(nbrs: list[int], clique_labels: dict[Edge, int]
                    ) -> tuple[dict[int, int], ...]:
    """All label assignments 1..len(nbrs) making the inserted vertex
    MAT-simplicial over the given clique labels.

    MS3 holds iff for every k the vertices labeled <= k span only clique
    edges labeled <= k - 1, so assignments are built by choosing who gets
    each label in increasing order, pruning prefixes that trap a large
    edge.
    """
    out: list[dict[int, int]] = []
    chosen: list[int] = []
    left = list(nbrs)

    def rec():
        if not left:
            out.append({u: i + 1 for i, u in enumerate(chosen)})
            return
        k = len(chosen) + 1
        for i, u in enumerate(list(left)):
            if all(clique_labels[_norm_edge(u, v)] <= k - 1 for v in chosen):
                del left[i]
                chosen.append(u)
                rec()
                chosen.pop()
                left.insert(i, u)

    rec()
    return tuple(out)


def mat_labeling(g: Graph) -> Optional[dict[Edge, int]]:
    """A MAT-labeling, or None when g is not strongly chordal.

    Complete search: peel any simplicial vertex, label the rest, then
    reinsert with edge labels 1..deg chosen so the vertex is
    MAT-simplicial (MS2/MS3).  Every MAT-labeled graph has a
    MAT-simplicial vertex, such a vertex is simplicial, and deleting it
    leaves a MAT-labeling, so backtracking over both the peel choice and
    the label assignment finds a labeling whenever one exists.  Both the
    peel order and the assignments matter; a fixed elimination order is
    not enough.  Insertion feasibility depends only on the labels inside
    the new vertex's neighborhood clique, so assignments are cached per
    (vertex, clique labels).
    """
    if is_strongly_chordal(g) is None:
        return None
    feasible: dict[tuple, tuple[dict[int, int], ...]] = {}

    def assignments(w, nbrs, label):
        pairs = list(itertools.combinations(nbrs, 2))
        key = (w, tuple(nbrs),
               tuple(label[_norm_edge(u, v)] for u, v in pairs))
        if key not in feasible:
            clique = {_norm_edge(u, v): label[_norm_edge(u, v)]
                      for u, v in pairs}
            feasible[key] = _ms_assignments(nbrs, clique)
        return feasible[key]

    def labelings(remaining: frozenset):
        live = [v for v in remaining if g.adj[v] & remaining]
        if not live:
            yield {}
            return
        # spikes before hubs: small closed neighborhoods peel first
        cands = sorted((v for v in live if is_simplicial(g, v, remaining)),
                       key=lambda v: (len(g.adj[v] & remaining), v))
        for w in cands:
            # order fed to the assignment search: small closed
            # neighborhoods receive small labels first
            inside = frozenset(remaining)
            nbrs = sorted(g.adj[w] & remaining,
                          key=lambda u: (len(g.closed_nbhd(u, inside)), u))
            rest = remaining - {w}
            for label in labelings(rest):
                for assign in assignments(w, nbrs, label):
                    out = dict(label)
                    for u in nbrs:
                        out[_norm_edge(w, u)] = assign[u]
                    yield out

    for label in labelings(frozenset(range(g.n_vertices))):
        ok, _ = verify_mat_labeling(g, label)
        if ok:
            return label
    return None


def strong_edge_elimination_order(g: Graph) -> Optional[list[Edge]]:
    """Edge order refining larger-label-first, ties by edge id; None when
    no MAT-labeling exists."""
    label = mat_labeling(g)
    if label is None:
        return None
    return sorted(g.edges, key=lambda e: (-label[e], g.edge_index[e]))


def _cycles_of(g: Graph, max_len: Optional[int] = None) -> list[tuple[Edge, ...]]:
    """All simple cycles as edge tuples (each cycle once)."""
    out = []
    n = g.n_vertices

    def dfs(root, path, seen):
        v = path[-1]
        for w in sorted(g.adj[v]):
            if w == root and len(path) >= 3:
                if path[1] < path[-1]:
                    out.append(tuple(_norm_edge(a, b)
                                     for a, b in zip(path, path[1:] + [root])))
            elif w > root and w not in seen:
                if max_len is None or len(path) < max_len:
                    seen.add(w)
                    dfs(root, path + [w], seen)
                    seen.remove(w)

    for root in range(n):
        dfs(root, [root], {root})
    return out


def verify_seeo(g: Graph, edge_order: list[Edge], all_cycles: bool = False
                ) -> tuple[bool, Optional[tuple[Edge, ...]]]:
    """True iff g is chordal and every 4-cycle is a MAT-circuit under the
    order (earlier in the list = smaller).  Checking 4-cycles suffices once
    the graph is chordal; all_cycles extends the check to every cycle for
    cross-validation on small graphs."""
    if sorted(edge_order) != list(g.edges):
        raise BadArgument("edge order must be a permutation of the edges")
    if is_chordal(g) is None:
        return False, None
    rank = {e: i for i, e in enumerate(edge_order)}
    cycles = _cycles_of(g, None if all_cycles else 4)
    for cyc in cycles:
        if len(cyc) < 4:
            continue
        lo = min(cyc, key=lambda e: rank[e])
        for drop in cyc:
            if drop == lo:
                continue
            rest = [e for e in cyc if e != drop]
            if not _has_mat_triple(g, rest, rank):
                return False, cyc
    return True, None


def _has_mat_triple(g: Graph, edges: list[Edge], rank: dict[Edge, int]) -> bool:
    for u, v in itertools.combinations(edges, 2):
        shared = set(u) & set(v)
        if len(shared) != 1:
            continue
        a = (set(u) - shared).pop()
        b = (set(v) - shared).pop()
        if not g.has_edge(a, b):
            continue
        w = _norm_edge(a, b)
        if rank[w] > min(rank[u], rank[v]):
            return True
    return False
