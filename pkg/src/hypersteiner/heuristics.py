"""Tree construction heuristics: HyperSteiner and its randomized variant."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .fermat import ALPHA, best_fst4, fermat_point, fst3
from .klein import angle_at, check_points, distance, triangle_barycenters
from .optimize import CollapsedEdgeError, GdConfig, optimize_steiner
from .tree import Tree, mst_tree, tree_length
from .triangulation import UnionFind, dedupe_points, delaunay, kruskal, mst

logger = logging.getLogger(__name__)

MOVE_TOL = 1e-10
# expansion ignores angles this close to 120 degrees
ANGLE_MARGIN = 1e-9


@dataclass
class SolveResult:
    """Outcome of one solve.

    ``red_percent`` is ``(1 - length / mst_length) * 100`` over the same
    terminals.
    """

    method: str
    tree: Tree
    length: float
    mst_length: float
    seed: int | None = None
    wall_time_ms: float = 0.0
    config: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def red_percent(self):
        if self.mst_length == 0.0:
            return 0.0
        return (1.0 - self.length / self.mst_length) * 100.0

    def to_dict(self):
        return {
            "method": self.method,
            "seed": self.seed,
            "length": self.length,
            "red_percent": self.red_percent,
            "wall_time_ms": self.wall_time_ms,
            "terminals": self.tree.terminals.tolist(),
            "steiner": self.tree.steiner.tolist(),
            "edges": self.tree.edges.tolist(),
            "config": self.config,
        }


@dataclass(frozen=True)
class RhsConfig:
    """Settings of the randomized driver.

    ``max_iterations`` defaults to ``floor(sqrt(|P|))``.  A candidate tree
    replaces the incumbent only if it is shorter by more than
    ``improvement_tol`` times the incumbent length.
    """

    max_iterations: int | None = None
    insertion_range: tuple = (0.3, 0.6)
    seed: int = 0
    gd: GdConfig = field(default_factory=GdConfig)
    improvement_tol: float = 1e-9
    max_reduce_rounds: int = 50

    def __post_init__(self):
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        lo, hi = self.insertion_range
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError(f"insertion_range must satisfy 0 < l <= u < 1, got {self.insertion_range}")
        if self.improvement_tol < 0:
            raise ValueError("improvement_tol must be non-negative")
        object.__setattr__(self, "insertion_range", (float(lo), float(hi)))

    def iterations_for(self, n_terminals):
        if self.max_iterations is not None:
            return self.max_iterations
        return max(1, math.isqrt(n_terminals))

    def to_dict(self):
        out = asdict(self)
        out["insertion_range"] = list(self.insertion_range)
        return out


def _terminals(points):
    pts = check_points(points, "terminals")
    if len(pts) < 2:
        raise ValueError(f"need at least 2 terminals, got {len(pts)}")
    if len(dedupe_points(pts)) < len(pts):
        raise ValueError("terminals contain duplicate points")
    return pts


def spanning_tree(terminals, steiner):
    """MST over terminals and Steiner points, dropping Steiner duplicates first."""
    terminals = np.asarray(terminals, dtype=float)
    steiner = np.asarray(steiner, dtype=float).reshape(-1, 2)
    n = len(terminals)
    pts = np.vstack([terminals, steiner])
    keep = dedupe_points(pts, keep_first=n)
    steiner = pts[keep[n:]]
    pts = pts[keep]
    edges = mst(pts).pairs if len(pts) > 1 else np.empty((0, 2), dtype=int)
    return Tree(terminals, steiner, edges)


class _Editor:
    # mutable adjacency view of a tree for local surgery

    def __init__(self, tree):
        self.terminals = tree.terminals
        self.n = tree.n_terminals
        self.pts = [p for p in tree.points]
        self.alive = [True] * len(self.pts)
        self.adj = [set() for _ in self.pts]
        for u, v in tree.edges.tolist():
            self.adj[u].add(v)
            self.adj[v].add(u)

    def add_point(self, p):
        self.pts.append(np.asarray(p, dtype=float))
        self.alive.append(True)
        self.adj.append(set())
        return len(self.pts) - 1

    def link(self, u, v):
        self.adj[u].add(v)
        self.adj[v].add(u)

    def unlink(self, u, v):
        self.adj[u].discard(v)
        self.adj[v].discard(u)

    def drop(self, k):
        for v in list(self.adj[k]):
            self.unlink(k, v)
        self.alive[k] = False

    def is_steiner(self, k):
        return k >= self.n

    def steiner_ids(self):
        return [k for k in range(self.n, len(self.pts)) if self.alive[k]]

    def to_tree(self):
        ids = list(range(self.n)) + self.steiner_ids()
        remap = {old: new for new, old in enumerate(ids)}
        edges = sorted(
            (min(remap[u], remap[v]), max(remap[u], remap[v]))
            for u in ids
            for v in self.adj[u]
            if u < v
        )
        steiner = np.array([self.pts[k] for k in ids[self.n:]]).reshape(-1, 2)
        return Tree(self.terminals, steiner, np.array(edges, dtype=int).reshape(-1, 2))


def _rewire_locally(ed, k):
    # remove Steiner point k and reconnect its neighbours by their own MST
    nbrs = sorted(ed.adj[k])
    ed.drop(k)
    if len(nbrs) < 2:
        return
    sub = np.array([ed.pts[v] for v in nbrs])
    pairs = np.array([(a, b) for a in range(len(nbrs)) for b in range(a + 1, len(nbrs))])
    lengths = np.atleast_1d(distance(sub[pairs[:, 0]], sub[pairs[:, 1]]))
    for a, b, _ in kruskal(len(nbrs), pairs, lengths):
        ed.link(nbrs[a], nbrs[b])


def _normalize_degrees(tree):
    """Bring every Steiner point to degree 3.

    Degree <= 2 points are spliced out, degree-4 points are split into the
    better 4-terminal FST of their neighbours, and anything left over is
    removed with its neighbours reconnected by a local MST.
    """
    ed = _Editor(tree)
    while True:
        changed = False
        for k in ed.steiner_ids():
            deg = len(ed.adj[k])
            if deg == 3:
                continue
            changed = True
            if deg <= 2:
                nbrs = sorted(ed.adj[k])
                ed.drop(k)
                if deg == 2:
                    ed.link(*nbrs)
            elif deg == 4:
                nbrs = sorted(ed.adj[k])
                q = best_fst4(np.array([ed.pts[v] for v in nbrs]))
                if q is None:
                    _rewire_locally(ed, k)
                    continue
                for v in nbrs:
                    ed.unlink(k, v)
                ed.pts[k] = q.steiner[0]
                other = ed.add_point(q.steiner[1])
                ids = nbrs + [k, other]
                for a, b in q.edges:
                    ed.link(ids[a], ids[b])
            else:
                _rewire_locally(ed, k)
        if not changed:
            return ed.to_tree()


def reduce_degree(terminals, steiner, max_rounds=50):
    """Enforce the degree condition on a candidate Steiner set.

    Rebuilds ``MST(P + S)`` until the Steiner set is stable.  Each round
    drops Steiner points of degree <= 2 or >= 5 and moves every degree-3
    point to the Fermat point of its neighbours (dropping it when there is
    none).  Degree-4 points are then split into 4-terminal FSTs of their
    neighbourhoods and spliced into the tree.  Returns the resulting
    :class:`Tree`, whose Steiner points all have degree 3.
    """
    terminals = np.asarray(terminals, dtype=float)
    tree = spanning_tree(terminals, steiner)
    n = tree.n_terminals
    for _ in range(max_rounds):
        if len(tree.steiner) == 0:
            break
        deg = tree.degrees()
        adj = tree.adjacency()
        pts = tree.points
        kept = []
        changed = False
        for k, s in enumerate(tree.steiner):
            d = deg[n + k]
            if d <= 2 or d >= 5:
                changed = True
                continue
            if d == 3:
                a, b, c = (pts[v] for v in adj[n + k])
                f = fermat_point(a, b, c, init=s)
                if f is None:
                    changed = True
                    continue
                if distance(f, s) > MOVE_TOL:
                    changed = True
                s = f
            kept.append(s)
        tree = spanning_tree(terminals, np.array(kept).reshape(-1, 2))
        if len(tree.steiner) != len(kept):
            changed = True
        if not changed:
            break
    else:
        logger.debug("reduce_degree: no fixed point after %d rounds", max_rounds)
    return _normalize_degrees(tree)


def expand_angle(tree):
    """Insert Fermat points where two incident edges meet below 120 degrees.

    Vertices are visited in index order.  For each edge ``(i, j)`` the
    neighbour ``k`` of ``j`` making the smallest angle ``i j k`` below 120
    degrees is chosen, and the path ``i j k`` is replaced by the Fermat star
    of the triangle when it exists.  Each replacement strictly shortens the
    tree.
    """
    ed = _Editor(tree)
    for i in range(len(ed.pts)):
        for j in sorted(ed.adj[i]):
            if j not in ed.adj[i]:
                continue
            best, best_angle = None, ALPHA - ANGLE_MARGIN
            for l in sorted(ed.adj[j]):
                if l == i:
                    continue
                ang = angle_at(ed.pts[j], ed.pts[i], ed.pts[l])
                if ang < best_angle:
                    best, best_angle = l, ang
            if best is None:
                continue
            s = fermat_point(ed.pts[i], ed.pts[j], ed.pts[best])
            if s is None:
                continue
            k = best
            new = ed.add_point(s)
            ed.unlink(i, j)
            ed.unlink(j, k)
            ed.link(i, new)
            ed.link(j, new)
            ed.link(k, new)
    return ed.to_tree()


def contract_edge(tree, u, v):
    """Merge Steiner point ``u`` into vertex ``v``; ``v`` inherits ``u``'s edges."""
    n = tree.n_terminals
    if u < n:
        u, v = v, u
    if u < n:
        raise ValueError("cannot contract an edge between two terminals")
    ed = _Editor(tree)
    nbrs = [w for w in ed.adj[u] if w != v]
    ed.drop(u)
    for w in nbrs:
        ed.link(v, w)
    return ed.to_tree()


def optimize_tree(tree, gd, max_merges=None):
    """Gradient descent that merges collapsed edges and retries."""
    limit = len(tree.steiner) if max_merges is None else max_merges
    for _ in range(limit + 1):
        try:
            return optimize_steiner(tree, gd)
        except CollapsedEdgeError as err:
            logger.debug("merging collapsed edge (%d, %d)", err.u, err.v)
            tree = contract_edge(tree, err.u, err.v)
    return tree


def _local_steiner_ratio(fst, footprint):
    return fst.length / footprint


def hypersteiner(terminals):
    """Deterministic Delaunay/MST heuristic with greedy FST concatenation.

    Delaunay triangles holding two MST edges contribute their 3-terminal
    FST, and pairs of adjacent triangles holding three MST edges contribute
    the better 4-terminal FST.  Only FSTs shorter than the MST edges they
    span are queued, ordered by that ratio; the MST edges follow in
    non-decreasing order.  Greedy concatenation accepts an FST only if none
    of its terminals are already connected.
    """
    start = time.perf_counter()
    pts = _terminals(terminals)
    n = len(pts)
    tri = delaunay(pts)
    tree_mst = mst(pts, tri)
    mst_len = tree_mst.total
    mst_pairs = {tuple(p) for p in tree_mst.pairs.tolist()}
    mst_w = {tuple(p): w for p, w in zip(tree_mst.pairs.tolist(), tree_mst.lengths.tolist())}

    def tri_mst_edges(t):
        a, b, c = t
        return [e for e in ((a, b), (a, c), (b, c)) if e in mst_pairs]

    queue = []
    marked = []
    for t in tri.triangles.tolist():
        edges = tri_mst_edges(t)
        if len(edges) < 2:
            continue
        marked.append(tuple(t))
        f = fst3(*pts[t])
        footprint = sum(mst_w[e] for e in edges)
        if f is not None and f.length < footprint:
            queue.append((_local_steiner_ratio(f, footprint), 3, tuple(t), f))

    # adjacent triangle pairs covering three MST edges
    by_edge = {}
    for t in tri.triangles.tolist():
        a, b, c = t
        for e in ((a, b), (a, c), (b, c)):
            by_edge.setdefault(e, []).append(tuple(t))
    seen = set()
    for t in marked:
        a, b, c = t
        for e in ((a, b), (a, c), (b, c)):
            for other in by_edge.get(e, []):
                if other == t:
                    continue
                quad = tuple(sorted(set(t) | set(other)))
                if quad in seen:
                    continue
                seen.add(quad)
                edges = sorted(set(tri_mst_edges(t)) | set(tri_mst_edges(other)))
                if len(edges) != 3:
                    continue
                f = best_fst4(pts[list(quad)])
                footprint = sum(mst_w[x] for x in edges)
                if f is not None and f.length < footprint:
                    queue.append((_local_steiner_ratio(f, footprint), 4, quad, f))

    queue.sort(key=lambda item: (item[0], item[1], item[2]))
    uf = UnionFind(n)
    steiner = []
    edges = []
    used = 0
    for _, _, idx, f in queue:
        roots = {uf.find(v) for v in idx}
        if len(roots) < len(idx):
            continue
        used += 1
        base = n + len(steiner)
        steiner.extend(f.steiner)
        k = len(idx)
        for a, b in f.edges:
            ga = idx[a] if a < k else base + a - k
            gb = idx[b] if b < k else base + b - k
            edges.append((ga, gb))
        for v in idx[1:]:
            uf.union(idx[0], v)
    for (u, v), _ in sorted(zip(tree_mst.pairs.tolist(), tree_mst.lengths.tolist()), key=lambda x: (x[1], x[0])):
        if uf.union(u, v):
            edges.append((u, v))
    tree = Tree(pts, np.array(steiner).reshape(-1, 2), np.array(edges, dtype=int).reshape(-1, 2)).check()
    length = tree_length(tree)
    if length > mst_len:
        logger.warning("hypersteiner: concatenation longer than the MST; returning the MST")
        tree, length = mst_tree(pts, tree_mst), mst_len
    return SolveResult(
        method="hs",
        tree=tree,
        length=length,
        mst_length=mst_len,
        wall_time_ms=(time.perf_counter() - start) * 1e3,
        stats={"queued": len(queue), "fsts_used": used},
    )


def _expansion_passes(n):
    return int(math.floor(2.0 * math.sqrt(n) - 1.0))


def randomized_hypersteiner(terminals, config=None):
    """Randomized HyperSteiner.

    Starting from the MST, each iteration grows the Steiner set by random
    Delaunay-triangle barycenters (``floor(2 sqrt(n) - 1)`` passes, each
    with its own insertion probability drawn from ``insertion_range``),
    then builds a tree by degree reduction, gradient descent, angle
    expansion and another descent, refining once more when the result
    beats the incumbent.  Improvements are kept and reset the iteration
    counter; otherwise the Steiner set is restored.  The result is never
    longer than the MST and is fully determined by ``config.seed``.
    """
    config = config or RhsConfig()
    start = time.perf_counter()
    pts = _terminals(terminals)
    n = len(pts)
    rng = np.random.default_rng(config.seed)
    tree_mst = mst(pts)
    best = mst_tree(pts, tree_mst)
    best_len = tree_mst.total
    mst_len = best_len
    lo, hi = config.insertion_range
    budget = config.iterations_for(n)
    steiner = np.empty((0, 2))
    it = 1
    iterations = accepted = 0
    while it <= budget:
        iterations += 1
        for _ in range(_expansion_passes(it)):
            cloud = np.vstack([pts, steiner])
            keep = dedupe_points(cloud, keep_first=n)
            cloud = cloud[keep]
            steiner = cloud[n:]
            tri = delaunay(cloud)
            p = rng.uniform(lo, hi)
            mask = rng.random(len(tri.triangles)) < p
            if mask.any():
                steiner = np.vstack([steiner, triangle_barycenters(cloud, tri.triangles[mask])])
        tree = reduce_degree(pts, steiner, config.max_reduce_rounds)
        tree = optimize_tree(tree, config.gd)
        tree = expand_angle(tree)
        tree = optimize_tree(tree, config.gd)
        length = tree_length(tree)
        if length < best_len:
            tree = reduce_degree(pts, tree.steiner, config.max_reduce_rounds)
            tree = optimize_tree(tree, config.gd)
            length = tree_length(tree)
        if length < best_len * (1.0 - config.improvement_tol):
            best, best_len = tree, length
            steiner = tree.steiner.copy()
            accepted += 1
            it = 1
        else:
            steiner = best.steiner.copy()
            it += 1
    best.check()
    return SolveResult(
        method="rhs",
        tree=best,
        length=best_len,
        mst_length=mst_len,
        seed=config.seed,
        wall_time_ms=(time.perf_counter() - start) * 1e3,
        config=config.to_dict(),
        stats={"iterations": iterations, "accepted": accepted},
    )
