"""Hyperbolic Delaunay triangulation and minimum spanning trees.

Hyperbolic Voronoi cells in the Klein disk are restrictions of Euclidean
power cells.  Each point ``p`` becomes the power site with centre
``gamma(p) * p`` and radius ``gamma(p) - 1``; the regular triangulation of
those sites (lower hull of the lifted sites) carries the Delaunay
combinatorics of the original points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .klein import check_points, distance, gamma, klein_to_poincare

DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class PowerSite:
    center: np.ndarray
    weight: float


def power_lift(p):
    """Power site of a Klein point: centre ``gamma * p``, radius ``gamma - 1``."""
    p = np.asarray(p, dtype=float)
    g = float(gamma(p))
    return PowerSite(center=g * p, weight=g - 1.0)


def power_sites(points):
    """Vectorised :func:`power_lift`; returns ``(centers, weights)``."""
    pts = np.asarray(points, dtype=float)
    g = gamma(pts)
    return g[:, None] * pts, g - 1.0


def power(x, center, weight):
    """Power of ``x`` with respect to the circle ``(center, weight)``."""
    x = np.asarray(x, dtype=float)
    diff = x - center
    return np.sum(diff * diff, axis=-1) - np.asarray(weight) ** 2


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass
class Triangulation:
    """Index triangles over ``points``; ``edges`` holds sorted unique pairs.

    A degenerate triangulation (fewer than three points, or all points on
    one chord) has no triangles and only the path along the chord as edges.
    """

    points: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.edges is None:
            self.edges = _triangle_edges(self.triangles)

    @property
    def degenerate(self):
        return len(self.triangles) == 0


@dataclass
class EdgeList:
    """Weighted edges ``(i, j)`` with ``i < j`` and their hyperbolic lengths."""

    pairs: np.ndarray
    lengths: np.ndarray

    @property
    def total(self):
        return float(np.sum(np.sort(self.lengths)))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        for (i, j), w in zip(self.pairs.tolist(), self.lengths.tolist()):
            yield i, j, w


def _triangle_edges(triangles):
    tri = np.asarray(triangles, dtype=int).reshape(-1, 3)
    if len(tri) == 0:
        return np.empty((0, 2), dtype=int)
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [0, 2]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def _check_duplicates(pts):
    keep = dedupe_points(pts)
    if len(keep) < len(pts):
        dup = int(np.setdiff1d(np.arange(len(pts)), keep)[0])
        raise ValueError(f"point {dup} duplicates an earlier point (tolerance {DUPLICATE_TOL:g})")


def _chord_path(pts):
    n = len(pts)
    if n < 2:
        return np.empty((0, 2), dtype=int)
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    order = np.argsort(centered @ vt[0], kind="stable")
    e = np.stack([order[:-1], order[1:]], axis=1)
    e.sort(axis=1)
    return e


def _collinear(pts):
    if len(pts) < 3:
        return True
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    return sv[1] <= 1e-14 * max(sv[0], 1e-300)


def delaunay(points):
    """Hyperbolic Delaunay triangulation of Klein points.

    Computed as the lower convex hull of the power sites lifted to
    ``(gamma p, 2 gamma - 2)``, which is the hyperboloid lift up to an
    affine map.  Triangles are returned as sorted index triples in
    lexicographic order, so the output depends only on the input.

    Raises ``ValueError`` on duplicate points.
    """
    pts = check_points(points)
    _check_duplicates(pts)
    empty = np.empty((0, 3), dtype=int)
    if _collinear(pts):
        return Triangulation(pts, empty, _chord_path(pts))
    if len(pts) == 3:
        tri = np.array([[0, 1, 2]])
        return Triangulation(pts, tri, _guarded_edges(pts, tri))
    centers, _ = power_sites(pts)
    height = 2.0 * (gamma(pts) - 1.0)
    lifted = np.column_stack([centers, height])
    try:
        hull = ConvexHull(lifted, qhull_options="Qt Qc")
    except QhullError:
        # all sites on one plane, i.e. the points are cocircular
        lower = Delaunay(klein_to_poincare(pts)).simplices.tolist()
    else:
        is_lower = hull.equations[:, 2] < 0
        lower = [tuple(t) for t in hull.simplices[is_lower].tolist()]
        if len(hull.coplanar):
            lower = _insert_coplanar(lower, hull, is_lower, lifted[:, :2])
    tri = np.sort(np.array(lower, dtype=int).reshape(-1, 3), axis=1)
    tri = tri[np.lexsort(tri.T[::-1])]
    return Triangulation(pts, tri, _guarded_edges(pts, tri))


def _guarded_edges(pts, tri):
    # Euclidean Delaunay edges of the Poincare image are hyperbolic Delaunay
    # edges too; adding them repairs hull roundoff when gamma is huge
    edges = _triangle_edges(tri)
    try:
        extra = Delaunay(klein_to_poincare(pts)).simplices
    except QhullError:
        return edges
    both = np.vstack([edges, _triangle_edges(np.sort(extra, axis=1))])
    return np.unique(both, axis=0)


def _insert_coplanar(lower, hull, is_lower, xy):
    # near-cocircular points that qhull left off the hull: split the facet they sit on
    facet_of = {tuple(t): k for k, t in zip(np.flatnonzero(is_lower), hull.simplices[is_lower].tolist())}
    pieces = {k: [t] for t, k in facet_of.items()}
    for point, facet, _ in hull.coplanar.tolist():
        if facet not in pieces:
            continue
        tris = pieces[facet]
        best, best_score = 0, -np.inf
        for idx, (a, b, c) in enumerate(tris):
            m = np.array([xy[b] - xy[a], xy[c] - xy[a]]).T
            try:
                w1, w2 = np.linalg.solve(m, xy[point] - xy[a])
            except np.linalg.LinAlgError:
                continue
            score = min(w1, w2, 1.0 - w1 - w2)
            if score > best_score:
                best, best_score = idx, score
        a, b, c = tris.pop(best)
        tris.extend([(a, b, point), (a, c, point), (b, c, point)])
    out = []
    for t in lower:
        out.extend(pieces.get(facet_of[t], [t]))
    return out


def power_circle(centers, weights, triangle):
    """Orthogonal (power) circle of three weighted sites: ``(center, radius^2)``.

    The returned centre has equal power to the three sites.  Sites with
    negative power against it would violate regularity.
    """
    c = np.asarray(centers, dtype=float)[list(triangle)]
    w = np.asarray(weights, dtype=float)[list(triangle)]
    lift = np.sum(c * c, axis=1) - w * w
    a = 2.0 * (c[1:] - c[0])
    b = lift[1:] - lift[0]
    x = np.linalg.solve(a, b)
    r2 = np.sum((x - c[0]) ** 2) - w[0] ** 2
    return x, r2


def _edge_lengths(pts, pairs):
    if len(pairs) == 0:
        return np.empty(0)
    return np.atleast_1d(distance(pts[pairs[:, 0]], pts[pairs[:, 1]]))


def kruskal(n, pairs, lengths):
    """Kruskal over the candidate edges; ties broken by ``(length, i, j)``."""
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    lengths = np.asarray(lengths, dtype=float)
    order = np.lexsort((pairs[:, 1], pairs[:, 0], lengths))
    uf = UnionFind(n)
    keep = []
    for k in order.tolist():
        i, j = pairs[k]
        if uf.union(int(i), int(j)):
            keep.append(k)
            if len(keep) == n - 1:
                break
    keep = np.asarray(keep, dtype=int)
    return EdgeList(pairs[keep].reshape(-1, 2), lengths[keep])


def complete_pairs(n):
    i, j = np.triu_indices(n, k=1)
    return np.column_stack([i, j])


def mst(points, triangulation=None):
    """Hyperbolic minimum spanning tree, as an :class:`EdgeList`.

    Kruskal runs on the Delaunay edges, which contain every MST edge.  For
    fewer than three points or a degenerate triangulation all pairs are
    used instead.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 0:
        raise ValueError("mst needs at least one point")
    if n < 3:
        pairs = complete_pairs(n)
    else:
        tri = triangulation if triangulation is not None else delaunay(pts)
        pairs = complete_pairs(n) if tri.degenerate else tri.edges
    return kruskal(n, pairs, _edge_lengths(pts, pairs))


def mst_all_pairs(points):
    """O(n^2) Kruskal over every pair; reference for :func:`mst`."""
    pts = np.asarray(points, dtype=float)
    pairs = complete_pairs(len(pts))
    return kruskal(len(pts), pairs, _edge_lengths(pts, pairs))


def dedupe_points(points, tol=DUPLICATE_TOL, keep_first=0):
    """Drop points within ``tol`` (Klein norm) of an earlier point.

    The first ``keep_first`` rows are always kept.  Returns the kept row
    indices in their original order.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        return np.arange(n)
    # grid hashing at resolution tol; compare against neighbouring cells
    cell = np.floor(pts / max(tol, 1e-300)).astype(np.int64)
    seen = {}
    keep = []
    for idx in range(n):
        cx, cy = int(cell[idx, 0]), int(cell[idx, 1])
        dup = False
        if idx >= keep_first:
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for other in seen.get((cx + dx, cy + dy), ()):
                        if np.hypot(*(pts[idx] - pts[other])) < tol:
                            dup = True
                            break
                    if dup:
                        break
                if dup:
                    break
        if not dup:
            keep.append(idx)
            seen.setdefault((cx, cy), []).append(idx)
    return np.asarray(keep, dtype=int)
