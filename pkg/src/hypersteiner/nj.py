"""Neighbor-joining baseline: topology from hyperbolic distances, then embedding."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .heuristics import SolveResult, _terminals
from .klein import GaussianSpec, pairwise_distances, sample_wrapped_gaussian
from .optimize import GdConfig, optimize_steiner
from .tree import Tree, tree_length
from .triangulation import mst

NJ_GD = GdConfig(max_epochs=10000, learning_rate=1.0, max_step=0.1)
NJ_INIT_SIGMA = 0.1


@dataclass(frozen=True)
class Topology:
    """Unrooted tree shape.  Leaves are ``0..n-1``; internal nodes follow."""

    n_leaves: int
    edges: tuple

    @property
    def leaves(self):
        return tuple(range(self.n_leaves))

    @property
    def internal(self):
        return tuple(range(self.n_leaves, 2 * self.n_leaves - 2))

    def splits(self):
        """Leaf bipartitions induced by internal edges, as frozensets of the side without leaf 0."""
        adj = {}
        for u, v in self.edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        out = set()
        for u, v in self.edges:
            if u < self.n_leaves or v < self.n_leaves:
                continue
            side, stack, seen = set(), [v], {u, v}
            while stack:
                x = stack.pop()
                if x < self.n_leaves:
                    side.add(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if 0 in side:
                side = set(range(self.n_leaves)) - side
            out.add(frozenset(side))
        return out


def _check_matrix(d):
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix has non-finite entries")
    if np.any(d < 0):
        raise ValueError("distance matrix has negative entries")
    if not np.array_equal(d, d.T):
        raise ValueError("distance matrix is not symmetric")
    if np.any(np.diag(d) != 0):
        raise ValueError("distance matrix has a non-zero diagonal")
    return d


def nj_topology(d):
    """Neighbor-joining topology of a distance matrix.

    Repeatedly joins the pair minimizing
    ``Q(i, j) = (m - 2) d(i, j) - R_i - R_j`` (ties go to the smallest
    ``(i, j)`` in node-id order), sets
    ``d(u, k) = (d(i, k) + d(j, k) - d(i, j)) / 2`` for the new node ``u``,
    and stars the last three nodes.  Branch lengths are not kept.
    """
    d = _check_matrix(d)
    n = len(d)
    if n < 3:
        raise ValueError(f"neighbor joining needs at least 3 taxa, got {n}")
    size = 2 * n - 2
    full = np.zeros((size, size))
    full[:n, :n] = d
    active = list(range(n))
    edges = []
    nxt = n
    while len(active) > 3:
        m = len(active)
        ids = np.array(active)
        sub = full[np.ix_(ids, ids)]
        r = sub.sum(axis=1)
        q = (m - 2) * sub - r[:, None] - r[None, :]
        iu, ju = np.triu_indices(m, k=1)
        vals = q[iu, ju]
        # triu order is already lexicographic over positions in the sorted active list
        k = int(np.flatnonzero(vals == vals.min())[0])
        a, b = int(iu[k]), int(ju[k])
        i, j = active[a], active[b]
        u = nxt
        nxt += 1
        rest = ids[[t for t in range(m) if t not in (a, b)]]
        du = 0.5 * (full[i, rest] + full[j, rest] - full[i, j])
        full[u, rest] = du
        full[rest, u] = du
        edges.extend([(i, u), (j, u)])
        active = [x for x in active if x not in (i, j)] + [u]
    centre = nxt
    edges.extend((x, centre) for x in active)
    return Topology(n, tuple(sorted((min(a, b), max(a, b)) for a, b in edges)))


def nj_embed(terminals, seed=0, gd=None):
    """Embed the NJ topology of ``terminals`` in the disk and refine it.

    Internal nodes start as independent draws from a wrapped normal at the
    origin with scale 0.1, then move by gradient descent with the topology
    fixed.  The length may exceed the MST's, so the reduction can be
    negative.
    """
    start = time.perf_counter()
    gd = gd or NJ_GD
    pts = _terminals(terminals)
    n = len(pts)
    if n < 3:
        raise ValueError(f"nj needs at least 3 terminals, got {n}")
    topo = nj_topology(pairwise_distances(pts))
    rng = np.random.default_rng(seed)
    init = sample_wrapped_gaussian(GaussianSpec((0.0, 0.0), NJ_INIT_SIGMA), rng, size=n - 2)
    tree = Tree(pts, init, np.array(topo.edges, dtype=int)).check()
    tree = optimize_steiner(tree, gd)
    return SolveResult(
        method="nj",
        tree=tree,
        length=tree_length(tree),
        mst_length=mst(pts).total,
        seed=seed,
        wall_time_ms=(time.perf_counter() - start) * 1e3,
        config={"gd": gd.to_dict(), "init_sigma": NJ_INIT_SIGMA},
    )
