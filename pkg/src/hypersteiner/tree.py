"""Steiner trees over terminals plus Steiner points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .klein import distance
from .triangulation import UnionFind


@dataclass
class Tree:
    """A tree on ``terminals`` followed by ``steiner`` points.

    ``edges`` holds index pairs into :attr:`points`, where indices below
    ``n_terminals`` are terminals.
    """

    terminals: np.ndarray
    steiner: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        self.terminals = np.asarray(self.terminals, dtype=float).reshape(-1, 2)
        self.steiner = np.asarray(self.steiner, dtype=float).reshape(-1, 2)
        self.edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)

    @property
    def n_terminals(self):
        return len(self.terminals)

    @property
    def n_vertices(self):
        return len(self.terminals) + len(self.steiner)

    @property
    def points(self):
        return np.vstack([self.terminals, self.steiner])

    @property
    def length(self):
        return tree_length(self)

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def adjacency(self):
        adj = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges.tolist():
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_spanning_tree(self):
        """True when the edges form a tree over every vertex."""
        n = self.n_vertices
        if len(self.edges) != n - 1:
            return False
        if np.any(self.edges < 0) or np.any(self.edges >= n) or np.any(self.edges[:, 0] == self.edges[:, 1]):
            return False
        uf = UnionFind(n)
        return all(uf.union(u, v) for u, v in self.edges.tolist())

    def check(self):
        """Raise ``ValueError`` unless this is a spanning tree with no isolated Steiner point."""
        if not self.is_spanning_tree():
            raise ValueError(
                f"edges do not form a spanning tree over {self.n_vertices} vertices "
                f"({len(self.edges)} edges)"
            )
        if self.n_vertices > 1 and np.any(self.degrees()[self.n_terminals:] < 1):
            raise ValueError("a Steiner point has no incident edge")
        return self

    def with_steiner(self, steiner):
        return Tree(self.terminals, steiner, self.edges)

    def copy(self):
        return Tree(self.terminals.copy(), self.steiner.copy(), self.edges.copy())


def tree_length(tree):
    """Total hyperbolic edge length, summed in sorted order so edge order does not matter."""
    if len(tree.edges) == 0:
        return 0.0
    pts = tree.points
    e = tree.edges
    d = np.atleast_1d(distance(pts[e[:, 0]], pts[e[:, 1]]))
    return float(np.sum(np.sort(d)))


def mst_tree(terminals, mst_edges):
    """Wrap a terminal spanning tree as a :class:`Tree` without Steiner points."""
    return Tree(terminals, np.empty((0, 2)), np.asarray(mst_edges.pairs, dtype=int))
