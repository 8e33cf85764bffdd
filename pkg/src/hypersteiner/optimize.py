"""Fixed-topology refinement of Steiner points by Riemannian gradient descent."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .klein import DegenerateEdgeError, distance, exp_map, retract

logger = logging.getLogger(__name__)

COLLAPSE_EDGE = 1e-12


class CollapsedEdgeError(DegenerateEdgeError):
    """An edge at a Steiner point has (numerically) zero length.

    ``u`` and ``v`` are the vertex indices of the offending edge.
    """

    def __init__(self, u, v, length):
        super().__init__(f"edge ({u}, {v}) collapsed to length {length:.3g}")
        self.u = int(u)
        self.v = int(v)
        self.length = float(length)


@dataclass(frozen=True)
class GdConfig:
    """Gradient descent settings.

    ``threshold`` is an absolute length improvement; ``patience`` counts
    consecutive epochs without an improvement of at least that size.
    """

    max_epochs: int = 10000
    learning_rate: float = 1e-2
    patience: int = 100
    threshold: float = 1e-6
    use_retraction: bool = False
    max_step: float = 1.0

    def __post_init__(self):
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        if not self.max_step > 0:
            raise ValueError(f"max_step must be positive, got {self.max_step}")

    def to_dict(self):
        return asdict(self)


class _Objective:
    # edge index arrays of a fixed topology, reused across epochs

    def __init__(self, tree):
        self.n = tree.n_terminals
        self.m = len(tree.steiner)
        self.buf = np.vstack([tree.terminals, tree.steiner])
        e = tree.edges
        moving = (e[:, 0] >= self.n) | (e[:, 1] >= self.n)
        self.u = e[moving, 0]
        self.v = e[moving, 1]
        fixed = e[~moving]
        self.fixed = 0.0
        if len(fixed):
            self.fixed = float(np.sum(np.atleast_1d(distance(self.buf[fixed[:, 0]], self.buf[fixed[:, 1]]))))
        # directed edge ends that sit on Steiner points
        heads = np.concatenate([e[:, 0], e[:, 1]])
        tails = np.concatenate([e[:, 1], e[:, 0]])
        keep = heads >= self.n
        self.heads = heads[keep]
        self.tails = tails[keep]
        self.slot = self.heads - self.n

    def length(self, steiner):
        self.buf[self.n:] = steiner
        if len(self.u) == 0:
            return self.fixed
        return self.fixed + float(np.sum(distance(self.buf[self.u], self.buf[self.v])))

    def gradient(self, steiner):
        pts = self.buf
        pts[self.n:] = steiner
        if len(self.heads) == 0:
            return np.zeros((self.m, 2))
        s = pts[self.heads]
        w = pts[self.tails] - s
        sx, sy, wx, wy = s[:, 0], s[:, 1], w[:, 0], w[:, 1]
        a = 1.0 - sx * sx - sy * sy
        sw = sx * wx + sy * wy
        norm = np.sqrt((wx * wx + wy * wy) / a + sw * sw / (a * a))
        # the metric chord norm bounds the distance from above
        near = np.flatnonzero(norm < 1e-9)
        if near.size:
            d = np.atleast_1d(distance(s[near], pts[self.tails[near]]))
            bad = near[(d < COLLAPSE_EDGE) | (norm[near] == 0.0)]
            if bad.size:
                k = int(bad[0])
                raise CollapsedEdgeError(self.heads[k], self.tails[k], float(distance(s[k], pts[self.tails[k]])))
        # -log_s(q) / d(s, q) is minus the metric-unit chord direction
        grad = np.empty((self.m, 2))
        grad[:, 0] = np.bincount(self.slot, weights=-wx / norm, minlength=self.m)
        grad[:, 1] = np.bincount(self.slot, weights=-wy / norm, minlength=self.m)
        return grad


def grad_tree_length(tree):
    """Riemannian gradient of the tree length at each Steiner point.

    Row ``k`` is a tangent vector at ``tree.steiner[k]`` (Klein chart
    coordinates): the sum over incident edges of the metric-unit direction
    pointing away from the neighbour.

    Raises :class:`CollapsedEdgeError` when an incident edge is shorter
    than ``1e-12``.
    """
    return _Objective(tree).gradient(tree.steiner)


def _cap_steps(steiner, step, max_step):
    a = 1.0 - np.sum(steiner * steiner, axis=1)
    sv = np.sum(steiner * step, axis=1)
    norm = np.sqrt(np.sum(step * step, axis=1) / a + sv * sv / (a * a))
    scale = np.minimum(1.0, max_step / np.maximum(norm, 1e-300))
    return step * scale[:, None]


def _edge_lengths(x, y, u, v):
    # hyperbolic lengths of edges (u, v) given coordinate columns, as in klein.distance
    ux, uy, vx, vy = x[u], y[u], x[v], y[v]
    dx, dy = vx - ux, vy - uy
    a = 1.0 - ux * ux - uy * uy
    b = 1.0 - vx * vx - vy * vy
    cross = ux * dy - uy * dx
    root = np.sqrt(a * b)
    m = (dx * dx + dy * dy - cross * cross) / ((1.0 - ux * vx - uy * vy + root) * root)
    np.maximum(m, 0.0, out=m)
    return np.log1p(m + np.sqrt(m * (m + 2.0)))


def optimize_steiner(tree, config=None, history=None):
    """Move the Steiner points of ``tree`` downhill with its topology fixed.

    Each epoch applies ``S <- exp_S(-eta grad L(S))`` (or the chart
    retraction), with every per-point step capped at metric norm
    ``config.max_step``.  Stops after ``max_epochs`` or once the best length
    has not improved by ``threshold`` for ``patience`` epochs, and returns
    the best configuration seen.  Terminals are never touched.

    If ``history`` is a list, the best length after each epoch is appended.

    Raises :class:`CollapsedEdgeError` if an edge at a Steiner point shrinks
    below ``1e-12``.
    """
    config = config or GdConfig()
    if len(tree.steiner) == 0 or config.max_epochs == 0:
        return tree.copy()
    obj = _Objective(tree)
    n, m = obj.n, obj.m
    x = obj.buf[:, 0].copy()
    y = obj.buf[:, 1].copy()
    heads, tails, slot = obj.heads, obj.tails, obj.slot
    u, v = obj.u, obj.v
    eta = config.learning_rate
    cap = config.max_step
    best = obj.fixed + float(_edge_lengths(x, y, u, v).sum())
    best_x, best_y = x[n:].copy(), y[n:].copy()
    reference = best
    stale = 0
    for _ in range(config.max_epochs):
        sx, sy = x[heads], y[heads]
        wx, wy = x[tails] - sx, y[tails] - sy
        a = 1.0 - sx * sx - sy * sy
        sw = sx * wx + sy * wy
        norm = np.sqrt((wx * wx + wy * wy) / a + sw * sw / (a * a))
        if norm.min() < 1e-9:
            obj.gradient(np.column_stack([x[n:], y[n:]]))
        gx = np.bincount(slot, weights=wx / norm, minlength=m)
        gy = np.bincount(slot, weights=wy / norm, minlength=m)
        # descent step -eta * grad; the gradient is minus the sum of unit chords
        px, py = x[n:], y[n:]
        vx, vy = eta * gx, eta * gy
        pa = 1.0 - px * px - py * py
        pv = px * vx + py * vy
        t = np.sqrt((vx * vx + vy * vy) / pa + pv * pv / (pa * pa))
        over = t > cap
        if over.any():
            scale = np.where(over, cap / np.where(over, t, 1.0), 1.0)
            vx, vy, pv, t = vx * scale, vy * scale, pv * scale, np.minimum(t, cap)
        if config.use_retraction:
            nxt = retract(np.column_stack([px, py]), np.column_stack([vx, vy]))
            nx, ny = nxt[:, 0], nxt[:, 1]
        else:
            c = pv / pa
            safe = np.where(t > 1e-8, t, 1.0)
            k = np.where(t > 1e-8, np.sinh(t) / safe, 1.0 + t * t / 6.0)
            ch = np.cosh(t)
            x0 = ch + k * c
            nx = (ch * px + k * (vx + c * px)) / x0
            ny = (ch * py + k * (vy + c * py)) / x0
        x[n:] = nx
        y[n:] = ny
        cur = obj.fixed + float(_edge_lengths(x, y, u, v).sum())
        if cur < best:
            best = cur
            best_x, best_y = nx.copy(), ny.copy()
        if best < reference - config.threshold:
            reference = best
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
        if history is not None:
            history.append(best)
    return tree.with_steiner(np.column_stack([best_x, best_y]))
