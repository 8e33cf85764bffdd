"""Local full Steiner trees: isoptic curves, Fermat points and 4-point FSTs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .klein import EPS_BOUNDARY, DegenerateEdgeError, angle_at, barycenter, distance

logger = logging.getLogger(__name__)

ALPHA = 2.0 * math.pi / 3.0
COS_ALPHA = math.cos(ALPHA)
ANGLE_TOL = 1e-6
COLLAPSE_TOL = 1e-10
_COLLAPSED = "collapsed"
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class IsopticParams:
    x: tuple
    y: tuple
    alpha: float = ALPHA

    def __post_init__(self):
        if not 0.0 < self.alpha < math.pi:
            raise ValueError(f"alpha must lie in (0, pi), got {self.alpha}")
        if tuple(map(float, self.x)) == tuple(map(float, self.y)):
            raise ValueError("isoptic foci must be distinct")


@dataclass
class LocalFst:
    """Full Steiner tree on 3 or 4 terminals.

    Vertex indices in ``edges`` run over ``terminals`` followed by ``steiner``.
    """

    terminals: np.ndarray
    steiner: np.ndarray
    edges: list
    length: float

    @property
    def points(self):
        return np.vstack([self.terminals, self.steiner])


def _lor(ax, ay, bx, by):
    return -1.0 + ax * bx + ay * by


def isoptic_eval(params, s):
    """Isoptic polynomial of the Klein model.

    ``phi(s) = <x,s><y,s> - <x,y><s,s>
    - cos(alpha) sqrt((<x,s>^2 - <x,x><s,s>)(<y,s>^2 - <y,y><s,s>))``,
    which equals ``sqrt(...) * (cos(angle xsy) - cos(alpha))`` and so
    vanishes exactly where the segment ``xy`` subtends ``alpha`` at ``s``.
    """
    xx_, xy_ = float(params.x[0]), float(params.x[1])
    yx_, yy_ = float(params.y[0]), float(params.y[1])
    sx, sy = float(s[0]), float(s[1])
    if (sx, sy) in ((xx_, xy_), (yx_, yy_)):
        raise DegenerateEdgeError("isoptic_eval: s coincides with a focus")
    xs = _lor(xx_, xy_, sx, sy)
    ys = _lor(yx_, yy_, sx, sy)
    ss = _lor(sx, sy, sx, sy)
    p1 = xs * xs - _lor(xx_, xy_, xx_, xy_) * ss
    p2 = ys * ys - _lor(yx_, yy_, yx_, yy_) * ss
    lin = xs * ys - _lor(xx_, xy_, yx_, yy_) * ss
    return lin - math.cos(params.alpha) * math.sqrt(max(p1 * p2, 0.0))


def _cos_and_grad(x, y, s):
    """``cos`` of the angle subtended by ``xy`` at ``s`` and its gradient in ``s``.

    Same value as the isoptic ratio, but built from the chords ``x - s`` and
    ``y - s`` with the metric at ``s``, which avoids cancellation when the
    triangle is tiny.
    """
    sx, sy = s
    ux, uy = x[0] - sx, x[1] - sy
    wx, wy = y[0] - sx, y[1] - sy
    a = 1.0 - sx * sx - sy * sy
    pu = sx * ux + sy * uy
    pw = sx * wx + sy * wy
    uw = ux * wx + uy * wy
    uu = ux * ux + uy * uy
    ww = wx * wx + wy * wy
    guw = a * uw + pu * pw
    guu = a * uu + pu * pu
    gww = a * ww + pw * pw
    root = math.sqrt(guu * gww)
    c = guw / root
    out = []
    for sk, uk, wk in ((sx, ux, wx), (sy, uy, wy)):
        duw = -2.0 * sk * uw - a * (uk + wk) + (uk - sk) * pw + pu * (wk - sk)
        duu = -2.0 * sk * uu - 2.0 * a * uk + 2.0 * pu * (uk - sk)
        dww = -2.0 * sk * ww - 2.0 * a * wk + 2.0 * pw * (wk - sk)
        out.append(duw / root - 0.5 * c * (duu / guu + dww / gww))
    return c, out[0], out[1]


def _residual(x, y, z, s):
    c1, a11, a12 = _cos_and_grad(x, y, s)
    c2, a21, a22 = _cos_and_grad(y, z, s)
    return (c1 - COS_ALPHA, c2 - COS_ALPHA), (a11, a12, a21, a22)


def admits_fermat(x, y, z):
    """True when every interior angle of triangle ``xyz`` is below 120 degrees."""
    try:
        angles = (angle_at(x, y, z), angle_at(y, z, x), angle_at(z, x, y))
    except DegenerateEdgeError:
        return False
    return max(angles) < ALPHA


def _inside(sx, sy):
    return sx * sx + sy * sy < (1.0 - EPS_BOUNDARY) ** 2


def _newton(x, y, z, s, max_iter, tol):
    """Damped Newton on the isoptic system; returns ``(s, residual_norm)``."""
    try:
        (f1, f2), jac = _residual(x, y, z, s)
    except (ZeroDivisionError, ValueError):
        return s, math.inf
    norm = math.hypot(f1, f2)
    damped = 0
    for _ in range(max_iter):
        if norm < tol or damped >= 3:
            break
        a11, a12, a21, a22 = jac
        det = a11 * a22 - a12 * a21
        if det == 0.0 or not math.isfinite(det):
            break
        dx = (a22 * f1 - a12 * f2) / det
        dy = (a11 * f2 - a21 * f1) / det
        step = 1.0
        accepted = False
        for _ in range(30):
            cand = (s[0] - step * dx, s[1] - step * dy)
            if _inside(*cand) and cand not in (x, y, z):
                try:
                    (g1, g2), gjac = _residual(x, y, z, cand)
                except (ZeroDivisionError, ValueError):
                    g1 = g2 = math.inf
                gnorm = math.hypot(g1, g2)
                if gnorm < norm:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            break
        # repeated heavy damping means we are outside the basin; let the caller restart
        damped = damped + 1 if step < 1e-3 else 0
        s, f1, f2, jac, norm = cand, g1, g2, gjac, gnorm
    return s, norm


def _boost(m, p, inverse=False):
    """Lorentz boost moving Klein point ``m`` to the origin (or back)."""
    mx, my = m
    g = 1.0 / math.sqrt(1.0 - mx * mx - my * my)
    bx, by = g * mx, g * my
    sign = 1.0 if inverse else -1.0
    px, py = p
    dot = bx * px + by * py
    x0 = g + sign * dot
    k = dot / (1.0 + g) + sign
    return ((px + k * bx) / x0, (py + k * by) / x0)


def _boost_matrix(c):
    # Lorentz boost taking the apex to the hyperboloid lift of Klein point c
    g = 1.0 / math.sqrt(1.0 - c[0] * c[0] - c[1] * c[1])
    return _boost_lift(g, g * np.asarray(c, dtype=float))


def _boost_lift(x0, xs):
    out = np.empty((3, 3))
    out[0, 0] = x0
    out[0, 1:] = xs
    out[1:, 0] = xs
    out[1:, 1:] = np.eye(2) + np.outer(xs, xs) / (1.0 + x0)
    return out


def _mat3(a, b):
    return [[a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] for j in range(3)] for i in range(3)]


def _to_local(lifts, frame):
    # rows of lifts @ (J frame J), i.e. the points seen from the frame's chart
    j = (-1.0, 1.0, 1.0)
    out = []
    for l in lifts:
        out.append(tuple(
            sum(l[k] * j[k] * frame[k][c] * j[c] for k in range(3)) for c in range(3)
        ))
    return out


def _boost_rows(x0, vx, vy):
    k = 1.0 / (1.0 + x0)
    return [[x0, vx, vy], [vx, 1.0 + vx * vx * k, vx * vy * k], [vy, vx * vy * k, 1.0 + vy * vy * k]]


def _weiszfeld(lifts, frame, steps):
    """Riemannian Weiszfeld steps on the sum of distances.

    ``lifts`` are unit hyperboloid points and ``frame`` maps the working
    chart to the original one.  Each step re-centres the chart at the
    iterate, where the metric is Euclidean and ``log_s(p) / d(s, p)`` is the
    unit direction to ``p``.  Returns the new frame, or ``None`` if the
    iterate lands on a vertex.
    """
    for _ in range(steps):
        local = _to_local(lifts, frame)
        ux = uy = inv = f0 = 0.0
        for x0, px, py in local:
            sn = math.hypot(px, py)
            d = math.acosh(max(x0, 1.0))
            if sn < 1e-15 or d == 0.0:
                return None
            ux += px / sn
            uy += py / sn
            inv += 1.0 / d
            f0 += d
        vx, vy = ux / inv, uy / inv
        t = math.hypot(vx, vy)
        if t < 1e-15:
            break
        vx /= t
        vy /= t
        # the plain step can overshoot on huge triangles; halve until the sum drops
        while t > 1e-14:
            ch, sh = math.cosh(t), math.sinh(t)
            f = sum(math.acosh(max(ch * x0 - sh * (px * vx + py * vy), 1.0)) for x0, px, py in local)
            if f <= f0:
                break
            t *= 0.5
        else:
            break
        sh = math.sinh(t)
        frame = _mat3(frame, _boost_rows(math.cosh(t), vx * sh, vy * sh))
    return frame


def fermat_point(x, y, z, init=None, max_iter=100, tol=1e-12):
    """Fermat point of a Klein triangle, or ``None`` if it degenerates.

    Solves the two isoptic equations for the pairs ``(x, y)`` and ``(y, z)``
    at angle 2 pi / 3 with damped Newton steps (analytic Jacobian, step
    halving while the residual grows), starting at the hyperbolic
    barycenter or ``init``.  The solve runs in the isometric chart that puts
    the barycenter at the origin.  If Newton stalls, Weiszfeld steps on the
    distance sum move the start into Newton's basin and the solve is
    repeated from there.  Those steps re-centre the chart at every iterate,
    which keeps very large triangles near the boundary well conditioned.

    ``None`` is returned when some interior angle is at least 120 degrees,
    when no root is found, or when the root does not see all three pairs at
    120 degrees.
    """
    x = (float(x[0]), float(x[1]))
    y = (float(y[0]), float(y[1]))
    z = (float(z[0]), float(z[1]))
    if x == y or y == z or x == z or not admits_fermat(x, y, z):
        return None
    m = tuple(barycenter(x, y, z).tolist())
    tx, ty, tz = _boost(m, x), _boost(m, y), _boost(m, z)
    start = (0.0, 0.0)
    if init is not None and _inside(float(init[0]), float(init[1])):
        start = _boost(m, (float(init[0]), float(init[1])))
    s, norm = _newton(tx, ty, tz, start, max_iter, tol)
    frame = _boost_matrix(m)
    if norm > RESIDUAL_TOL:
        lifts = []
        for px, py in (x, y, z):
            g = 1.0 / math.sqrt(1.0 - px * px - py * py)
            lifts.append((g, g * px, g * py))
        best = (norm, s, frame, (tx, ty, tz))
        walker = (frame @ _boost_matrix(start)).tolist()
        for rounds in range(1, 11):
            walker = _weiszfeld(lifts, walker, 5 * rounds)
            if walker is None:
                break
            pts = tuple((px / x0, py / x0) for x0, px, py in _to_local(lifts, walker))
            cand, cnorm = _newton(*pts, (0.0, 0.0), max_iter, tol)
            if cnorm < best[0]:
                best = (cnorm, cand, walker, pts)
            if cnorm <= RESIDUAL_TOL:
                break
        norm, s, frame, (tx, ty, tz) = best
    if norm > RESIDUAL_TOL:
        logger.debug("fermat_point: no convergence (|F|=%.3g)", norm)
        return None
    try:
        angles = (angle_at(s, tx, ty), angle_at(s, ty, tz), angle_at(s, tz, tx))
    except DegenerateEdgeError:
        return None
    if max(abs(a - ALPHA) for a in angles) > ANGLE_TOL:
        logger.debug("fermat_point: spurious root with angles %s", angles)
        return None
    h = np.asarray(frame) @ np.array([1.0, s[0], s[1]])
    out = (float(h[1] / h[0]), float(h[2] / h[0]))
    if not _inside(*out) or out in (x, y, z):
        return None
    return np.array(out)


def fst3(x, y, z):
    """3-terminal full Steiner tree (a star at the Fermat point), or ``None``."""
    s = fermat_point(x, y, z)
    if s is None:
        return None
    terminals = np.array([x, y, z], dtype=float)
    length = float(np.sum(distance(terminals, s)))
    return LocalFst(terminals, s[None, :], [(0, 3), (1, 3), (2, 3)], length)


def _tree_terms(allp, heads, tails):
    # chart gradient of d(head, tail) with respect to the head, batched
    p = allp[..., heads, :]
    w = allp[..., tails, :] - p
    a = 1.0 - np.sum(p * p, axis=-1)
    pw = np.sum(p * w, axis=-1)
    gw = w / a[..., None] + p * (pw / (a * a))[..., None]
    return -gw / np.sqrt(np.sum(w * gw, axis=-1))[..., None]


def _pair_grad(pts, x, heads, tails, owner):
    """Gradient of the 4-terminal tree length in the flattened Steiner coords.

    ``x`` has shape ``(..., 4)``; only terms whose head is a Steiner point
    contribute.
    """
    lead = x.shape[:-1]
    allp = np.concatenate([np.broadcast_to(pts, lead + pts.shape), x.reshape(lead + (2, 2))], axis=-2)
    terms = _tree_terms(allp, heads, tails)
    grad = np.zeros(lead + (2, 2))
    for slot in (0, 1):
        grad[..., slot, :] = terms[..., owner == slot, :].sum(axis=-2)
    return grad.reshape(lead + (4,))


def _polish_pair(pts, s1, s2, edges, max_iter=12, tol=1e-11):
    """Joint damped Newton on both Steiner points of a 4-terminal tree.

    Uses the analytic gradient and a central-difference Hessian, shifted by
    a multiple of the identity until it gives a descent direction, with
    backtracking on the tree length.  Returns ``(s1, s2)``, ``None`` when
    Newton does not reach ``tol``, or ``_COLLAPSED`` when some edge shrinks
    towards zero (the optimum for this topology is not a full tree).
    """
    e = np.array(edges)
    directed = np.concatenate([e, e[:, ::-1]])
    directed = directed[directed[:, 0] >= 4]
    heads, tails = directed[:, 0], directed[:, 1]
    owner = heads - 4

    def length(z):
        allp = np.vstack([pts, z.reshape(2, 2)])
        return float(np.sum(distance(allp[e[:, 0]], allp[e[:, 1]])))

    x = np.concatenate([s1, s2])
    f0 = length(x)
    for _ in range(max_iter):
        q = x.reshape(2, 2)
        allp = np.vstack([pts, q])
        # an edge this short relative to the tree means the topology is degenerating
        shortest = float(np.min(distance(allp[e[:, 0]], allp[e[:, 1]])))
        if shortest < max(1e-6 * f0, COLLAPSE_TOL):
            return _COLLAPSED
        g = _pair_grad(pts, x, heads, tails, owner)
        if not np.all(np.isfinite(g)):
            return None
        scale = np.repeat(1.0 - np.sum(q * q, axis=1), 2)
        if np.max(np.abs(g) * scale) < tol:
            return x[:2].copy(), x[2:].copy()
        h = 1e-6 * scale
        probes = np.concatenate([x + np.diag(h), x - np.diag(h)])
        gp = _pair_grad(pts, probes, heads, tails, owner)
        hess = ((gp[:4] - gp[4:]) / (2.0 * h)[:, None]).T
        hess = 0.5 * (hess + hess.T)
        step = None
        mu = 0.0
        for _ in range(20):
            try:
                cand = -np.linalg.solve(hess + mu * np.eye(4), g)
            except np.linalg.LinAlgError:
                cand = None
            if cand is not None and np.all(np.isfinite(cand)) and cand @ g < 0.0:
                step = cand
                break
            mu = max(2.0 * mu, 1e-8 * float(np.max(np.abs(np.diag(hess)))) + 1e-12)
        if step is None:
            return None
        slope = float(step @ g)
        # all backtracking candidates t = 1, 1/2, ... at once
        ts = 0.5 ** np.arange(40)
        cands = x + ts[:, None] * step
        cq = cands.reshape(-1, 2, 2)
        inside = np.all(np.sum(cq * cq, axis=2) < (1.0 - EPS_BOUNDARY) ** 2, axis=1)
        allp = np.concatenate([np.broadcast_to(pts, (len(ts), 4, 2)), cq], axis=1)
        with np.errstate(all="ignore"):
            lengths = np.sum(distance(allp[:, e[:, 0]], allp[:, e[:, 1]]), axis=1)
        ok = inside & (lengths <= f0 + 1e-4 * ts * slope)
        if not ok.any():
            return None
        first = int(np.argmax(ok))
        if float(np.hypot(*(cq[first, 0] - cq[first, 1]))) <= COLLAPSE_TOL:
            return _COLLAPSED
        cand, fc = cands[first], float(lengths[first])
        x, f0 = cand, fc
    return None


def fst4(a, b, c, d, topology=((0, 1), (2, 3)), rounds=3):
    """4-terminal full Steiner tree for a fixed pairing, or ``None``.

    ``topology`` pairs terminal indices: ``s1`` joins the first pair and
    ``s2``, ``s2`` joins the second pair and ``s1``.  Fermat sub-problems
    are alternated for ``rounds`` rounds, starting from each pair's
    barycenter with the opposite pair's midpoint.  Both points are then
    refined together by Newton on the tree length, so that each meets its
    three edges at 120 degrees.  ``None`` is returned if a sub-problem
    degenerates, the Steiner points collapse or the refinement fails.
    """
    pts = np.array([a, b, c, d], dtype=float)
    (i, j), (k, l) = topology
    if sorted((i, j, k, l)) != [0, 1, 2, 3]:
        raise ValueError(f"topology {topology!r} is not a pairing of 0..3")
    pi, pj, pk, pl = pts[i], pts[j], pts[k], pts[l]
    edges = [(i, 4), (j, 4), (k, 5), (l, 5), (4, 5)]
    s1 = barycenter(pi, pj, barycenter(pk, pl))
    s2 = barycenter(pk, pl, barycenter(pi, pj))
    for _ in range(rounds):
        s1 = fermat_point(pi, pj, s2, init=s1)
        if s1 is None:
            return None
        s2 = fermat_point(pk, pl, s1, init=s2)
        if s2 is None:
            return None
    with np.errstate(all="ignore"):
        joint = _polish_pair(pts, s1, s2, edges)
    if joint is None or joint is _COLLAPSED:
        logger.debug("fst4: topology %s rejected (%s)", topology, joint or "no convergence")
        return None
    s1, s2 = joint
    for s, (u, v), other in ((s1, (pi, pj), s2), (s2, (pk, pl), s1)):
        try:
            angles = (angle_at(s, u, v), angle_at(s, v, other), angle_at(s, other, u))
        except DegenerateEdgeError:
            return None
        if max(abs(t - ALPHA) for t in angles) > ANGLE_TOL:
            return None
    steiner = np.array([s1, s2])
    allp = np.vstack([pts, steiner])
    e = np.array(edges)
    length = float(np.sum(np.sort(distance(allp[e[:, 0]], allp[e[:, 1]]))))
    return LocalFst(pts, steiner, edges, length)


def convex_pairings(points):
    """The two non-crossing pairings of four points, in angular order."""
    pts = np.asarray(points, dtype=float)
    centre = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0]), kind="stable")
    o = [int(v) for v in order]
    return ((o[0], o[1]), (o[2], o[3])), ((o[1], o[2]), (o[3], o[0]))


def best_fst4(points):
    """Shorter of the two non-crossing 4-point FSTs, or ``None`` if neither exists."""
    best = None
    for topo in convex_pairings(points):
        f = fst4(*points, topology=topo)
        if f is not None and (best is None or f.length < best.length):
            best = f
    return best
