"""Klein-Beltrami disk primitives.

Points are plain ``numpy`` arrays whose last axis has length 2; every
function broadcasts over leading axes.  Tangent vectors at a point are
expressed in the same Euclidean chart, so the chord direction ``q - p`` is
the tangent of the geodesic from ``p`` to ``q``.

Exponential and logarithm maps go through the hyperboloid model
``u -> gamma(u) * (1, u)`` where closed-form geodesics are available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS_BOUNDARY = 1e-12
_MAX_RESAMPLE = 100


class DegenerateEdgeError(ValueError):
    """Raised when an operation needs two distinct points but got one."""


def check_points(points, name="points"):
    """Validate an ``(n, 2)`` array of Klein coordinates.

    Raises ``ValueError`` for non-finite values or points outside the open
    disk shrunk by ``EPS_BOUNDARY``.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    norms = np.hypot(arr[:, 0], arr[:, 1])
    bad = np.flatnonzero(norms >= 1.0 - EPS_BOUNDARY)
    if bad.size:
        raise ValueError(
            f"{name}[{bad[0]}] has Euclidean norm {norms[bad[0]]!r}, "
            f"outside the Klein disk (limit 1 - {EPS_BOUNDARY:g})"
        )
    return arr


def lorentzian_inner(x, y):
    """Lorentzian product of homogeneous coordinates ``(1, x)`` and ``(1, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -1.0 + np.sum(x * y, axis=-1)


def gamma(p):
    """Lorentz factor ``1 / sqrt(1 - |p|^2)``."""
    p = np.asarray(p, dtype=float)
    return 1.0 / np.sqrt(1.0 - np.sum(p * p, axis=-1))


def _cosh_minus_one(x, y):
    # cosh d - 1 written so that nearby points do not cancel:
    # (1 - x.y)^2 - AB = |y - x|^2 - (x cross (y - x))^2.
    a = 1.0 - np.sum(x * x, axis=-1)
    b = 1.0 - np.sum(y * y, axis=-1)
    delta = y - x
    cross = x[..., 0] * delta[..., 1] - x[..., 1] * delta[..., 0]
    num = np.sum(delta * delta, axis=-1) - cross * cross
    root = np.sqrt(a * b)
    den = (1.0 - np.sum(x * y, axis=-1) + root) * root
    return np.maximum(num / den, 0.0)


def distance(x, y):
    """Hyperbolic distance between Klein points (curvature -1).

    Equal to ``arccosh(-<x,y> / sqrt(<x,x><y,y>))``; evaluated through
    ``cosh d - 1`` so the argument never drops below one.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = _cosh_minus_one(x, y)
    d = np.log1p(m + np.sqrt(m * (m + 2.0)))
    return float(d) if np.ndim(d) == 0 else d


def pairwise_distances(points):
    """Dense ``(n, n)`` matrix of hyperbolic distances."""
    pts = np.asarray(points, dtype=float)
    d = distance(pts[:, None, :], pts[None, :, :])
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def metric_norm(base, v):
    """Riemannian norm of tangent vector ``v`` at ``base``."""
    base = np.asarray(base, dtype=float)
    v = np.asarray(v, dtype=float)
    a = 1.0 - np.sum(base * base, axis=-1)
    bv = np.sum(base * v, axis=-1)
    out = np.sqrt(np.sum(v * v, axis=-1) / a + bv * bv / (a * a))
    return float(out) if np.ndim(out) == 0 else out


def metric_inner(base, u, v):
    """Riemannian inner product ``g_base(u, v)``."""
    base = np.asarray(base, dtype=float)
    a = 1.0 - np.sum(base * base, axis=-1)
    bu = np.sum(base * u, axis=-1)
    bv = np.sum(base * v, axis=-1)
    return np.sum(np.asarray(u) * v, axis=-1) / a + bu * bv / (a * a)


def barycenter(*points):
    """Einstein (gyro) barycenter of Klein points with equal masses.

    For two points this is the hyperbolic midpoint.
    """
    pts = np.asarray(points, dtype=float)
    g = gamma(pts)
    return np.tensordot(g, pts, axes=(0, 0)) / np.sum(g, axis=0)


def triangle_barycenters(points, triangles):
    """Barycenters of many index triangles at once, shape ``(m, 2)``."""
    pts = np.asarray(points, dtype=float)
    tri = np.asarray(triangles, dtype=int).reshape(-1, 3)
    g = gamma(pts)
    w = g[tri]
    return np.einsum("mk,mkd->md", w, pts[tri]) / w.sum(axis=1)[:, None]


def angle_at(vertex, a, b):
    """Interior angle at ``vertex`` between the geodesics to ``a`` and ``b``.

    Klein geodesics are chords, so the angle is the angle between the chord
    directions measured with the metric at ``vertex``.  Returns radians in
    ``[0, pi]``.
    """
    vx, vy = float(vertex[0]), float(vertex[1])
    ux, uy = float(a[0]) - vx, float(a[1]) - vy
    wx, wy = float(b[0]) - vx, float(b[1]) - vy
    if (ux == 0.0 and uy == 0.0) or (wx == 0.0 and wy == 0.0):
        raise DegenerateEdgeError("angle_at: zero-length edge at vertex")
    return _angle(vx, vy, ux, uy, wx, wy)


def _angle(vx, vy, ux, uy, wx, wy):
    s = 1.0 - vx * vx - vy * vy
    pu = vx * ux + vy * uy
    pw = vx * wx + vy * wy
    guw = s * (ux * wx + uy * wy) + pu * pw
    guu = s * (ux * ux + uy * uy) + pu * pu
    gww = s * (wx * wx + wy * wy) + pw * pw
    c = guw / math.sqrt(guu * gww)
    return math.acos(min(1.0, max(-1.0, c)))


def to_hyperboloid(p):
    """Lift Klein points to the upper sheet ``-x0^2 + x1^2 + x2^2 = -1``."""
    p = np.asarray(p, dtype=float)
    g = gamma(p)[..., None]
    return np.concatenate([g, g * p], axis=-1)


def from_hyperboloid(x):
    """Project hyperboloid points back to Klein coordinates."""
    x = np.asarray(x, dtype=float)
    return x[..., 1:] / x[..., :1]


def exp_map(base, v):
    """Riemannian exponential at ``base`` of tangent vector ``v``.

    The tangent vector is pushed to the hyperboloid, moved along the
    closed-form geodesic ``cosh(t) X + sinh(t) V / t`` and projected back.
    """
    base = np.asarray(base, dtype=float)
    v = np.asarray(v, dtype=float)
    a = 1.0 - np.sum(base * base, axis=-1)
    bv = np.sum(base * v, axis=-1)
    t = np.sqrt(np.sum(v * v, axis=-1) / a + bv * bv / (a * a))
    c = bv / a
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(t > 1e-8, np.sinh(t) / np.where(t > 0, t, 1.0), 1.0 + t * t / 6.0)
    ch = np.cosh(t)
    x0 = ch + k * c
    xs = ch[..., None] * base + k[..., None] * (v + c[..., None] * base)
    return xs / x0[..., None]


def log_map(base, target):
    """Inverse of :func:`exp_map`: the tangent at ``base`` pointing to ``target``.

    Its metric norm equals ``distance(base, target)``.
    """
    base = np.asarray(base, dtype=float)
    target = np.asarray(target, dtype=float)
    u = target - base
    n = np.asarray(metric_norm(base, u))
    d = np.asarray(distance(base, target))
    scale = np.where(n > 0, d / np.where(n > 0, n, 1.0), 0.0)
    return u * scale[..., None]


def retract(base, v):
    """First-order retraction: step in the Klein chart, pulled back inside the disk."""
    base = np.asarray(base, dtype=float)
    v = np.asarray(v, dtype=float)
    out = base + v
    limit = 1.0 - 1e3 * EPS_BOUNDARY
    norms = np.linalg.norm(out, axis=-1)
    outside = norms >= limit
    if np.any(outside):
        scale = np.ones_like(norms)
        # shrink the step so the point lands halfway to the boundary
        bn = np.linalg.norm(base, axis=-1)
        target = 0.5 * (bn + limit)
        vn = np.linalg.norm(v, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(outside, np.clip((target - bn) / np.maximum(vn, 1e-300), 0.0, 1.0), 1.0)
        out = base + v * scale[..., None]
    return out


def poincare_to_klein(z):
    z = np.asarray(z, dtype=float)
    return 2.0 * z / (1.0 + np.sum(z * z, axis=-1, keepdims=True))


def klein_to_poincare(p):
    p = np.asarray(p, dtype=float)
    s = np.sqrt(np.maximum(1.0 - np.sum(p * p, axis=-1, keepdims=True), 0.0))
    return p / (1.0 + s)


@dataclass(frozen=True)
class GaussianSpec:
    """Wrapped (pseudo-hyperbolic) normal centred at ``mu`` with tangent std ``sigma``."""

    mu: tuple
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        check_points(self.mu, "mu")


def sample_wrapped_gaussian(spec, rng, size=None):
    """Draw from a wrapped normal on the hyperbolic plane.

    A normal vector with std ``spec.sigma`` is drawn in the tangent plane at
    the hyperboloid apex, parallel transported to the lift of ``spec.mu``
    and pushed through the exponential map.  Draws that land within
    ``EPS_BOUNDARY`` of the unit circle are redrawn.

    Parameters
    ----------
    spec : GaussianSpec
    rng : numpy.random.Generator
    size : int, optional
        Number of samples; ``None`` returns a single point of shape ``(2,)``.
    """
    m = 1 if size is None else int(size)
    mu = np.asarray(spec.mu, dtype=float)
    mu_h = to_hyperboloid(mu)
    alpha = mu_h[0]
    out = np.empty((m, 2))
    filled = 0
    for _ in range(_MAX_RESAMPLE):
        need = m - filled
        v = rng.normal(0.0, spec.sigma, size=(need, 2))
        # parallel transport apex -> mu: v + <mu, v>_L / (alpha + 1) * (apex + mu)
        coef = (v @ mu_h[1:]) / (alpha + 1.0)
        u = np.empty((need, 3))
        u[:, 0] = coef * (1.0 + alpha)
        u[:, 1:] = v + coef[:, None] * mu_h[1:]
        r = np.linalg.norm(v, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            k = np.where(r > 1e-8, np.sinh(r) / np.where(r > 0, r, 1.0), 1.0)
        x = np.cosh(r)[:, None] * mu_h + k[:, None] * u
        pts = x[:, 1:] / x[:, :1]
        ok = np.hypot(pts[:, 0], pts[:, 1]) < 1.0 - EPS_BOUNDARY
        good = pts[ok]
        out[filled:filled + len(good)] = good
        filled += len(good)
        if filled == m:
            break
    else:
        raise RuntimeError("wrapped Gaussian kept sampling outside the disk guard")
    return out[0] if size is None else out
