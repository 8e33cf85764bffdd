"""Synthetic terminal sets and point-file I/O."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .klein import EPS_BOUNDARY, GaussianSpec, check_points, poincare_to_klein, sample_wrapped_gaussian

KINDS = ("centered_gaussian", "boundary_mixture", "polygon_one_per_vertex", "transition_sweep", "file")
SWEEP_T = (0.6, 0.8, 0.95, 0.99, 1 - 1e-5, 1 - 1e-10)
SWEEP_PER_CLUSTER = 20


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for a terminal set.

    ``kind`` selects the generator:

    * ``centered_gaussian``: ``n`` draws from a wrapped normal at the origin.
    * ``boundary_mixture``: ``n`` points over ``d`` wrapped normals centred
      at ``t * exp(2 pi i k / d)``; counts per cluster differ by at most one
      (lower cluster indices take the remainder) unless ``allocation`` is
      ``"random"``.
    * ``polygon_one_per_vertex``: one draw per cluster, so ``n == d``.
    * ``transition_sweep``: 20 draws per cluster.
    * ``file``: points read from ``path`` (see :func:`read_points`).
    """

    kind: str
    n: int = 0
    sigma: float = 0.1
    t: float = 0.0
    d: int = 1
    seed: int = 0
    path: str | None = None
    poincare: bool = False
    allocation: str = "equal"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "file":
            if not self.path:
                raise ValueError("file datasets need a path")
            return
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if self.kind != "centered_gaussian":
            if self.d < 1:
                raise ValueError(f"cluster count d must be >= 1, got {self.d}")
            if not 0.0 <= self.t < 1.0 - EPS_BOUNDARY:
                raise ValueError(f"t must lie in [0, 1 - {EPS_BOUNDARY:g}), got {self.t!r}")
        if self.kind == "polygon_one_per_vertex" and self.n not in (0, self.d):
            raise ValueError(f"polygon datasets have n == d, got n={self.n}, d={self.d}")
        if self.kind in ("centered_gaussian", "boundary_mixture") and self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.kind == "centered_gaussian" and self.sigma == 0:
            raise ValueError("centered_gaussian needs sigma > 0")
        if self.allocation not in ("equal", "random"):
            raise ValueError(f"allocation must be 'equal' or 'random', got {self.allocation!r}")

    @property
    def size(self):
        if self.kind == "polygon_one_per_vertex":
            return self.d
        if self.kind == "transition_sweep":
            return SWEEP_PER_CLUSTER * self.d
        return self.n

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    @property
    def digest(self):
        """Short stable label used in benchmark tables."""
        if self.kind == "file":
            body = f"file:{self.path}"
        else:
            body = f"{self.kind}(n={self.size},d={self.d},t={self.t!r},sigma={self.sigma!r})"
        h = hashlib.sha1(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:8]
        return f"{body}#{h}"


def cluster_means(d, t):
    k = np.arange(d)
    ang = 2.0 * np.pi * k / d
    return t * np.column_stack([np.cos(ang), np.sin(ang)])


def cluster_counts(n, d):
    base, extra = divmod(n, d)
    return [base + (1 if k < extra else 0) for k in range(d)]


def _draw(mu, sigma, count, rng):
    if count == 0:
        return np.empty((0, 2))
    if sigma == 0:
        return np.repeat(np.asarray(mu, dtype=float)[None], count, axis=0)
    return sample_wrapped_gaussian(GaussianSpec(tuple(mu), sigma), rng, size=count)


def generate(spec):
    """Klein coordinates of the terminal set described by ``spec``, shape ``(n, 2)``."""
    if spec.kind == "file":
        return read_points(spec.path, poincare=spec.poincare)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "centered_gaussian":
        return _draw((0.0, 0.0), spec.sigma, spec.n, rng)
    means = cluster_means(spec.d, spec.t)
    if spec.kind == "polygon_one_per_vertex":
        counts = [1] * spec.d
    elif spec.kind == "transition_sweep":
        counts = [SWEEP_PER_CLUSTER] * spec.d
    elif spec.allocation == "random":
        counts = np.bincount(rng.integers(0, spec.d, size=spec.n), minlength=spec.d).tolist()
    else:
        counts = cluster_counts(spec.n, spec.d)
    return np.vstack([_draw(mu, spec.sigma, c, rng) for mu, c in zip(means, counts)])


def read_points(path, poincare=False):
    """Read a ``x,y`` CSV of points strictly inside the unit disk.

    With ``poincare=True`` the rows are Poincare-disk coordinates and are
    mapped to the Klein model on load.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["x", "y"]:
            raise ValueError(f"{path}: expected header 'x,y', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    pts = np.array(rows, dtype=float).reshape(-1, 2)
    if poincare:
        norms = np.hypot(pts[:, 0], pts[:, 1])
        if np.any(norms >= 1.0):
            bad = int(np.argmax(norms >= 1.0))
            raise ValueError(f"{path}: row {bad + 2} lies outside the Poincare disk")
        pts = poincare_to_klein(pts)
    return check_points(pts, path)


def write_points(path, points):
    pts = np.asarray(points, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in pts:
            writer.writerow([repr(float(x)), repr(float(y))])
