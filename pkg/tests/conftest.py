import cmath
import math

import mpmath
import numpy as np
import pytest


def mp_distance(p, q, dps=60):
    """Klein distance evaluated in high precision arithmetic."""
    with mpmath.workdps(dps):
        px, py = (mpmath.mpf(float(c)) for c in p)
        qx, qy = (mpmath.mpf(float(c)) for c in q)
        num = 1 - px * qx - py * qy
        den = mpmath.sqrt((1 - px * px - py * py) * (1 - qx * qx - qy * qy))
        arg = num / den
        return float(mpmath.acosh(arg if arg > 1 else mpmath.mpf(1)))


def _to_poincare(p):
    r2 = p[0] * p[0] + p[1] * p[1]
    s = 1.0 + math.sqrt(1.0 - r2)
    return complex(p[0] / s, p[1] / s)


def conformal_angle(vertex, a, b):
    """Angle at ``vertex`` computed in the Poincare disk after a Mobius move to the origin."""
    v = _to_poincare(vertex)

    def moved(p):
        z = _to_poincare(p)
        return (z - v) / (1 - v.conjugate() * z)

    za, zb = moved(a), moved(b)
    ang = abs(cmath.phase(za) - cmath.phase(zb))
    return min(ang, 2 * math.pi - ang)


def random_disk_points(rng, n, rmax=0.95):
    r = rmax * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def polygon(n, radius, phase=0.0):
    k = np.arange(n)
    ang = phase + 2 * np.pi * k / n
    return radius * np.column_stack([np.cos(ang), np.sin(ang)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
