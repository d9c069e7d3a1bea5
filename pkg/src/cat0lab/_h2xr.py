"""Product kernel for the hyperbolic plane times a real line.

Points are pairs (z, h) with z in the upper half-plane and h a real height.
The squared distance is the sum of the squared factor distances.  Boundary
directions are pairs (xi, alpha) with xi a boundary point of the hyperbolic
factor and alpha in [-pi/2, pi/2] the slope toward the +R direction; the
two vertical directions alpha = +-pi/2 have no horizontal component
(xi = None).  Isometries are pairs (matrix, vertical shift).
"""

from __future__ import annotations

import math

from . import _h2
from .errors import UsageError

INF = math.inf
HALF_PI = math.pi / 2.0


def dist(p, q) -> float:
    return math.hypot(_h2.dist(p[0], q[0]), p[1] - q[1])


def geodesic_point(p, q, t: float):
    dh = _h2.dist(p[0], q[0])
    dv = q[1] - p[1]
    d = math.hypot(dh, dv)
    if d == 0.0 or t == 0.0:
        return p
    zh = _h2.geodesic_point(p[0], q[0], t * dh / d) if dh > 0 else p[0]
    return (zh, p[1] + t * dv / d)


def ray_point(x, b, t: float):
    xi, alpha = b
    if xi is None:
        return (x[0], x[1] + t * (1.0 if alpha > 0 else -1.0))
    zh = _h2.ray_point(x[0], xi, t * math.cos(alpha))
    return (zh, x[1] + t * math.sin(alpha))


def direction(x, y):
    dh = _h2.dist(x[0], y[0])
    dv = y[1] - x[1]
    if dh == 0.0:
        return (None, HALF_PI if dv > 0 else -HALF_PI)
    return (_h2.direction(x[0], y[0]), math.atan2(dv, dh))


def horofunction(b, x, z) -> float:
    xi, alpha = b
    vert = math.sin(alpha) * (x[1] - z[1])
    if xi is None:
        return vert
    return math.cos(alpha) * _h2.horofunction(xi, x[0], z[0]) + vert


# -- isometries: data = (matrix, shift) --------------------------------------

def apply(iso, p):
    m, shift = iso
    return (_h2.apply(m, p[0]), p[1] + shift)


def apply_boundary(iso, b):
    xi, alpha = b
    if xi is None:
        return b
    return (_h2.mobius_boundary(iso[0], xi), alpha)


def compose(g, h):
    return (_h2.make_matrix(*_h2.mat_mul(g[0], h[0])), g[1] + h[1])


def inverse(g):
    return (_h2.sign_normalize(_h2.mat_inv(g[0])), -g[1])


def boundary_eq(b1, b2, tol: float) -> bool:
    xi1, a1 = b1
    xi2, a2 = b2
    if (xi1 is None) != (xi2 is None):
        return False
    if xi1 is None:
        return abs(a1 - a2) <= tol
    if math.isinf(xi1) or math.isinf(xi2):
        same = math.isinf(xi1) and math.isinf(xi2)
    else:
        same = abs(xi1 - xi2) <= tol * max(1.0, abs(xi1), abs(xi2))
    return same and abs(a1 - a2) <= tol


def tits(b1, b2, tol: float) -> float:
    xi1, a1 = b1
    xi2, a2 = b2
    same_fiber = (xi1 is None and xi2 is None) or (
        xi1 is not None
        and xi2 is not None
        and (
            (math.isinf(xi1) and math.isinf(xi2))
            or (
                not math.isinf(xi1)
                and not math.isinf(xi2)
                and abs(xi1 - xi2) <= tol * max(1.0, abs(xi1), abs(xi2))
            )
        )
    )
    if same_fiber:
        return abs(a1 - a2)
    # angle between (cos a1, sin a1) and (-cos a2, sin a2) in the flat plane
    # spanned by the geodesic joining the two horizontal ends and the line
    c = -math.cos(a1) * math.cos(a2) + math.sin(a1) * math.sin(a2)
    return math.acos(max(-1.0, min(1.0, c)))


def validate_boundary(xi, alpha: float, tol: float):
    if not -HALF_PI - tol <= alpha <= HALF_PI + tol:
        raise UsageError("slope must lie in [-pi/2, pi/2]")
    alpha = max(-HALF_PI, min(HALF_PI, alpha))
    if abs(abs(alpha) - HALF_PI) <= tol:
        return (None, HALF_PI if alpha > 0 else -HALF_PI)
    if xi is None:
        raise UsageError("a horizontal component is required unless the slope is +-pi/2")
    return (float(xi), float(alpha))
