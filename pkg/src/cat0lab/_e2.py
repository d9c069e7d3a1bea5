"""Euclidean-plane kernel.

Points are complex numbers, boundary points are angles in [0, 2pi), and
isometries are pairs (rotation angle, translation vector) acting by
z -> e^{i a} z + v.  Only orientation-preserving isometries are modelled.
"""

from __future__ import annotations

import cmath
import math

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    return t + TWO_PI if t < 0 else t


def circle_gap(a: float, b: float) -> float:
    """Arc distance between two angles, in [0, pi]."""
    d = abs(wrap_angle(a) - wrap_angle(b))
    return min(d, TWO_PI - d)


def dist(p: complex, q: complex) -> float:
    return abs(p - q)


def geodesic_point(p: complex, q: complex, t: float) -> complex:
    d = abs(q - p)
    if d == 0.0:
        return p
    return p + (q - p) * (t / d)


def ray_point(x: complex, theta: float, t: float) -> complex:
    return x + t * cmath.exp(1j * theta)


def direction(x: complex, y: complex) -> float:
    return wrap_angle(cmath.phase(y - x))


def horofunction(theta: float, x: complex, z: complex) -> float:
    return ((x - z) * cmath.exp(-1j * theta)).real


# -- isometries: data = (alpha, v) with v complex ---------------------------

def apply(iso, p: complex) -> complex:
    alpha, v = iso
    return cmath.exp(1j * alpha) * p + v


def apply_boundary(iso, theta: float) -> float:
    alpha, _ = iso
    return wrap_angle(theta + alpha)


def compose(g, h):
    a1, v1 = g
    a2, v2 = h
    return (wrap_angle(a1 + a2), cmath.exp(1j * a1) * v2 + v1)


def inverse(g):
    a, v = g
    return (wrap_angle(-a), -cmath.exp(-1j * a) * v)


def is_rotationless(g, tol: float) -> bool:
    return circle_gap(g[0], 0.0) <= tol


def tits(theta1: float, theta2: float) -> float:
    return circle_gap(theta1, theta2)


def axis_coordinate(v: complex, p: complex) -> float:
    """Signed position of the projection of p on the line through the
    origin with direction v (the canonical axis of the translation by v)."""
    u = v / abs(v)
    return (p * u.conjugate()).real


def axis_offset(v: complex, p: complex) -> float:
    u = v / abs(v)
    return abs((p * u.conjugate()).imag)
