"""Boundary machinery: horofunctions, visual neighborhoods, angles at
infinity, Tits distances, boundary metrics, and geodesic witnesses.

Closed forms are implemented per model; the horofunction limit oracle
recomputes the defining limit directly (in multiprecision arithmetic for
the hyperbolic factors, where desk-scale parameters leave the float64
exponent range) and is kept independent of the closed forms it checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _e2, _h2, _h2xr, _t4
from .errors import UsageError
from .geometry import comparison_angle, distance, project_to_ball, ray_point
from .models import (
    INF,
    BoundaryPoint,
    Model,
    Point,
    boundary_points_equal,
    e2_boundary,
    h2_boundary,
    h2xr_boundary,
    same_model,
    t4_boundary,
    tolerance,
)


def horofunction(xi: BoundaryPoint, x: Point, z: Point) -> float:
    """Busemann function of xi normalised to vanish at the basepoint x."""
    model = same_model(xi, x, z)
    if model is Model.E2:
        return _e2.horofunction(xi.data, x.data, z.data)
    if model is Model.H2:
        return _h2.horofunction(xi.data, x.data, z.data)
    if model is Model.T4:
        return float(_t4.horofunction(xi.data, x.data, z.data))
    return _h2xr.horofunction(xi.data, x.data, z.data)


def horofunction_limit_oracle(xi: BoundaryPoint, x: Point, z: Point, t: float) -> float:
    """d(ray(t), z) - t along the ray from x toward xi; converges to the
    horofunction as t grows.  Used as the independent check of the closed
    forms above."""
    model = same_model(xi, x, z)
    if model is Model.E2:
        return distance(ray_point(x, xi, t), z) - t
    if model is Model.T4:
        k = _t4.as_step(t)
        return float(_t4.dist(_t4.ray_point(x.data, xi.data, k), z.data) - k)
    if model is Model.H2:
        return _h2.mp_busemann_limit(xi.data, x.data, z.data, t)
    return _h2xr_mp_limit(xi.data, x.data, z.data, t)


def _h2xr_mp_limit(b, x, z, t: float) -> float:
    import mpmath as mp

    xi, alpha = b
    with mp.workdps(60):
        tt = mp.mpf(t)
        dv = mp.mpf(x[1]) + tt * mp.sin(mp.mpf(alpha)) - mp.mpf(z[1])
        if xi is None:
            dh = mp.mpf(_h2.dist(x[0], z[0]))
        else:
            th = float(tt * mp.cos(mp.mpf(alpha)))
            gh = _h2.mp_busemann_limit(xi, x[0], z[0], th) + th  # = d(ray_h(th), z_h)
            dh = mp.mpf(gh)
        return float(mp.sqrt(dh * dh + dv * dv) - tt)


@dataclass(frozen=True)
class VisualNeighborhood:
    """Basic open set of the visual topology: points whose projection to the
    sphere of radius r around the base lands within eps of the ray point."""

    base: Point
    target: BoundaryPoint
    r: float
    eps: float

    def __post_init__(self):
        same_model(self.base, self.target)
        if not self.r > 0 or not self.eps > 0:
            raise UsageError("visual neighborhood needs positive r and eps")
        if not self.r > self.eps:
            raise UsageError("visual neighborhood needs r > eps")


def visual_contains(u: VisualNeighborhood, target) -> bool:
    if isinstance(target, Point):
        same_model(u.base, target)
        if distance(u.base, target) <= u.r:
            return False
    else:
        same_model(u.base, target)
    anchor = ray_point(u.base, u.target, u.r)
    proj = project_to_ball(u.base, u.r, target)
    return distance(proj, anchor) < u.eps


def neighborhood_nesting_check(x: Point, x2: Point, xi: BoundaryPoint,
                               r: float, eps: float, r2: float,
                               samples: int, seed: int = 0) -> bool:
    """Empirically test the basepoint-change inclusion
    U(x2, xi, r2, eps/3) inside U(x, xi, r, eps) on sampled members."""
    same_model(x, x2, xi)
    if not r2 > r:
        raise UsageError("the inner neighborhood must use a larger radius")
    inner = VisualNeighborhood(x2, xi, r2, eps / 3.0)
    outer = VisualNeighborhood(x, xi, r, eps)
    rng = np.random.default_rng(seed)
    members: list = [xi]
    pool = sample_boundary(x.model, 4 * samples, rng)
    for cand in pool:
        if len(members) >= samples:
            break
        if visual_contains(inner, cand):
            members.append(cand)
    checked = 0
    for b in members:
        if not visual_contains(outer, b):
            return False
        # interior points along the ray toward b stay inside the inner set
        extra = r2 + float(rng.integers(1, 4)) if x.model is Model.T4 else r2 + rng.uniform(0.1, 2.0 * r2)
        z = ray_point(x2, b, extra)
        if visual_contains(inner, z) and not visual_contains(outer, z):
            return False
        checked += 1
    return checked > 0


@dataclass(frozen=True)
class AngleLimit:
    value: float
    monotone_defect: float
    grid: tuple
    values: tuple


def angle_at_infinity(x: Point, xi: BoundaryPoint, eta: BoundaryPoint,
                      t_grid=None) -> AngleLimit:
    """Angle at x between two boundary points, via comparison angles of ray
    points on an increasing grid; the limit value is the last grid value and
    the report carries the worst monotonicity violation."""
    same_model(x, xi, eta)
    if boundary_points_equal(xi, eta):
        return AngleLimit(0.0, 0.0, (), ())
    if t_grid is None:
        t_grid = tuple(float(2 ** k) for k in range(0, 9))
    vals = []
    for t in t_grid:
        vals.append(comparison_angle(x, ray_point(x, xi, t), ray_point(x, eta, t)))
    defect = 0.0
    for a, b in zip(vals, vals[1:]):
        defect = max(defect, a - b)
    return AngleLimit(vals[-1], defect, tuple(t_grid), tuple(vals))


def tits_distance(xi: BoundaryPoint, eta: BoundaryPoint) -> float:
    """Closed-form Tits (length-metric) distance between boundary points;
    +inf between distinct ends of the visibility models."""
    same_model(xi, eta)
    model = xi.model
    if model is Model.E2:
        return _e2.tits(xi.data, eta.data)
    if model in (Model.H2, Model.T4):
        return 0.0 if boundary_points_equal(xi, eta) else INF
    return _h2xr.tits(xi.data, eta.data, tolerance())


def tits_ball_is_trivial(xi: BoundaryPoint) -> bool:
    """True when the closed Tits ball of radius pi around xi is just {xi}."""
    return xi.model in (Model.H2, Model.T4)


def boundary_metric(x: Point, xi: BoundaryPoint, eta: BoundaryPoint,
                    r0: float = 1.0) -> float:
    """A metric on the boundary compatible with the visual topology.

    Continuous models use the chordal distance between ray points at radius
    r0.  The tree uses exp(-(xi|eta)_x); the chordal construction is not
    separating there because projections are vertex granular.
    """
    same_model(x, xi, eta)
    if x.model is Model.T4:
        return _t4.visual_metric(x.data, xi.data, eta.data)
    return distance(ray_point(x, xi, r0), ray_point(x, eta, r0))


@dataclass(frozen=True)
class GeodesicWitness:
    endpoints: tuple[BoundaryPoint, BoundaryPoint]
    point_on: Point
    rank_one: bool


def rank_one_geodesic_witness(xi: BoundaryPoint, eta: BoundaryPoint):
    """A geodesic joining xi to eta when one exists, flagged by whether it is
    contracting; None when the two points are not joined in the space."""
    same_model(xi, eta)
    model = xi.model
    if boundary_points_equal(xi, eta):
        return None
    if model is Model.H2:
        a, b = xi.data, eta.data
        if math.isinf(a) or math.isinf(b):
            fin = b if math.isinf(a) else a
            pt = Point(model, complex(fin, 1.0))
        else:
            c = (a + b) / 2.0
            r = abs(a - b) / 2.0
            pt = Point(model, complex(c, r))
        return GeodesicWitness((xi, eta), pt, True)
    if model is Model.T4:
        k = int(_t4.lcp(_t4.word_prefix(xi.data, 64), _t4.word_prefix(eta.data, 64)))
        return GeodesicWitness((xi, eta), Point(model, _t4.word_prefix(xi.data, k)), True)
    if model is Model.E2:
        if _e2.circle_gap(xi.data, eta.data) < math.pi - tolerance():
            return None
        return GeodesicWitness((xi, eta), Point(model, complex(0.0, 0.0)), False)
    (x1, a1), (x2, a2) = xi.data, eta.data
    joined = abs(a1 + a2) <= tolerance() and not _h2xr.boundary_eq(
        (x1, a1), (x2, a2), tolerance()
    ) and ((x1 is None) == (x2 is None))
    if x1 is not None and x2 is not None:
        same_fiber = boundary_points_equal(
            BoundaryPoint(Model.H2, x1), BoundaryPoint(Model.H2, x2)
        ) if not (math.isinf(x1) or math.isinf(x2)) else (math.isinf(x1) and math.isinf(x2))
        joined = joined and not same_fiber
    if not joined:
        return None
    if x1 is None:
        pt = Point(model, (complex(0.0, 1.0), 0.0))
    else:
        w = rank_one_geodesic_witness(h2_boundary(x1), h2_boundary(x2))
        pt = Point(model, (w.point_on.data, 0.0))
    return GeodesicWitness((xi, eta), pt, False)


def sample_boundary(model: Model, count: int, rng) -> list[BoundaryPoint]:
    """Seeded sample of boundary points, spread across each model's boundary."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    out: list[BoundaryPoint] = []
    for _ in range(count):
        if model is Model.E2:
            out.append(e2_boundary(rng.uniform(0.0, 2.0 * math.pi)))
        elif model is Model.H2:
            phi = rng.uniform(-math.pi, math.pi)
            out.append(h2_boundary(INF if abs(phi) > math.pi - 1e-12 else math.tan(phi / 2.0)))
        elif model is Model.T4:
            length = int(rng.integers(4, 12))
            word = []
            for _ in range(length):
                choices = [ch for ch in _t4.ALPHABET
                           if not (word and word[-1] == _t4.inv_letter(ch))]
                word.append(choices[int(rng.integers(0, len(choices)))])
            prefix = "".join(word)
            tail = [ch for ch in _t4.ALPHABET if ch != _t4.inv_letter(prefix[-1])]
            period = tail[int(rng.integers(0, len(tail)))]
            out.append(t4_boundary(prefix, period))
        elif model is Model.H2xR:
            phi = rng.uniform(-math.pi, math.pi)
            xi = INF if abs(phi) > math.pi - 1e-12 else math.tan(phi / 2.0)
            alpha = rng.uniform(-_h2xr.HALF_PI * 0.999, _h2xr.HALF_PI * 0.999)
            out.append(h2xr_boundary(xi, alpha))
        else:
            raise UsageError(f"unknown model {model!r}")
    return out
