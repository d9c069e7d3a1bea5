"""Step distributions, bounded-depth admissibility certification, and the
seeded random-walk sampler Z_n = w_1 ... w_n.

Sampling is driven by a counter-based generator keyed by (seed, path index),
so different paths are independent streams and results never depend on how
work is scheduled across workers.

Hyperbolic-factor products are tracked as Frobenius-normalised matrices with
a log-scale factor; positions, distances to the basepoint and horofunction
values are extracted from that state in log space, which keeps traces
faithful far beyond the float64 coordinate range.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _e2, _h2, _t4
from .errors import DistributionError, UsageError
from .models import (
    BoundaryPoint,
    Isometry,
    Model,
    Point,
    isometry_from_json,
    isometry_key,
    isometry_to_json,
    same_model,
)
from .isometry import apply, apply_boundary, compose, inverse

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class StepDistribution:
    """Finitely supported probability measure on isometries of one model."""

    model: Model
    atoms: tuple[tuple[Isometry, float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise DistributionError("a step distribution needs at least one atom")
        total = 0.0
        for iso, p in self.atoms:
            if iso.model is not self.model:
                raise DistributionError("atom model does not match the distribution model")
            if not p > 0:
                raise DistributionError("atom probabilities must be positive")
            total += p
        if abs(total - 1.0) > _PROB_TOL:
            raise DistributionError(f"probabilities sum to {total}, not 1")

    @classmethod
    def uniform(cls, isometries) -> "StepDistribution":
        isometries = list(isometries)
        p = 1.0 / len(isometries)
        return cls(isometries[0].model, tuple((g, p) for g in isometries))

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    @property
    def isometries(self) -> tuple[Isometry, ...]:
        return tuple(g for g, _ in self.atoms)

    def to_json(self) -> dict:
        return {
            "model": self.model.value,
            "atoms": [{"isometry": isometry_to_json(g), "p": p} for g, p in self.atoms],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StepDistribution":
        atoms = tuple(
            (isometry_from_json(a["isometry"]), float(a["p"])) for a in obj["atoms"]
        )
        return cls(Model(obj["model"]), atoms)


@dataclass(frozen=True)
class AdmissibilityReport:
    depth: int
    elements_reached: int
    symmetric_closure_hit: bool
    certified: bool


def validate_distribution(spec: StepDistribution, depth: int) -> AdmissibilityReport:
    """Breadth-first closure of atom products up to `depth`; the support is
    certified to generate a group (hence a semigroup with inverses) when every
    atom's inverse shows up in the closure."""
    if depth < 1:
        raise UsageError("closure depth must be at least 1")
    targets = {isometry_key(inverse(g)) for g, _ in spec.atoms}
    seen: dict = {}
    frontier = []
    for g, _ in spec.atoms:
        k = isometry_key(g)
        if k not in seen:
            seen[k] = g
            frontier.append(g)
    found = targets & set(seen)
    d = 1
    while d < depth and len(found) < len(targets):
        nxt = []
        for g in frontier:
            for a, _ in spec.atoms:
                h = compose(g, a)
                k = isometry_key(h)
                if k not in seen:
                    seen[k] = h
                    nxt.append(h)
                    if k in targets:
                        found.add(k)
        frontier = nxt
        d += 1
        if not frontier:
            break
    hit = len(found) == len(targets)
    return AdmissibilityReport(
        depth=depth,
        elements_reached=len(seen),
        symmetric_closure_hit=hit,
        certified=hit,
    )


# -- per-model orbit walkers ---------------------------------------------------

class OrbitWalker:
    """Incremental left-product state Z_k = Z_{k-1} w_k for one sample path."""

    def __init__(self, spec: StepDistribution, basepoint: Point):
        same_model(spec.isometries[0], basepoint)
        self.model = spec.model
        self.base = basepoint
        if self.model is Model.E2:
            self._state = (complex(1.0, 0.0), complex(0.0, 0.0))  # (e^{ia}, v)
        elif self.model is Model.T4:
            x = basepoint.data
            self._conj = [( _t4.mul(_t4.mul(_t4.inv_word(x), g.data), x))
                          for g in spec.isometries]
            self._stack: list[str] = []  # x^{-1} Z x as a letter stack
        elif self.model is Model.H2:
            self._state = _h2.state_identity()
            self._frame = _h2.point_frame(basepoint.data)
        else:
            self._state = (_h2.state_identity(), 0.0)
            self._frame = _h2.point_frame(basepoint.data[0])
        self._atoms = spec.isometries

    def step(self, atom_index: int) -> None:
        g = self._atoms[atom_index]
        if self.model is Model.E2:
            u, w = self._state
            a, v = g.data
            self._state = (u * complex(math.cos(a), math.sin(a)), u * v + w)
        elif self.model is Model.T4:
            for ch in self._conj[atom_index]:
                if self._stack and self._stack[-1] == _t4.inv_letter(ch):
                    self._stack.pop()
                else:
                    self._stack.append(ch)
        elif self.model is Model.H2:
            self._state = _h2.state_mul(self._state, g.data)
        else:
            st, h = self._state
            mat, shift = g.data
            self._state = (_h2.state_mul(st, mat), h + shift)

    def dist_to_base(self) -> float:
        if self.model is Model.E2:
            u, w = self._state
            return abs(u * self.base.data + w - self.base.data)
        if self.model is Model.T4:
            return float(len(self._stack))
        if self.model is Model.H2:
            return _h2.state_dist_to_base(self._state, self._frame)
        st, h = self._state
        dh = _h2.state_dist_to_base(st, self._frame)
        return math.hypot(dh, h)

    def point(self) -> Point:
        if self.model is Model.E2:
            u, w = self._state
            return Point(self.model, u * self.base.data + w)
        if self.model is Model.T4:
            return Point(self.model, _t4.mul(self.base.data, "".join(self._stack)))
        if self.model is Model.H2:
            return Point(self.model, _h2.state_point(self._state, self.base.data))
        st, h = self._state
        return Point(self.model,
                     (_h2.state_point(st, self.base.data[0]), self.base.data[1] + h))

    def snapshot(self):
        if self.model is Model.T4:
            return "".join(self._stack)
        return self._state

    def boundary_image(self, xi: BoundaryPoint) -> BoundaryPoint:
        same_model(self.base, xi)
        if self.model is Model.E2:
            u, _ = self._state
            return BoundaryPoint(self.model, _e2.wrap_angle(xi.data + math.atan2(u.imag, u.real)))
        if self.model is Model.T4:
            x = self.base.data
            z_word = _t4.mul(_t4.mul(x, "".join(self._stack)), _t4.inv_word(x))
            return BoundaryPoint(self.model, _t4.boundary_action(z_word, xi.data))
        if self.model is Model.H2:
            return BoundaryPoint(self.model, _h2.state_boundary(self._state, xi.data))
        st, _ = self._state
        b, alpha = xi.data
        if b is None:
            return xi
        return BoundaryPoint(self.model, (_h2.state_boundary(st, b), alpha))


def snapshot_dist_to_base(model: Model, snap, basepoint: Point) -> float:
    if model is Model.T4:
        return float(len(snap))
    if model is Model.E2:
        u, w = snap
        return abs(u * basepoint.data + w - basepoint.data)
    if model is Model.H2:
        return _h2.state_dist_to_base(snap, _h2.point_frame(basepoint.data))
    st, h = snap
    dh = _h2.state_dist_to_base(st, _h2.point_frame(basepoint.data[0]))
    return math.hypot(dh, h)


def snapshot_point(model: Model, snap, basepoint: Point) -> Point:
    if model is Model.T4:
        return Point(model, _t4.mul(basepoint.data, snap))
    if model is Model.E2:
        u, w = snap
        return Point(model, u * basepoint.data + w)
    if model is Model.H2:
        return Point(model, _h2.state_point(snap, basepoint.data))
    st, h = snap
    return Point(model, (_h2.state_point(st, basepoint.data[0]), basepoint.data[1] + h))


def snapshot_horofunction(model: Model, snap, basepoint: Point, xi: BoundaryPoint) -> float:
    """h_xi with basepoint x evaluated at the orbit point Z x of a snapshot."""
    from .boundary import horofunction

    if model is Model.H2:
        return _h2.state_horofunction(snap, xi.data, basepoint.data)
    if model is Model.H2xR:
        st, h = snap
        b, alpha = xi.data
        vert = math.sin(alpha) * (-h)
        if b is None:
            return vert
        return math.cos(alpha) * _h2.state_horofunction(st, b, basepoint.data[0]) + vert
    return horofunction(xi, basepoint, snapshot_point(model, snap, basepoint))


@dataclass(frozen=True)
class WalkTrace:
    """One seeded realization of the walk, with stored increments, dense
    distances to the basepoint, and state snapshots at the stored steps."""

    spec: StepDistribution
    basepoint: Point
    seed: int
    path_index: int
    n: int
    increments: np.ndarray
    steps: np.ndarray
    base_distances: np.ndarray
    snapshots: tuple = field(repr=False)

    @property
    def model(self) -> Model:
        return self.spec.model

    @property
    def positions(self) -> list[Point]:
        return [snapshot_point(self.model, s, self.basepoint) for s in self.snapshots]

    def to_csv(self, path) -> None:
        if self.model is Model.T4:
            pos_cols = ["word"]
        elif self.model is Model.H2xR:
            pos_cols = ["x", "y", "height"]
        else:
            pos_cols = ["x", "y"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "increment_index", *pos_cols, "dist_to_base"])
            for i, k in enumerate(self.steps):
                inc = "" if k == 0 else int(self.increments[k - 1])
                p = snapshot_point(self.model, self.snapshots[i], self.basepoint)
                if self.model is Model.T4:
                    comps = [p.data]
                elif self.model is Model.H2xR:
                    comps = [p.data[0].real, p.data[0].imag, p.data[1]]
                else:
                    comps = [p.data.real, p.data.imag]
                writer.writerow([int(k), inc, *comps, float(self.base_distances[k])])


def _uniforms(seed: int, path_index: int, n: int) -> np.ndarray:
    key = [int(seed) % (1 << 64), int(path_index) % (1 << 64)]
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.random(n)


def draw_increments(spec: StepDistribution, n: int, seed: int, path_index: int = 0) -> np.ndarray:
    cum = np.cumsum(spec.probabilities)
    u = _uniforms(seed, path_index, n)
    return np.searchsorted(cum, u, side="right").astype(np.int64)


def sample_walk(spec: StepDistribution, x: Point, n: int, seed: int,
                path_index: int = 0, thin: int = 1) -> WalkTrace:
    """Deterministic walk realization for (spec, x, n, seed, path_index).

    Snapshots (and hence positions) are stored every `thin` steps plus the
    endpoints; distances to the basepoint are stored densely.
    """
    same_model(spec.isometries[0], x)
    if n < 0:
        raise UsageError("walk length must be nonnegative")
    if thin < 1:
        raise UsageError("thinning stride must be at least 1")
    increments = draw_increments(spec, n, seed, path_index)
    walker = OrbitWalker(spec, x)
    dists = np.zeros(n + 1)
    steps = [0]
    snaps = [walker.snapshot()]
    for k in range(1, n + 1):
        walker.step(int(increments[k - 1]))
        dists[k] = walker.dist_to_base()
        if k % thin == 0 or k == n:
            steps.append(k)
            snaps.append(walker.snapshot())
    return WalkTrace(
        spec=spec,
        basepoint=x,
        seed=int(seed),
        path_index=int(path_index),
        n=int(n),
        increments=increments,
        steps=np.array(steps, dtype=np.int64),
        base_distances=dists,
        snapshots=tuple(snaps),
    )


def inverse_walk_positions(trace: WalkTrace) -> list[Point]:
    """Positions Z_k^{-1} x for k = 0..n, built incrementally from the left:
    Z_{k+1}^{-1} x = w_{k+1}^{-1} (Z_k^{-1} x)."""
    inv_atoms = [inverse(g) for g in trace.spec.isometries]
    q = trace.basepoint
    out = [q]
    for idx in trace.increments:
        q = apply(inv_atoms[int(idx)], q)
        out.append(q)
    return out


def pushforward_atoms(spec: StepDistribution,
                      points: list[BoundaryPoint]) -> list[tuple[BoundaryPoint, float]]:
    """Convolution of the step distribution with the uniform measure on the
    given boundary atoms, as a finitely supported boundary measure."""
    if not points:
        raise UsageError("need at least one boundary atom")
    for b in points:
        same_model(spec.isometries[0], b)
    w = 1.0 / len(points)
    out = []
    for g, p in spec.atoms:
        for b in points:
            out.append((apply_boundary(g, b), p * w))
    return out
