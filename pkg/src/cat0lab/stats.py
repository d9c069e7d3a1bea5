"""Estimators and theorem checkers: drift, boundary convergence, hitting
histograms, stationarity defect, Dirac concentration, horofunction gaps,
cocycle residuals, geodesic tracking, and the pi-convergence scan.

Estimators fan out over sample paths whose random streams depend only on
(seed, path index), and aggregate in path order, so reports are bit-stable
for a given seed regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _h2, _t4
from .errors import DomainError, UncertifiedError, UsageError
from .geometry import distance, direction, model_basepoint, ray_point
from .isometry import (
    apply,
    apply_boundary,
    axis_endpoints,
    classify,
    independence_score,
    inverse,
    is_rank_one,
)
from .boundary import boundary_metric, horofunction, tits_distance
from .models import (
    BoundaryPoint,
    Isometry,
    Model,
    Point,
    boundary_points_equal,
    boundary_to_json,
    same_model,
    tolerance,
)
from .walk import (
    OrbitWalker,
    StepDistribution,
    WalkTrace,
    sample_walk,
    snapshot_horofunction,
    snapshot_point,
    validate_distribution,
)


def default_checkpoints(n: int, count: int = 20) -> list[int]:
    if n < 1:
        return [0]
    pts = sorted({max(1, int(round(v))) for v in np.linspace(n / count, n, count)})
    return pts


def _require_certified(spec: StepDistribution, allow: bool, depth: int) -> None:
    if allow:
        return
    report = validate_distribution(spec, depth)
    if not report.certified:
        raise UncertifiedError(
            "distribution support not certified to generate a group at depth "
            f"{depth}; pass allow_uncertified=True to override"
        )


def _map_paths(fn, m_samples: int, threads: int):
    if threads <= 1:
        return [fn(i) for i in range(m_samples)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(m_samples)))


# -- drift ---------------------------------------------------------------------

@dataclass(frozen=True)
class DriftReport:
    n: int
    m_samples: int
    lambda_hat: float
    std_error: float
    per_sample_terminal: tuple
    horofunction_lambda: float | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m_samples": self.m_samples,
            "lambda_hat": self.lambda_hat,
            "std_error": self.std_error,
            "horofunction_lambda": self.horofunction_lambda,
            "per_sample_terminal": list(self.per_sample_terminal),
        }


def drift_estimate(spec: StepDistribution, x: Point, n: int, m_samples: int,
                   seed: int, horofunction_xi: BoundaryPoint | None = None,
                   allow_uncertified: bool = False, certification_depth: int = 4,
                   threads: int = 1) -> DriftReport:
    """Monte-Carlo estimate of the escape speed lim d(Z_n x, x)/n over
    independent sample paths; optionally also the horofunction speed
    mean h_xi(Z_n x)/n for a fixed boundary point."""
    if n < 1 or m_samples < 1:
        raise UsageError("need positive walk length and sample count")
    _require_certified(spec, allow_uncertified, certification_depth)

    def one(i: int):
        tr = sample_walk(spec, x, n, seed, path_index=i, thin=n)
        term = tr.base_distances[-1] / n
        hterm = None
        if horofunction_xi is not None:
            hterm = snapshot_horofunction(spec.model, tr.snapshots[-1], x, horofunction_xi) / n
        return term, hterm

    results = _map_paths(one, m_samples, threads)
    terms = np.array([r[0] for r in results])
    lam = float(terms.mean())
    se = float(terms.std(ddof=1) / math.sqrt(m_samples)) if m_samples > 1 else 0.0
    hlam = None
    if horofunction_xi is not None:
        hlam = float(np.mean([r[1] for r in results]))
    return DriftReport(
        n=n,
        m_samples=m_samples,
        lambda_hat=lam,
        std_error=se,
        per_sample_terminal=tuple(float(t) for t in terms),
        horofunction_lambda=hlam,
    )


# -- boundary convergence --------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceProfile:
    checkpoints: tuple
    boundary_coords: tuple
    cauchy_tail: tuple

    def to_json(self) -> dict:
        return {
            "checkpoints": list(self.checkpoints),
            "boundary_coords": [boundary_to_json(b) for b in self.boundary_coords],
            "cauchy_tail": list(self.cauchy_tail),
        }


def convergence_profile(trace: WalkTrace, checkpoints) -> ConvergenceProfile:
    """Directions direction(x, Z_k x) at the requested stored checkpoints and
    the suffix spread sup_{j,l >= k} of their pairwise boundary distances."""
    step_index = {int(s): i for i, s in enumerate(trace.steps)}
    coords = []
    kept = []
    x = trace.basepoint
    for k in checkpoints:
        if int(k) not in step_index:
            raise UsageError(f"checkpoint {k} was not stored in the trace")
        if trace.base_distances[int(k)] <= tolerance():
            continue
        p = snapshot_point(trace.model, trace.snapshots[step_index[int(k)]], x)
        coords.append(direction(x, p))
        kept.append(int(k))
    if not coords:
        return ConvergenceProfile((), (), ())
    m = len(coords)
    pair = [[0.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            pair[i][j] = boundary_metric(x, coords[i], coords[j])
    tail = [0.0] * m
    best = 0.0
    for k in range(m - 1, -1, -1):
        row = max(pair[k][k + 1:], default=0.0)
        best = max(best, row)
        tail[k] = best
    return ConvergenceProfile(tuple(kept), tuple(coords), tuple(tail))


# -- hitting histograms -----------------------------------------------------------

@dataclass(frozen=True)
class BinScheme:
    """Boundary partition used for hitting histograms, per model:
    angular arcs (E2), circle arcs through the half-angle chart (H2),
    word cylinders (T4), arc x slope boxes plus two poles (H2xR)."""

    model: Model
    kind: str
    params: tuple

    @classmethod
    def angular(cls, k: int) -> "BinScheme":
        return cls(Model.E2, "angle", (int(k),))

    @classmethod
    def circle(cls, k: int) -> "BinScheme":
        return cls(Model.H2, "circle", (int(k),))

    @classmethod
    def cylinders(cls, length: int) -> "BinScheme":
        words = _enumerate_reduced(int(length))
        return cls(Model.T4, "cylinder", (int(length), tuple(words)))

    @classmethod
    def product(cls, k_xi: int, k_alpha: int) -> "BinScheme":
        return cls(Model.H2xR, "product", (int(k_xi), int(k_alpha)))

    @classmethod
    def default(cls, model: Model, resolution: int = 0) -> "BinScheme":
        if model is Model.E2:
            return cls.angular(resolution or 16)
        if model is Model.H2:
            return cls.circle(resolution or 16)
        if model is Model.T4:
            return cls.cylinders(resolution or 2)
        return cls.product(resolution or 8, 4)

    @property
    def count(self) -> int:
        if self.kind == "angle" or self.kind == "circle":
            return self.params[0]
        if self.kind == "cylinder":
            return len(self.params[1])
        k_xi, k_alpha = self.params
        return k_xi * k_alpha + 2

    def index_of(self, b: BoundaryPoint) -> int:
        if b.model is not self.model:
            raise UsageError("boundary point model does not match the bin scheme")
        if self.kind == "angle":
            k = self.params[0]
            return min(int(b.data / (2.0 * math.pi / k)), k - 1)
        if self.kind == "circle":
            k = self.params[0]
            return _circle_index(b.data, k)
        if self.kind == "cylinder":
            length, words = self.params
            return words.index(_t4.word_prefix(b.data, length))
        k_xi, k_alpha = self.params
        xi, alpha = b.data
        if xi is None:
            return k_xi * k_alpha + (0 if alpha > 0 else 1)
        i = _circle_index(xi, k_xi)
        j = min(int((alpha + math.pi / 2) / (math.pi / k_alpha)), k_alpha - 1)
        return i * k_alpha + j

    def sample_in_bin(self, i: int, rng) -> BoundaryPoint:
        from .models import e2_boundary, h2_boundary, h2xr_boundary, t4_boundary

        if self.kind == "angle":
            k = self.params[0]
            w = 2.0 * math.pi / k
            return e2_boundary(rng.uniform(i * w, (i + 1) * w))
        if self.kind == "circle":
            k = self.params[0]
            w = 2.0 * math.pi / k
            phi = rng.uniform(-math.pi + i * w, -math.pi + (i + 1) * w)
            return h2_boundary(_xi_from_phi(phi))
        if self.kind == "cylinder":
            length, words = self.params
            word = words[i]
            tails = [ch for ch in _t4.ALPHABET if ch != _t4.inv_letter(word[-1])]
            return t4_boundary(word, tails[int(rng.integers(0, len(tails)))])
        k_xi, k_alpha = self.params
        if i >= k_xi * k_alpha:
            return h2xr_boundary(None, math.pi / 2 if i == k_xi * k_alpha else -math.pi / 2)
        bi, bj = divmod(i, k_alpha)
        w = 2.0 * math.pi / k_xi
        phi = rng.uniform(-math.pi + bi * w, -math.pi + (bi + 1) * w)
        wa = math.pi / k_alpha
        alpha = rng.uniform(-math.pi / 2 + bj * wa, -math.pi / 2 + (bj + 1) * wa)
        alpha = max(-math.pi / 2 + 1e-9, min(math.pi / 2 - 1e-9, alpha))
        return h2xr_boundary(_xi_from_phi(phi), alpha)

    def descriptor(self) -> dict:
        if self.kind == "cylinder":
            return {"model": self.model.value, "kind": self.kind,
                    "length": self.params[0], "count": self.count}
        if self.kind == "product":
            return {"model": self.model.value, "kind": self.kind,
                    "k_xi": self.params[0], "k_alpha": self.params[1],
                    "count": self.count}
        return {"model": self.model.value, "kind": self.kind,
                "count": self.count}


def _enumerate_reduced(length: int) -> list[str]:
    words = [""]
    for _ in range(length):
        words = [w + ch for w in words for ch in _t4.ALPHABET
                 if not (w and w[-1] == _t4.inv_letter(ch))]
    return words


def _circle_index(xi: float, k: int) -> int:
    phi = math.pi if math.isinf(xi) else 2.0 * math.atan(xi)
    w = 2.0 * math.pi / k
    return min(int((phi + math.pi) / w), k - 1)


def _xi_from_phi(phi: float) -> float:
    if abs(phi) >= math.pi - 1e-12:
        return math.inf
    return math.tan(phi / 2.0)


@dataclass(frozen=True)
class HittingHistogram:
    bins: BinScheme
    masses: tuple
    n: int
    m_samples: int

    def __post_init__(self):
        if abs(sum(self.masses) - 1.0) > 1e-9:
            raise UsageError("histogram masses must sum to 1")
        if any(m < 0 for m in self.masses):
            raise UsageError("histogram masses must be nonnegative")

    def to_json(self) -> dict:
        return {"bins": self.bins.descriptor(), "masses": list(self.masses),
                "n": self.n, "m_samples": self.m_samples}


def hitting_measure(spec: StepDistribution, x: Point, n: int, m_samples: int,
                    bins: BinScheme, seed: int, allow_uncertified: bool = False,
                    certification_depth: int = 4, threads: int = 1) -> HittingHistogram:
    """Histogram of the terminal directions direction(x, Z_n x) over
    independent sample paths, in the model's bin scheme."""
    _require_certified(spec, allow_uncertified, certification_depth)

    def one(i: int):
        tr = sample_walk(spec, x, n, seed, path_index=i, thin=n)
        if tr.base_distances[-1] <= tolerance():
            return None
        p = snapshot_point(spec.model, tr.snapshots[-1], x)
        return bins.index_of(direction(x, p))

    hits = [h for h in _map_paths(one, m_samples, threads) if h is not None]
    counts = np.bincount(hits, minlength=bins.count).astype(float)
    masses = counts / counts.sum()
    return HittingHistogram(bins=bins, masses=tuple(float(v) for v in masses),
                            n=n, m_samples=len(hits))


def stationarity_defect(spec: StepDistribution, hist: HittingHistogram,
                        refinement_samples: int, seed: int = 0) -> float:
    """Total-variation distance between the histogram and its pushforward
    under the step distribution, with within-bin uniform refinement samples
    standing in for each bin's mass."""
    if refinement_samples < 1:
        raise UsageError("need at least one refinement sample per bin")
    rng = np.random.default_rng(seed)
    pushed = np.zeros(hist.bins.count)
    for i, mass in enumerate(hist.masses):
        if mass == 0.0:
            continue
        for _ in range(refinement_samples):
            b = hist.bins.sample_in_bin(i, rng)
            for g, p in spec.atoms:
                img = apply_boundary(g, b)
                pushed[hist.bins.index_of(img)] += mass * p / refinement_samples
    return 0.5 * float(np.abs(pushed - np.array(hist.masses)).sum())


# -- Dirac concentration ------------------------------------------------------------

@dataclass(frozen=True)
class DiracReport:
    checkpoints: tuple
    spread: tuple
    spread_second: tuple | None
    cross_spread: tuple | None
    hypotheses_certified: bool
    warnings: tuple

    def to_json(self) -> dict:
        return {
            "checkpoints": list(self.checkpoints),
            "spread": list(self.spread),
            "spread_second": None if self.spread_second is None else list(self.spread_second),
            "cross_spread": None if self.cross_spread is None else list(self.cross_spread),
            "hypotheses_certified": self.hypotheses_certified,
            "warnings": list(self.warnings),
        }


def _cloud_spread(x: Point, cloud) -> float:
    best = 0.0
    for i in range(len(cloud)):
        for j in range(i + 1, len(cloud)):
            best = max(best, boundary_metric(x, cloud[i], cloud[j]))
    return best


def _cross_spread(x: Point, cloud1, cloud2) -> float:
    return max(boundary_metric(x, a, b) for a in cloud1 for b in cloud2)


def dirac_concentration(spec: StepDistribution, atoms0, n: int, seed: int,
                        checkpoints, atoms1=None, basepoint: Point | None = None) -> DiracReport:
    """Per-path spread of the pushforward Z_k . atoms under one walk
    realization; a vanishing spread (and cross spread when a second disjoint
    atom set is given) witnesses the Dirac limit of the translated measures.

    Hypothesis violations are reported as warnings, not errors, so negative
    controls run as first-class experiments."""
    if len(atoms0) < 2:
        raise UsageError("need at least two initial boundary atoms")
    x = basepoint if basepoint is not None else model_basepoint(spec.model)
    warnings = []
    adm = validate_distribution(spec, 4)
    audit = rankone_audit(spec)
    certified = adm.certified and audit.verdict == "certified-non-elementary"
    if not adm.certified:
        warnings.append("support not certified admissible at depth 4")
    if audit.verdict != "certified-non-elementary":
        warnings.append(f"rank-one audit verdict: {audit.verdict}")
    checkpoints = sorted(int(k) for k in checkpoints if int(k) >= 1)
    if not checkpoints:
        raise UsageError("need at least one positive checkpoint")
    from .walk import draw_increments

    increments = draw_increments(spec, max(checkpoints), seed, 0)
    walker = OrbitWalker(spec, x)
    want = set(checkpoints)
    spread0, spread1, cross = [], [], []
    for k in range(1, max(checkpoints) + 1):
        walker.step(int(increments[k - 1]))
        if k in want:
            img0 = [walker.boundary_image(b) for b in atoms0]
            spread0.append(_cloud_spread(x, img0))
            if atoms1 is not None:
                img1 = [walker.boundary_image(b) for b in atoms1]
                spread1.append(_cloud_spread(x, img1))
                cross.append(_cross_spread(x, img0, img1))
    return DiracReport(
        checkpoints=tuple(checkpoints),
        spread=tuple(spread0),
        spread_second=tuple(spread1) if atoms1 is not None else None,
        cross_spread=tuple(cross) if atoms1 is not None else None,
        hypotheses_certified=certified,
        warnings=tuple(warnings),
    )


# -- horofunction statistics -----------------------------------------------------------

def horofunction_gap(trace: WalkTrace, xi: BoundaryPoint):
    """|h_xi(Z_k x) - d(Z_k x, x)| along the stored steps of a trace."""
    same_model(trace.basepoint, xi)
    gaps = []
    for i, k in enumerate(trace.steps):
        h = snapshot_horofunction(trace.model, trace.snapshots[i], trace.basepoint, xi)
        gaps.append(abs(h - float(trace.base_distances[int(k)])))
    series = np.array(gaps)
    return float(series.max()), series


def cocycle_residual(g1: Isometry, g2: Isometry, xi: BoundaryPoint, x: Point) -> float:
    """Deviation from h_xi(g1 g2 x) = h_{g1^{-1} xi}(g2 x) + h_xi(g1 x),
    all with basepoint x; identically zero up to rounding."""
    same_model(g1, g2, xi, x)
    lhs = horofunction(xi, x, apply(g1, apply(g2, x)))
    rhs = horofunction(apply_boundary(inverse(g1), xi), x, apply(g2, x)) + horofunction(
        xi, x, apply(g1, x)
    )
    return abs(lhs - rhs)


def tracking_error(trace: WalkTrace, lam: float):
    """d(gamma(lam k), Z_k x)/k at the stored steps, for the ray gamma from
    the basepoint toward the final recorded direction.

    The hyperbolic factors are re-tracked in multiprecision: a float64
    product state cannot resolve the transverse position of a deep orbit, so
    the tracking geometry is recomputed with depth-adapted digits.
    """
    if not lam > 0:
        raise DomainError("tracking needs a positive drift")
    x = trace.basepoint
    if trace.base_distances[-1] <= tolerance():
        raise UsageError("trace never left the basepoint; no direction proxy")
    ks = [int(k) for k in trace.steps if int(k) > 0]
    step_index = {int(k): i for i, k in enumerate(trace.steps)}
    if trace.model is Model.H2:
        mats = [g.data for g in trace.spec.isometries]
        gaps = _h2.mp_ray_gaps(mats, trace.increments, x.data, lam, ks)
        errs = [gaps[k] / k for k in ks]
        return np.array(ks), np.array(errs)
    if trace.model is Model.H2xR:
        mats = [g.data[0] for g in trace.spec.isometries]
        heights = {k: trace.snapshots[step_index[k]][1] + x.data[1] for k in ks}
        gaps = _h2.mp_ray_gaps(mats, trace.increments, x.data[0], lam, ks,
                               heights=heights, base_height=x.data[1])
        errs = [gaps[k] / k for k in ks]
        return np.array(ks), np.array(errs)
    final = snapshot_point(trace.model, trace.snapshots[-1], x)
    xi = direction(x, final)
    errs = []
    for k in ks:
        t = lam * k
        t_eval = float(round(t)) if trace.model is Model.T4 else t
        p = snapshot_point(trace.model, trace.snapshots[step_index[k]], x)
        errs.append(distance(ray_point(x, xi, t_eval), p) / k)
    return np.array(ks), np.array(errs)


# -- pi-convergence -----------------------------------------------------------------

@dataclass(frozen=True)
class PiConvergence:
    holds: bool
    n0: int
    xi: BoundaryPoint
    eta: BoundaryPoint


def pi_convergence_check(gs, x: Point, K, u_eps: float, limits=None) -> PiConvergence:
    """Smallest index from which every compact-set point lands within u_eps
    of the forward limit under the isometry sequence; the compact set must
    stay outside the closed Tits pi-ball of the backward limit."""
    if not gs:
        raise UsageError("need a nonempty isometry sequence")
    if limits is not None:
        xi, eta = limits
    else:
        fwd = [apply(g, x) for g in gs]
        bwd = [apply(inverse(g), x) for g in gs]
        fwd = [p for p in fwd if distance(p, x) > tolerance()]
        bwd = [p for p in bwd if distance(p, x) > tolerance()]
        if not fwd or not bwd:
            raise UsageError("cannot detect limits from a bounded orbit; pass a hint")
        xi = direction(x, fwd[-1])
        eta = direction(x, bwd[-1])
    for kappa in K:
        if tits_distance(eta, kappa) <= math.pi:
            raise DomainError(
                "compact set meets the closed Tits pi-ball of the backward limit"
            )
    ok = []
    for g in gs:
        images = [apply_boundary(g, kappa) for kappa in K]
        ok.append(all(boundary_metric(x, im, xi) < u_eps for im in images))
    n0 = len(gs)
    for i in range(len(ok) - 1, -1, -1):
        if not ok[i]:
            break
        n0 = i
    return PiConvergence(holds=n0 < len(gs), n0=n0, xi=xi, eta=eta)


# -- robust trend estimate ------------------------------------------------------------

def theil_sen(xs, ys, max_points: int = 300) -> float:
    """Median of pairwise slopes; robust trend indicator for gap series."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) != len(ys) or len(xs) < 2:
        raise UsageError("need two equal-length series with at least 2 points")
    if len(xs) > max_points:
        stride = len(xs) // max_points + 1
        xs, ys = xs[::stride], ys[::stride]
    slopes = []
    for i in range(len(xs)):
        dx = xs[i + 1:] - xs[i]
        dy = ys[i + 1:] - ys[i]
        keep = dx != 0
        slopes.extend((dy[keep] / dx[keep]).tolist())
    return float(np.median(slopes))


# -- hypotheses audit ----------------------------------------------------------------

@dataclass(frozen=True)
class AtomAudit:
    index: int
    kind: str
    translation_length: float
    rank_one: bool


@dataclass(frozen=True)
class PairAudit:
    i: int
    j: int
    scores: tuple
    increasing: bool
    endpoints_disjoint: bool


@dataclass(frozen=True)
class RankOneAudit:
    atoms: tuple
    pairs: tuple
    verdict: str

    def to_json(self) -> dict:
        return {
            "atoms": [vars(a) for a in self.atoms],
            "pairs": [
                {"i": p.i, "j": p.j, "scores": list(p.scores),
                 "increasing": p.increasing, "endpoints_disjoint": p.endpoints_disjoint}
                for p in self.pairs
            ],
            "verdict": self.verdict,
        }


def rankone_audit(spec: StepDistribution, exponents=(2, 4, 8)) -> RankOneAudit:
    """Classify every atom, flag rank-one ones, and probe pairwise
    independence through the growth of shell displacement minima.

    Verdicts: certified-non-elementary when two rank-one atoms with four
    distinct fixed points show strictly growing shell scores; indeterminate
    when rank-one atoms exist but no such pair; hypotheses-violated when the
    support has no rank one element."""
    x = model_basepoint(spec.model)
    atoms = []
    for idx, (g, _) in enumerate(spec.atoms):
        cls = classify(g)
        atoms.append(AtomAudit(index=idx, kind=cls.kind,
                               translation_length=cls.translation_length,
                               rank_one=is_rank_one(g)))
    rank_one_ids = [a.index for a in atoms if a.rank_one]
    pairs = []
    verdict = "hypotheses-violated" if not rank_one_ids else "indeterminate"
    for ii in range(len(rank_one_ids)):
        for jj in range(ii + 1, len(rank_one_ids)):
            i, j = rank_one_ids[ii], rank_one_ids[jj]
            g1 = spec.atoms[i][0]
            g2 = spec.atoms[j][0]
            scores = tuple(independence_score(g1, g2, x, m, shell=True) for m in exponents)
            increasing = all(b > a + tolerance() for a, b in zip(scores, scores[1:]))
            e1 = axis_endpoints(g1)
            e2 = axis_endpoints(g2)
            four = [e1[0], e1[1], e2[0], e2[1]]
            disjoint = all(
                not boundary_points_equal(four[a], four[b], 1e-6)
                for a in range(4) for b in range(a + 1, 4)
            )
            pairs.append(PairAudit(i=i, j=j, scores=scores,
                                   increasing=increasing, endpoints_disjoint=disjoint))
            if increasing and disjoint:
                verdict = "certified-non-elementary"
    return RankOneAudit(atoms=tuple(atoms), pairs=tuple(pairs), verdict=verdict)
