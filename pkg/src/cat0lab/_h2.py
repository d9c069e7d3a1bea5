"""Upper half-plane kernel.

Points are complex numbers with positive imaginary part.  Boundary points
are extended reals (math.inf plays the role of the single point at
infinity).  Isometries are real 2x2 matrices with determinant one acting
by Mobius transformations; M and -M are identified and stored with the
first nonzero entry positive.

Geodesics are vertical lines and semicircles centred on the real axis.
Along a semicircle the hyperbolic arclength coordinate is
s = log tan(phi/2) where phi is the polar angle around the circle centre,
which gives closed forms for every geodesic evaluation.

Products of many isometries leave the float64 range long before desk-scale
walk lengths are exhausted, so walk tracking uses Frobenius-normalised
matrices with a separate log-scale factor (`Stat e` tuples below) and all
orbit statistics (distance to basepoint, horofunctions, positions) are
extracted from that representation in log space.
"""

from __future__ import annotations

import math

from .errors import DomainError, UsageError

INF = math.inf
_TINY = 5e-324  # smallest positive subnormal: floor for imaginary parts
_LARGE_XI = 1e6  # beyond this, route boundary computations through z -> -1/z

Mat = tuple[float, float, float, float]

IDENTITY: Mat = (1.0, 0.0, 0.0, 1.0)
_J: Mat = (0.0, -1.0, 1.0, 0.0)  # z -> -1/z


def sign_normalize(m: Mat) -> Mat:
    for e in m:
        if e != 0.0:
            return m if e > 0 else (-m[0], -m[1], -m[2], -m[3])
    raise UsageError("zero matrix is not an isometry")


def make_matrix(a: float, b: float, c: float, d: float) -> Mat:
    det = a * d - b * c
    if not det > 0:
        raise UsageError("matrix must have positive determinant")
    s = 1.0 / math.sqrt(det)
    return sign_normalize((a * s, b * s, c * s, d * s))


def mat_mul(m: Mat, n: Mat) -> Mat:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_inv(m: Mat) -> Mat:
    a, b, c, d = m
    return (d, -b, -c, a)


def mobius(m: Mat, z: complex) -> complex:
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


def mobius_boundary(m: Mat, xi: float) -> float:
    a, b, c, d = m
    if math.isinf(xi):
        return a / c if c != 0.0 else INF
    den = c * xi + d
    if den == 0.0:
        return INF
    return (a * xi + b) / den


def apply(m: Mat, z: complex) -> complex:
    w = mobius(m, z)
    if not w.imag > 0:
        w = complex(w.real, _TINY)
    return w


def dist(p: complex, q: complex) -> float:
    arg = 1.0 + abs(p - q) ** 2 / (2.0 * p.imag * q.imag)
    return math.acosh(max(1.0, arg))


def _vertical(p: complex, q_real: float) -> bool:
    return abs(p.real - q_real) <= 1e-12 * (1.0 + abs(p) + abs(q_real))


def _circle_center(p: complex, q: complex) -> float:
    return (abs(p) ** 2 - abs(q) ** 2) / (2.0 * (p.real - q.real))


def _arc_s(z: complex, c: float) -> float:
    # s = log tan(phi/2), stable on both sides of the apex; points that have
    # numerically collapsed onto the circle ends map to -inf / +inf
    dx = z.real - c
    y = z.imag
    rho = math.hypot(dx, y)
    t = y / (rho + dx) if dx >= 0 else (rho - dx) / y
    if t == 0.0:
        return -INF
    return math.log(t)


def _circle_point(c: float, r: float, s: float) -> complex:
    if s >= 0:
        w = math.exp(-s)
        den = 1.0 + w * w
        cosphi = (w * w - 1.0) / den
        sinphi = 2.0 * w / den
    else:
        u = math.exp(s)
        den = 1.0 + u * u
        cosphi = (1.0 - u * u) / den
        sinphi = 2.0 * u / den
    return complex(c + r * cosphi, max(r * sinphi, _TINY))


def geodesic_point(p: complex, q: complex, t: float) -> complex:
    if t == 0.0 or p == q:
        return p
    if _vertical(p, q.real):
        sign = 1.0 if q.imag > p.imag else -1.0
        return complex(p.real, p.imag * math.exp(sign * t))
    c = _circle_center(p, q)
    r = abs(p - c)
    sp = _arc_s(p, c)
    sq = _arc_s(q, c)
    s = sp + (t if sq > sp else -t)
    return _circle_point(c, r, s)


def ray_point(x: complex, xi: float, t: float) -> complex:
    if math.isinf(xi):
        return complex(x.real, x.imag * math.exp(t))
    if _vertical(x, xi):
        return complex(x.real, max(x.imag * math.exp(-t), _TINY))
    if abs(xi) > _LARGE_XI and abs(x) < abs(xi) / 100.0:
        # conjugate by z -> -1/z to keep the circle parameters well scaled
        w = ray_point(mobius(_J, x), -1.0 / xi, t)
        return apply(mat_inv(_J), w)
    c = (abs(x) ** 2 - xi * xi) / (2.0 * (x.real - xi))
    r = abs(xi - c)
    sx = _arc_s(x, c)
    s = sx + (t if xi < c else -t)
    return _circle_point(c, r, s)


def direction(x: complex, y: complex) -> float:
    if _vertical(x, y.real):
        return INF if y.imag > x.imag else x.real
    c = _circle_center(x, y)
    r = abs(x - c)
    return (c - r) if _arc_s(y, c) > _arc_s(x, c) else (c + r)


# -- classification ----------------------------------------------------------

def trace_abs(m: Mat) -> float:
    return abs(m[0] + m[3])


def is_identity(m: Mat, tol: float) -> bool:
    a, b, c, d = m
    return abs(a - 1) <= tol and abs(b) <= tol and abs(c) <= tol and abs(d - 1) <= tol


def translation_length(m: Mat) -> float:
    t = trace_abs(m)
    if t <= 2.0:
        return 0.0
    return 2.0 * math.acosh(t / 2.0)


def kind(m: Mat, tol: float) -> str:
    if is_identity(m, tol):
        return "identity"
    t = trace_abs(m)
    if t < 2.0 - tol:
        return "elliptic"
    if t <= 2.0 + tol:
        return "parabolic"
    return "axial"


def fixed_points(m: Mat, tol: float) -> tuple[float, float]:
    """Boundary fixed points of an axial matrix, as (repelling, attracting)."""
    a, b, c, d = m
    if kind(m, tol) != "axial":
        raise DomainError("fixed boundary points require an axial isometry")
    if abs(c) <= tol:
        other = b / (d - a)
        return (other, INF) if abs(a) > abs(d) else (INF, other)
    disc = math.sqrt((a + d) ** 2 - 4.0)
    z1 = (a - d + disc) / (2.0 * c)
    z2 = (a - d - disc) / (2.0 * c)
    # derivative 1/(c z + d)^2 < 1 in modulus at the attracting point
    if abs(c * z1 + d) > 1.0:
        return (z2, z1)
    return (z1, z2)


def std_map(e1: float, e2: float) -> Mat:
    """Matrix sending the geodesic with endpoints (e1, e2) to the imaginary
    axis, with e1 -> 0 and e2 -> inf."""
    if math.isinf(e1) and math.isinf(e2):
        raise UsageError("geodesic endpoints must be distinct")
    if math.isinf(e2):
        return make_matrix(1.0, -e1, 0.0, 1.0)
    if math.isinf(e1):
        return make_matrix(0.0, -1.0, 1.0, -e2)
    if e1 == e2:
        raise UsageError("geodesic endpoints must be distinct")
    if e1 > e2:
        return make_matrix(1.0, -e1, 1.0, -e2)
    return make_matrix(-1.0, e1, 1.0, -e2)


def geodesic_coordinate(z: complex, e1: float, e2: float) -> float:
    """Arclength position of the projection of z on the geodesic (e1, e2)."""
    w = mobius(std_map(e1, e2), z)
    return math.log(abs(w))


def project_to_geodesic(z: complex, e1: float, e2: float) -> complex:
    t = std_map(e1, e2)
    w = mobius(t, z)
    return apply(mat_inv(t), complex(0.0, abs(w)))


def horofunction(xi: float, x: complex, z: complex) -> float:
    if math.isinf(xi):
        return math.log(x.imag) - math.log(z.imag)
    qx = ((x.real - xi) ** 2 + x.imag ** 2) / x.imag
    qz = ((z.real - xi) ** 2 + z.imag ** 2) / z.imag
    return math.log(qz) - math.log(qx)


# -- log-scaled orbit states -------------------------------------------------
# A state (m, s) stands for the true matrix e^s * m with ||m||_F = 1 and
# true determinant one, i.e. det m = e^{-2s}.

State = tuple[Mat, float]


def frob(m: Mat) -> float:
    return math.sqrt(m[0] ** 2 + m[1] ** 2 + m[2] ** 2 + m[3] ** 2)


def state_identity() -> State:
    f = frob(IDENTITY)
    return ((1.0 / f, 0.0, 0.0, 1.0 / f), math.log(f))


def state_from_matrix(m: Mat) -> State:
    f = frob(m)
    return ((m[0] / f, m[1] / f, m[2] / f, m[3] / f), math.log(f))


def state_mul(st: State, m: Mat) -> State:
    p = mat_mul(st[0], m)
    f = frob(p)
    return ((p[0] / f, p[1] / f, p[2] / f, p[3] / f), st[1] + math.log(f))


def _acosh_log(log_u: float) -> float:
    """acosh(exp(log_u)) without overflow."""
    if log_u < 700.0:
        return math.acosh(max(1.0, math.exp(log_u)))
    return log_u + math.log(2.0)


def point_frame(x: complex) -> tuple[Mat, Mat]:
    """(T, T^{-1}) with T in SL(2,R) mapping i to x."""
    ry = math.sqrt(x.imag)
    t: Mat = (ry, x.real / ry, 0.0, 1.0 / ry)
    return t, mat_inv(t)


def state_dist_to_base(st: State, frame: tuple[Mat, Mat]) -> float:
    t, tinv = frame
    n = mat_mul(mat_mul(tinv, st[0]), t)
    log_u = 2.0 * st[1] + 2.0 * math.log(frob(n)) - math.log(2.0)
    return _acosh_log(log_u)


def state_position(st: State, x: complex) -> tuple[float, float]:
    """(real part, log imaginary part) of the orbit point e^s m . x."""
    m, s = st
    re = mobius(m, x).real
    den = abs(m[2] * x + m[3])
    log_im = math.log(x.imag) - 2.0 * s - 2.0 * math.log(den)
    return re, log_im


def state_point(st: State, x: complex) -> complex:
    re, log_im = state_position(st, x)
    im = math.exp(log_im) if log_im > -744.0 else _TINY
    return complex(re, max(im, _TINY))


def state_boundary(st: State, xi: float) -> float:
    return mobius_boundary(st[0], xi)


def _log_add(la: float, lb: float) -> float:
    if la == -INF:
        return lb
    if lb == -INF:
        return la
    hi, lo = (la, lb) if la >= lb else (lb, la)
    return hi + math.log1p(math.exp(lo - hi))


def state_horofunction(st: State, xi: float, x: complex) -> float:
    """h_xi with basepoint x, evaluated at the orbit point of x."""
    re, log_im = state_position(st, x)
    if math.isinf(xi):
        return math.log(x.imag) - log_im
    dx2 = (re - xi) ** 2
    log_num = _log_add(math.log(dx2) if dx2 > 0 else -INF, 2.0 * log_im)
    cx = math.log(((x.real - xi) ** 2 + x.imag ** 2) / x.imag)
    return log_num - log_im - cx


# -- multiprecision kernel ----------------------------------------------------
# Desk-scale limits (t around 1e4) and deep orbit tracking leave the float64
# exponent/mantissa range, so the defining computations are redone in mpmath
# (gmpy backend) with precision adapted to the depth involved.

def _mp_ray(xr, xim, xi, tt, mp):
    """Ray point from (xr, xim) toward boundary coordinate xi at arclength tt.

    xi is either float inf or an mpf; full input precision is kept."""
    if isinstance(xi, float) and math.isinf(xi):
        return xr, xim * mp.exp(tt)
    b = mp.mpf(xi)
    if abs(xr - b) <= mp.mpf("1e-30") * (1 + abs(xr) + abs(b)):
        return xr, xim * mp.exp(-tt)
    c = (xr * xr + xim * xim - b * b) / (2 * (xr - b))
    r = abs(b - c)
    dx = xr - c
    rho = mp.sqrt(dx * dx + xim * xim)
    tan_half = xim / (rho + dx) if dx >= 0 else (rho - dx) / xim
    s = mp.log(tan_half) + (tt if b < c else -tt)
    u = mp.exp(s)
    den = 1 + u * u
    return c + r * (1 - u * u) / den, r * 2 * u / den


def _mp_dist(pr, pi, qr, qi, mp):
    arg = 1 + ((pr - qr) ** 2 + (pi - qi) ** 2) / (2 * pi * qi)
    if arg < 1:
        return mp.mpf(0)
    return mp.acosh(arg)


def _mp_direction(xr, xim, yr, yi, mp):
    """Boundary endpoint (mpf, or float inf) of the ray from x through y."""
    if abs(yr - xr) <= mp.mpf("1e-30") * (1 + abs(xr) + abs(yr)):
        return INF if yi > xim else xr
    c = (xr * xr + xim * xim - yr * yr - yi * yi) / (2 * (xr - yr))
    r = mp.sqrt((xr - c) ** 2 + xim * xim)

    def arc(zr, zi):
        dx = zr - c
        rho = mp.sqrt(dx * dx + zi * zi)
        return zi / (rho + dx) if dx >= 0 else (rho - dx) / zi

    return c - r if arc(yr, yi) > arc(xr, xim) else c + r


def mp_busemann_limit(xi: float, x: complex, z: complex, t: float) -> float:
    """d(ray(t), z) - t evaluated in arbitrary precision arithmetic."""
    import mpmath as mp

    with mp.workdps(60):
        pr, pi = _mp_ray(mp.mpf(x.real), mp.mpf(x.imag), xi, mp.mpf(t), mp)
        d = _mp_dist(pr, pi, mp.mpf(z.real), mp.mpf(z.imag), mp)
        return float(d - mp.mpf(t))


def mp_ray_gaps(mats, increments, x: complex, lam: float, steps,
                heights=None, base_height: float = 0.0):
    """d(gamma(lam k), Z_k x) at the given steps, for the ray gamma from x
    toward direction(x, Z_N x) at the final recorded step N.

    The matrix product runs in multiprecision with depth-adapted digits:
    float64 cannot hold the transverse position of a deep hyperbolic orbit,
    so no fixed-precision reframing recovers the tracking geometry.  With
    `heights` the walk is the horizontal factor of a product: the ray slope
    comes from the recorded vertical displacement and the returned gaps are
    full product distances."""
    import mpmath as mp

    steps = [int(k) for k in steps if int(k) > 0]
    n = max(steps)
    want = set(steps)
    dps = int((lam * n + 80.0) / math.log(10.0)) + 40
    with mp.workdps(dps):
        one, zero = mp.mpf(1), mp.mpf(0)
        a, b, c, d = one, zero, zero, one
        atoms = [tuple(mp.mpf(e) for e in m) for m in mats]
        xr, xim = mp.mpf(x.real), mp.mpf(x.imag)
        orbit = {}
        for k in range(1, n + 1):
            e, f, g, h = atoms[int(increments[k - 1])]
            a, b, c, d = a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h
            if k in want:
                den = (c * xr + d) ** 2 + (c * xim) ** 2
                wr = ((a * xr + b) * (c * xr + d) + a * c * xim * xim) / den
                wi = (a * d - b * c) * xim / den
                orbit[k] = (wr, wi)
        wr_n, wi_n = orbit[n]
        xi_dir = _mp_direction(xr, xim, wr_n, wi_n, mp)
        cos_a, sin_a = 1.0, 0.0
        if heights is not None:
            dh_n = _mp_dist(xr, xim, wr_n, wi_n, mp)
            alpha = math.atan2(heights[n] - base_height, float(dh_n))
            cos_a, sin_a = math.cos(alpha), math.sin(alpha)
        gaps = {}
        for k in steps:
            wr, wi = orbit[k]
            t = mp.mpf(lam) * k
            pr, pi = _mp_ray(xr, xim, xi_dir, t * mp.mpf(cos_a), mp)
            dh = float(_mp_dist(pr, pi, wr, wi, mp))
            if heights is None:
                gaps[k] = dh
            else:
                dv = (base_height + float(t) * sin_a) - heights[k]
                gaps[k] = math.hypot(dh, dv)
        return gaps
