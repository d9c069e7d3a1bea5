"""Free-group tree kernel.

Vertices of the 4-regular tree are freely reduced words over "aAbB"
(capital = inverse letter).  The model is vertex granular: distances are
integers and geodesics are evaluated at integer parameters only.  Boundary
points are eventually periodic infinite reduced words stored as
(prefix, period) pairs.
"""

from __future__ import annotations

import math

from .errors import UsageError

ALPHABET = "aAbB"


def inv_letter(ch: str) -> str:
    return ch.swapcase()


def reduce_word(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if ch not in ALPHABET:
            raise UsageError(f"letter {ch!r} not in alphabet {ALPHABET!r}")
        if out and out[-1] == inv_letter(ch):
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def is_reduced(word: str) -> bool:
    return all(ch in ALPHABET for ch in word) and all(
        word[i] != inv_letter(word[i + 1]) for i in range(len(word) - 1)
    )


def inv_word(word: str) -> str:
    return word.swapcase()[::-1]


def mul(u: str, v: str) -> str:
    out = list(u)
    for ch in v:
        if out and out[-1] == inv_letter(ch):
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def lcp(u: str, v: str) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def dist(u: str, v: str) -> int:
    return len(u) + len(v) - 2 * lcp(u, v)


def as_step(t: float) -> int:
    """Integer cast for a tree arclength parameter; rejects fractional values."""
    k = round(t)
    if abs(t - k) > 1e-9:
        raise UsageError("tree geodesics are vertex granular; parameter must be an integer")
    return int(k)


def geodesic_point(u: str, v: str, t: int) -> str:
    m = lcp(u, v)
    up = len(u) - m
    if t <= up:
        return u[: len(u) - t]
    return v[: m + (t - up)]


# -- boundary words: (prefix, period) ---------------------------------------

def validate_boundary(prefix: str, period: str) -> tuple[str, str]:
    if not period:
        raise UsageError("boundary word needs a nonempty periodic tail")
    if not is_reduced(prefix):
        raise UsageError("boundary prefix must be freely reduced")
    if not is_reduced(period):
        raise UsageError("boundary period must be freely reduced")
    if period[0] == inv_letter(period[-1]):
        raise UsageError("boundary period must be cyclically reduced")
    if prefix and prefix[-1] == inv_letter(period[0]):
        raise UsageError("boundary prefix/period junction is not reduced")
    # absorb prefix letters that already agree with the periodic tail
    pre, per = prefix, period
    while pre and pre[-1] == per[-1]:
        pre = pre[:-1]
        per = per[-1] + per[:-1]
    return pre, per


def letter_at(b: tuple[str, str], i: int) -> str:
    prefix, period = b
    if i < len(prefix):
        return prefix[i]
    return period[(i - len(prefix)) % len(period)]


def word_prefix(b: tuple[str, str], n: int) -> str:
    prefix, period = b
    if n <= len(prefix):
        return prefix[:n]
    k = n - len(prefix)
    reps = k // len(period) + 1
    return prefix + (period * reps)[:k]


def boundary_eq(b1: tuple[str, str], b2: tuple[str, str]) -> bool:
    n = len(b1[0]) + len(b2[0]) + 2 * math.lcm(len(b1[1]), len(b2[1])) + 2
    return word_prefix(b1, n) == word_prefix(b2, n)


def match_len(b: tuple[str, str], word: str) -> int:
    """Number of initial letters of `word` lying on the ray of b from the root."""
    i = 0
    while i < len(word) and word[i] == letter_at(b, i):
        i += 1
    return i


def ray_point(x: str, b: tuple[str, str], t: int) -> str:
    m = match_len(b, x)
    up = len(x) - m
    if t <= up:
        return x[: len(x) - t]
    return word_prefix(b, m + (t - up))


def direction(x: str, y: str) -> tuple[str, str]:
    m = lcp(x, y)
    if len(y) > m:
        return validate_boundary(y, y[-1])
    # y is an ancestor of x; continue away from x along a canonical letter
    forbidden = {x[len(y)]}
    if y:
        forbidden.add(inv_letter(y[-1]))
    period = next(ch for ch in ALPHABET if ch not in forbidden)
    return validate_boundary(y, period)


def gromov_product(x: str, b1: tuple[str, str], b2: tuple[str, str]) -> float:
    """Length of the common initial segment of the rays from x to b1 and b2."""
    if boundary_eq(b1, b2):
        return math.inf
    cap = len(x) + len(b1[0]) + len(b2[0]) + 2 * math.lcm(len(b1[1]), len(b2[1])) + 4
    k = 0
    while k <= cap and ray_point(x, b1, k + 1) == ray_point(x, b2, k + 1):
        k += 1
    return float(k)


def visual_metric(x: str, b1: tuple[str, str], b2: tuple[str, str]) -> float:
    g = gromov_product(x, b1, b2)
    return 0.0 if math.isinf(g) else math.exp(-g)


def boundary_action(w: str, b: tuple[str, str]) -> tuple[str, str]:
    stack = list(w)
    k = 0
    while stack and stack[-1] == inv_letter(letter_at(b, k)):
        stack.pop()
        k += 1
    prefix, period = b
    if k <= len(prefix):
        tail_prefix = prefix[k:]
    else:
        j = (k - len(prefix)) % len(period)
        tail_prefix = ""
        period = period[j:] + period[:j]
    return validate_boundary("".join(stack) + tail_prefix, period)


def cyclic_reduce(g: str) -> tuple[str, str]:
    """Write a reduced word as u c u^{-1} with c cyclically reduced."""
    u: list[str] = []
    w = g
    while len(w) >= 2 and w[0] == inv_letter(w[-1]):
        u.append(w[0])
        w = w[1:-1]
    return "".join(u), w


def axis_vertex(u: str, c: str, k: int) -> str:
    if k >= 0:
        reps = k // len(c) + 1
        return u + (c * reps)[:k]
    ci = inv_word(c)
    k = -k
    reps = k // len(ci) + 1
    return u + (ci * reps)[:k]


def median(p: str, a: str, b: str) -> str:
    t = (dist(a, p) + dist(a, b) - dist(b, p)) // 2
    return geodesic_point(a, b, t)


def axis_projection(g_u: str, g_c: str, p: str) -> str:
    reach = dist(p, g_u) + len(g_c) + 2
    a = axis_vertex(g_u, g_c, -reach)
    b = axis_vertex(g_u, g_c, reach)
    return median(p, a, b)


def axis_coordinate(g_u: str, g_c: str, p: str) -> int:
    m = axis_projection(g_u, g_c, p)
    k = dist(g_u, m)
    return k if m == axis_vertex(g_u, g_c, k) else -k


def horofunction(b: tuple[str, str], x: str, z: str) -> int:
    return (len(z) - 2 * match_len(b, z)) - (len(x) - 2 * match_len(b, x))
