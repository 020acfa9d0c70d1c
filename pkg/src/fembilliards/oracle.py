"""Closed-form Dirichlet spectra used as validation oracles.

Covers the disk (zeros of J_m), the equilateral triangle and rectangles.
Bessel functions are evaluated here rather than borrowed from scipy so the
oracle can be tested on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "OutOfValidityWindow",
    "ExactLevel",
    "bessel_j",
    "bessel_zero",
    "circle_spectrum",
    "triangle_spectrum",
    "rectangle_spectrum",
    "MAX_ORDER",
    "MAX_ARGUMENT",
]

MAX_ORDER = 60
MAX_ARGUMENT = 500.0
ENUMERATION_MARGIN = 1.2


class OutOfValidityWindow(ValueError):
    pass


@dataclass(frozen=True)
class ExactLevel:
    k: float
    quantum_numbers: tuple
    multiplicity: int

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")
        if self.multiplicity not in (1, 2):
            raise ValueError(f"multiplicity must be 1 or 2, got {self.multiplicity!r}")


def _check_window(m: int, x: float) -> None:
    if m < 0 or m != int(m):
        raise OutOfValidityWindow(f"order must be a non-negative integer, got {m!r}")
    if m > MAX_ORDER:
        raise OutOfValidityWindow(f"order {m} exceeds {MAX_ORDER}")
    if not (x >= 0 and x <= MAX_ARGUMENT):
        raise OutOfValidityWindow(f"argument {x!r} outside [0, {MAX_ARGUMENT:g}]")


def _series(m: int, x: float) -> float:
    # sum_k (-1)^k (x/2)^(2k+m) / (k! (k+m)!)
    half = 0.5 * x
    term = half ** m / math.factorial(m)
    total = term
    q = -half * half
    k = 0
    while abs(term) > 1e-17 * abs(total) or k < 2:
        k += 1
        term *= q / (k * (k + m))
        total += term
        if k > 200:
            break
    return total


def _miller(m: int, x: float) -> float:
    """Backward recurrence normalized with J_0 + 2 sum J_2k = 1."""
    big = max(m, x)
    start = int(big + 20 + math.sqrt(40.0 * big))
    start += start & 1
    j_next, j = 0.0, 1e-300
    norm = 0.0
    found = 0.0
    for n in range(start, 0, -1):
        j_prev = (2.0 * n / x) * j - j_next
        j_next, j = j, j_prev
        if abs(j) > 1e250:
            j *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            found *= 1e-250
        # j now holds the unnormalized J_{n-1}
        if n - 1 == m:
            found = j
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j
    norm += j
    return found / norm


def bessel_j(m: int, x: float) -> float:
    """J_m(x) for integer 0 <= m <= 60 and 0 <= x <= 500."""
    x = float(x)
    _check_window(m, x)
    m = int(m)
    if x == 0.0:
        return 1.0 if m == 0 else 0.0
    if x < 2.0 or x * x < 0.5 * (m + 1):
        return _series(m, x)
    return _miller(m, x)


def _bessel_jp(m: int, x: float) -> float:
    if m == 0:
        return -bessel_j(1, x)
    return bessel_j(m - 1, x) - m / x * bessel_j(m, x)


def _refine_zero(m: int, a: float, b: float, fa: float) -> float:
    # bisection down to a short bracket, then Newton steps kept inside it
    for _ in range(200):
        c = 0.5 * (a + b)
        fc = bessel_j(m, c)
        if fc == 0.0:
            return c
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
        if b - a < 1e-6:
            break
    x = 0.5 * (a + b)
    for _ in range(20):
        step = bessel_j(m, x) / _bessel_jp(m, x)
        x_new = x - step
        if not a <= x_new <= b:
            break
        x = x_new
        if abs(step) < 1e-15 * x:
            break
    return x


@lru_cache(maxsize=None)
def _zeros_up_to(m: int, xmax: float) -> tuple[float, ...]:
    """All positive zeros of J_m below ``xmax`` (consecutive zeros are > 2.5 apart)."""
    zeros = []
    step = 0.25
    x = float(m) if m > 0 else step
    fx = bessel_j(m, x)
    while x < xmax:
        y = min(x + step, MAX_ARGUMENT)
        fy = bessel_j(m, y)
        if fx == 0.0:
            zeros.append(x)
        elif (fx > 0) != (fy > 0):
            zeros.append(_refine_zero(m, x, y, fx))
        if y >= MAX_ARGUMENT:
            break
        x, fx = y, fy
    return tuple(z for z in zeros if z < xmax)


def bessel_zero(m: int, s: int) -> float:
    """s-th positive zero j_{m,s} of J_m."""
    if s < 1 or s != int(s):
        raise ValueError(f"zero index must be a positive integer, got {s!r}")
    _check_window(m, 0.0)
    # McMahon: j_{m,s} ~ (s + m/2 - 1/4) pi, an overestimate for small s
    guess = (s + 0.5 * m - 0.25) * math.pi + m + 10.0
    while True:
        bound = min(guess, MAX_ARGUMENT)
        zeros = _zeros_up_to(int(m), bound)
        if len(zeros) >= s:
            return zeros[s - 1]
        if bound >= MAX_ARGUMENT:
            raise OutOfValidityWindow(f"j_({m},{s}) exceeds {MAX_ARGUMENT:g}")
        guess *= 1.5


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value


def _count(count: int) -> int:
    if count < 0 or count != int(count):
        raise ValueError(f"count must be a non-negative integer, got {count!r}")
    return int(count)


def _enumerate(count: int, levels_below, first_guess: float) -> list[ExactLevel]:
    """Grow a k bound until it covers ``count`` levels with the safety margin."""
    if count == 0:
        return []
    kmax = first_guess
    while True:
        levels = levels_below(kmax)
        if len(levels) >= count:
            levels.sort(key=lambda lv: (lv.k, lv.quantum_numbers))
            if kmax >= ENUMERATION_MARGIN * levels[count - 1].k:
                return levels[:count]
            kmax = ENUMERATION_MARGIN * levels[count - 1].k
        else:
            kmax *= 1.5


def circle_spectrum(radius: float, count: int) -> list[ExactLevel]:
    """First ``count`` Dirichlet levels of a disk, double levels listed twice.

    Quantum numbers are (m, s) and (-m, s) for the two members of a pair.
    """
    R = _positive("radius", radius)
    count = _count(count)

    def below(kmax):
        xmax = kmax * R
        out = []
        for m in range(0, MAX_ORDER + 2):
            if m > xmax:
                break
            if m > MAX_ORDER:
                raise OutOfValidityWindow("circle spectrum needs Bessel orders above the window")
            for s, z in enumerate(_zeros_up_to(m, min(xmax, MAX_ARGUMENT)), start=1):
                if m == 0:
                    out.append(ExactLevel(z / R, (0, s), 1))
                else:
                    out.append(ExactLevel(z / R, (m, s), 2))
                    out.append(ExactLevel(z / R, (-m, s), 2))
        if xmax > MAX_ARGUMENT:
            raise OutOfValidityWindow("circle spectrum needs Bessel arguments above the window")
        return out

    # Weyl: N(k) ~ (R k)^2 / 4
    return _enumerate(count, below, (2.0 * math.sqrt(count) + 4.0) / R)


def triangle_spectrum(side: float, count: int) -> list[ExactLevel]:
    """Equilateral triangle of side a: k = (4 pi / 3a) sqrt(p^2 + p q + q^2), 1 <= p <= q."""
    a = _positive("side", side)
    count = _count(count)
    scale = 4.0 * math.pi / (3.0 * a)

    def below(kmax):
        out = []
        # p^2 + pq + q^2 >= 3 p^2, so p <= kmax / (scale sqrt 3)
        pmax = int(kmax / (scale * math.sqrt(3.0))) + 1
        for p in range(1, pmax + 1):
            q = p
            while True:
                k = scale * math.sqrt(p * p + p * q + q * q)
                if k > kmax:
                    break
                if p == q:
                    out.append(ExactLevel(k, (p, q), 1))
                else:
                    out.append(ExactLevel(k, (p, q), 2))
                    out.append(ExactLevel(k, (q, p), 2))
                q += 1
        return out

    return _enumerate(count, below, scale * (math.sqrt(3.0) + math.sqrt(count)))


def rectangle_spectrum(lx: float, ly: float, count: int) -> list[ExactLevel]:
    """k = pi sqrt((p/Lx)^2 + (q/Ly)^2) over p, q >= 1.

    Multiplicity is 2 for p != q on a square (the p <-> q partner), else 1;
    accidental degeneracies are not merged.
    """
    lx = _positive("lx", lx)
    ly = _positive("ly", ly)
    count = _count(count)
    square = lx == ly

    def below(kmax):
        out = []
        pmax = int(kmax * lx / math.pi) + 1
        qmax = int(kmax * ly / math.pi) + 1
        for p in range(1, pmax + 1):
            for q in range(1, qmax + 1):
                k = math.pi * math.hypot(p / lx, q / ly)
                if k <= kmax:
                    out.append(ExactLevel(k, (p, q), 2 if square and p != q else 1))
        return out

    return _enumerate(count, below, math.pi * math.hypot(1 / lx, 1 / ly) + math.sqrt(4 * math.pi * count / (lx * ly)))
