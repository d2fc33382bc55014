"""Closed geodesics of the modular surface as cyclic words in R and L:
enumeration by dilatation, growth fits, thin-excursion counts, and exact
extremal lengths on flat tori."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, DegenerateFit
from .geometry import EPSILON_0, short_curves
from .surface import Surface

H_TORUS = 2
R_MAX = 9.0
CLASS_BUDGET = 20_000_000


def _mat_mul(a, b):
    return (a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3])


def word_matrix(digits: Sequence[int]) -> tuple[int, int, int, int]:
    """``R^a1 L^a2 R^a3 ...`` with ``R = [[1,1],[0,1]]`` and ``L = [[1,0],[1,1]]``."""
    m = (1, 0, 0, 1)
    for i, a in enumerate(digits):
        m = _mat_mul(m, (1, a, 0, 1) if i % 2 == 0 else (1, 0, a, 1))
    return m


def canonical_rotation(digits: Sequence[int]) -> tuple[int, ...]:
    """Least rotation by an even shift; odd shifts would swap R and L."""
    d = tuple(digits)
    return min(d[i:] + d[:i] for i in range(0, len(d), 2))


@dataclass(frozen=True)
class CyclicWord:
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        d = tuple(int(a) for a in self.digits)
        if not d or len(d) % 2 or min(d) < 1:
            raise ValueError("digits must be a nonempty even-length sequence of positive integers")
        object.__setattr__(self, "digits", canonical_rotation(d))

    def __str__(self) -> str:
        return "".join(("R" if i % 2 == 0 else "L") + (str(a) if a > 1 else "") for i, a in enumerate(self.digits))


@dataclass(frozen=True)
class ConjClass:
    word: CyclicWord
    trace: int
    dilatation: float
    teich_length: float


def dilatation(word) -> tuple[int, float, float]:
    """``(trace, lambda, log lambda)``; ``log lambda = acosh(trace / 2)``."""
    digits = word.digits if isinstance(word, CyclicWord) else CyclicWord(tuple(word)).digits
    a, _, _, d = word_matrix(digits)
    t = a + d
    log_lam = math.acosh(t / 2)
    return t, math.exp(log_lam), log_lam


def trace_bound(R: float) -> int:
    """Largest trace with ``log lambda <= R``."""
    t = int(math.floor(2 * math.cosh(R)))
    while math.acosh((t + 1) / 2) <= R:
        t += 1
    while t >= 3 and math.acosh(t / 2) > R:
        t -= 1
    return t


def _words(T: int, min_digit: int, budget: int):
    """Canonical digit sequences (least even rotation) with trace at most
    ``T`` and every digit at least ``min_digit``.

    Products of R and L powers only grow entrywise, so a prefix whose trace
    already exceeds ``T`` is pruned; the first digit of a canonical word is
    the least of the digits in odd positions."""
    out = []
    stack = []
    for a1 in range(min_digit, T):
        m1 = (1, a1, 0, 1)
        # R^a1 L^b has trace 2 + a1 b, so b >= min_digit needs 2 + a1 min_digit <= T
        if 2 + a1 * min_digit > T:
            break
        stack.append(((a1,), m1))
        while stack:
            digits, m = stack.pop()
            n = len(digits)
            even_next = n % 2 == 0
            lo = a1 if even_next else min_digit
            a = lo
            while True:
                step = (1, a, 0, 1) if even_next else (1, 0, a, 1)
                mm = _mat_mul(m, step)
                if mm[0] + mm[3] > T:
                    break
                nd = digits + (a,)
                if not even_next:
                    if canonical_rotation(nd) == nd:
                        out.append((nd, mm[0] + mm[3]))
                        if len(out) > budget:
                            raise BudgetExceeded("too many conjugacy classes; lower R")
                stack.append((nd, mm))
                a += 1
    return out


@lru_cache(maxsize=8)
def _classes(T: int, min_digit: int) -> tuple:
    return tuple(sorted(_words(T, min_digit, CLASS_BUDGET)))


def enumerate_classes(R: float, min_digit: int = 1, r_max: float = R_MAX) -> list[ConjClass]:
    """Conjugacy classes of hyperbolic elements with ``log lambda <= R``.

    Classes of PSL(2,Z) correspond to cyclic words; powers are included.
    ``min_digit`` keeps only words with every digit at least that value."""
    if R > r_max:
        raise BudgetExceeded(f"R = {R} exceeds the configured maximum {r_max}")
    T = trace_bound(R)
    if T < 3:
        return []
    out = []
    for digits, t in _classes(T, min_digit):
        log_lam = math.acosh(t / 2)
        out.append(ConjClass(CyclicWord(digits), t, math.exp(log_lam), log_lam))
    out.sort(key=lambda c: (c.trace, c.word.digits))
    return out


def _traces(R: float, min_digit: int = 1) -> list[tuple[tuple[int, ...], int]]:
    T = trace_bound(R)
    if T < 3:
        return []
    return list(_classes(T, min_digit))


def class_count(R: float) -> int:
    return len(_traces(R))


# thin excursions -------------------------------------------------------------


def thin_fraction(digits: Sequence[int], m: int, log_lam: float) -> float:
    w = sum(math.log((a + 2) / m) for a in digits if a >= m)
    return w / log_lam


def thin_constrained_count(R: float, m: int, theta: float) -> int:
    """Classes whose thin weight fraction is at least ``theta``; with
    ``theta = 1`` every digit must be at least ``m``."""
    if m < 1 or not 0 <= theta <= 1:
        raise ValueError("need m >= 1 and theta in [0, 1]")
    if theta == 1:
        return len(_traces(R, m))
    if theta == 0:
        return len(_traces(R))
    n = 0
    for digits, t in _traces(R):
        if thin_fraction(digits, m, math.acosh(t / 2)) >= theta:
            n += 1
    return n


# growth ----------------------------------------------------------------------


@dataclass(frozen=True)
class CountRow:
    R: float
    count: int
    ratio: float


@dataclass(frozen=True)
class CountReport:
    rows: tuple[CountRow, ...]
    h: int = H_TORUS

    def to_csv(self, header: str = "") -> str:
        lines = [header.rstrip("\n")] if header else []
        slope = _safe_fit(self.rows)
        lines.append("R,count,ratio,fitted_exponent")
        for r in self.rows:
            lines.append(f"{r.R:g},{r.count},{r.ratio:.6f},{slope}")
        return "\n".join(lines) + "\n"


def _ratio(count: int, R: float, h: int) -> float:
    return count * h * R / math.exp(h * R) if R > 0 else math.nan


def count_report(Rs: Iterable[float], m: int = 1, theta: float = 0.0, h: int = H_TORUS) -> CountReport:
    Rs = list(Rs)
    if any(b <= a for a, b in zip(Rs, Rs[1:])):
        raise ValueError("R values must increase")
    rows = []
    for R in Rs:
        n = thin_constrained_count(R, m, theta) if (m > 1 or theta > 0) else class_count(R)
        rows.append(CountRow(float(R), n, _ratio(n, R, h)))
    return CountReport(tuple(rows), h)


def fit_exponent(rows) -> float:
    """Least squares slope of ``log count`` against ``R``; rows with zero
    count carry no logarithm and are dropped."""
    pts = [(r.R, r.count) if isinstance(r, CountRow) else (r[0], r[1]) for r in rows]
    pts = [(R, n) for R, n in pts if n > 0]
    if len(pts) < 2 or len({R for R, _ in pts}) < 2:
        raise DegenerateFit("need at least two rows with positive counts")
    x = np.array([R for R, _ in pts], dtype=float)
    y = np.log(np.array([n for _, n in pts], dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _safe_fit(rows) -> str:
    try:
        return f"{fit_exponent(rows):.6f}"
    except DegenerateFit:
        return ""


# flat tori ---------------------------------------------------------------------


def torus_extremal(tau, p: int, q: int) -> Fraction:
    """Extremal length ``|p + q tau|^2 / Im tau`` of the curve ``(p, q)`` on
    the unit-area-free flat torus with modulus ``tau``."""
    x, y = (Fraction(tau[0]), Fraction(tau[1])) if not isinstance(tau, complex) else (tau.real, tau.imag)
    if y <= 0:
        raise ValueError("modulus must lie in the upper half plane")
    if math.gcd(int(p), int(q)) != 1:
        raise ValueError("(p, q) must be coprime")
    return ((p + q * x) ** 2 + (q * y) ** 2) / y


def teich_distance_tori(tau1, tau2) -> float:
    """Half the hyperbolic distance in the upper half plane, i.e. half the
    log of the dilatation of the extremal affine map."""
    x1, y1 = map(float, tau1)
    x2, y2 = map(float, tau2)
    d2 = (x1 - x2) ** 2 + (y1 - y2) ** 2
    return 0.5 * math.acosh(1 + d2 / (2 * y1 * y2))


def kerckhoff_sup(tau1, tau2, bound: int = 20) -> float:
    """``max log sqrt(Ext1 / Ext2)`` over coprime ``|p|, |q| <= bound``."""
    best = -math.inf
    for p in range(-bound, bound + 1):
        for q in range(0, bound + 1):
            if math.gcd(p, q) != 1 or (q == 0 and p != 1):
                continue
            r = torus_extremal(tau1, p, q) / torus_extremal(tau2, p, q)
            best = max(best, 0.5 * math.log(r))
    return best


# weights -------------------------------------------------------------------------


def G_weight(surface: Surface, eps0=EPSILON_0, tau: float = 3.0) -> float:
    """``1 + prod 1/sqrt(ext)`` over short curves; the empty product is 1."""
    prod = 1.0
    for c in short_curves(surface, eps0, tau):
        prod /= math.sqrt(c.ext)
    return 1.0 + prod
