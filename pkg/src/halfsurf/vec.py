"""Exact planar vector helpers over ``Fraction``."""

from __future__ import annotations

import math
from fractions import Fraction

Vec = tuple[Fraction, Fraction]

ZERO: Vec = (Fraction(0), Fraction(0))


def vec(x, y) -> Vec:
    return (Fraction(x), Fraction(y))


def vadd(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def vsub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def neg(a: Vec) -> Vec:
    return (-a[0], -a[1])


def vscale(c, a: Vec) -> Vec:
    return (c * a[0], c * a[1])


def cross(a: Vec, b: Vec):
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Vec, b: Vec):
    return a[0] * b[0] + a[1] * b[1]


def norm2(a: Vec):
    return a[0] * a[0] + a[1] * a[1]


def length(a: Vec) -> float:
    return math.hypot(float(a[0]), float(a[1]))


def half_plane(v: Vec) -> int:
    """0 for directions with angle in [0, pi), 1 for [pi, 2 pi)."""
    if v[1] > 0 or (v[1] == 0 and v[0] > 0):
        return 0
    return 1


def unoriented(v: Vec) -> Vec:
    """Representative of ``{v, -v}`` with angle in [0, pi)."""
    return v if half_plane(v) == 0 else neg(v)


def angle(v: Vec) -> float:
    """Angle of the unoriented direction of ``v`` in [0, pi)."""
    u = unoriented(v)
    a = math.atan2(float(u[1]), float(u[0]))
    return a if a >= 0 else a + math.pi


def ccw_key(v: Vec) -> tuple:
    """Exact sort key ordering directions counterclockwise from angle 0."""
    h = half_plane(v)
    x, y = v
    # within a half plane, compare by slope via the cotangent order
    if h == 0:
        if y == 0:
            return (0, 0, Fraction(0))
        return (0, 1, Fraction(-x, 1) / y)
    if y == 0:
        return (1, 0, Fraction(0))
    return (1, 1, Fraction(-x, 1) / y)


def strictly_between(lo: Vec, v: Vec, hi: Vec) -> bool:
    """Is ``v`` strictly inside the counterclockwise wedge from ``lo`` to ``hi``
    (which must open by less than pi)?"""
    return cross(lo, v) > 0 and cross(v, hi) > 0


def mat_apply(m, v: Vec) -> Vec:
    a, b, c, d = m
    return (a * v[0] + b * v[1], c * v[0] + d * v[1])
