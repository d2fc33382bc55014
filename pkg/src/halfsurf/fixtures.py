"""Bundled example surfaces."""

from __future__ import annotations

from fractions import Fraction as F
from importlib import resources

from .surface import Surface, from_polygon, loads

FIXTURE_NAMES = ("torus", "lshape", "fig1")


def build_torus() -> Surface:
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    return from_polygon(pts, [(0, 1, 2), (0, 2, 3)], [(0, 2), (1, 3)], marked_points=[0])


def build_lshape() -> Surface:
    """Three unit squares in an L; a single cone point of angle 6 pi.

    The bottom row is cut along the long diagonal (0,0)-(2,1), which is not
    Delaunay, so flows and retriangulation have something to flip."""
    pts = [(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2), (0, 1)]
    tris = [(0, 1, 3), (1, 2, 3), (0, 3, 4), (0, 4, 7), (7, 4, 5), (7, 5, 6)]
    pairs = [(0, 5), (1, 3), (2, 7), (4, 6)]
    return from_polygon(pts, tris, pairs, marked_points=[0])


def build_fig1(short=F(1, 10)) -> Surface:
    """Once-punctured genus two surface cut into a left column and a long block.

    Edge lengths: 1 short (``short``, default 1/10), 4 long (10), 3 unit,
    5 and 6 are 2/5 and 2 is 4/5 so that the polygon closes.  The long
    block is a vertical cylinder of modulus 25/4.  The pole sits at the
    fold of the two edges 2.
    """
    s = F(short)
    pts = [
        (0, 0),              # 0  l0
        (1, 0),              # 1  m0
        (1, s),              # 2  m1
        (11, s),             # 3  r0
        (11, s + F(2, 5)),   # 4  r1
        (11, s + F(4, 5)),   # 5  r2
        (11, s + F(6, 5)),   # 6  r3
        (11, s + F(8, 5)),   # 7  r4
        (1, s + F(8, 5)),    # 8  m2
        (0, s + F(8, 5)),    # 9  l3
        (0, s + F(4, 5)),    # 10 l2
        (0, s),              # 11 l1
    ]
    tris = [
        (0, 1, 2), (0, 2, 11), (11, 2, 10), (2, 8, 10), (8, 9, 10),
        (2, 3, 4), (2, 4, 8), (8, 4, 5), (8, 5, 6), (8, 6, 7),
    ]
    # boundary edge i runs from pts[i] to pts[i+1]
    pairs = [
        (0, 8),    # 3: l0-m0 with m2-l3
        (1, 11),   # 1: m0-m1 with l1-l0
        (2, 7),    # 4: m1-r0 with r4-m2
        (3, 5),    # 6: r0-r1 with r2-r3
        (4, 6),    # 5: r1-r2 with r3-r4
        (9, 10),   # 2: l3-l2 with l2-l1
    ]
    return from_polygon(pts, tris, pairs, marked_points=[10])


BUILDERS = {"torus": build_torus, "lshape": build_lshape, "fig1": build_fig1}


def fixture_text(name: str) -> str:
    return resources.files("halfsurf").joinpath("data").joinpath(f"{name}.surf").read_text(encoding="utf-8")


def load_fixture(name: str) -> Surface:
    """Load a bundled ``.surf`` file by short name."""
    return loads(fixture_text(name))


def fixture_path(name: str):
    return resources.files("halfsurf").joinpath("data").joinpath(f"{name}.surf")
