import math
from fractions import Fraction as F

import pytest

from halfsurf.errors import DoesNotCross
from halfsurf.fixtures import build_fig1, load_fixture
from halfsurf.flow import geodesic_flow
from halfsurf.geometry import (LARGE_CYLINDER, SMALL, AnnulusData, Log, cylinders_up_to, ext_estimate_curve,
                               ext_estimate_saddle, maximal_annuli, omega_set, short_curves, thick_thin,
                               twist_in_cylinder)
from halfsurf.saddle import edge_connection, enumerate_saddle_connections, trace

FIG1_EPS = F(1, 3)
BETA_EXT = 0.12121212121212122
ALPHA_EXT = 0.24044917348149392
DRIFT_C = 0.0


def test_torus_cylinders():
    cyl = cylinders_up_to(load_fixture("torus"), 1)
    assert sorted(tuple(c.direction) for c in cyl) == [(0, 1), (1, 0)]
    assert all(c.circumference2 == 1 and c.height2 == 1 for c in cyl)


def test_cylinders_below_systole():
    assert cylinders_up_to(load_fixture("lshape"), F(1, 2)) == []


def test_fig1_has_beta_cylinder():
    mods = {c.modulus for c in cylinders_up_to(load_fixture("fig1"), 3)}
    assert F(25, 4) in mods


def test_torus_annulus():
    t = load_fixture("torus")
    d = maximal_annuli(t, cylinders_up_to(t, 1)[0])
    assert (d.l, d.f, d.e, d.g) == (1, 1, 0, 0)
    assert 1 / ext_estimate_curve(d) == 3


def test_estimate_scale_invariant():
    d = AnnulusData(None, 1.5, 0.7, 4.0, 9.0)
    for k in (0.1, 3.0, 1e4):
        assert math.isclose(ext_estimate_curve(d.scaled(k)), ext_estimate_curve(d))


def test_log_floor():
    assert Log(0) == 1 and Log(0.5) == 1 and Log(math.e ** 2) == pytest.approx(2)


def test_fig1_short_curves():
    sh = short_curves(load_fixture("fig1"), FIG1_EPS, 3.0)
    kinds = sorted(c.kind for c in sh)
    assert kinds == sorted([LARGE_CYLINDER, SMALL])
    beta = next(c for c in sh if c.kind == LARGE_CYLINDER)
    alpha = next(c for c in sh if c.kind == SMALL)
    assert alpha.annulus.f == 0 and alpha.annulus.e > 0 and alpha.annulus.g > 0
    assert beta.annulus.modulus > 5
    assert beta.ext == pytest.approx(BETA_EXT) and alpha.ext == pytest.approx(ALPHA_EXT)
    assert alpha.ext <= FIG1_EPS and beta.ext <= FIG1_EPS
    assert [sc.key for sc in alpha.connections] == [edge_connection(load_fixture("fig1"), 1).key]


def test_torus_thick_thin():
    t = load_fixture("torus")
    assert short_curves(t) == []
    pieces = thick_thin(t)
    assert len(pieces) == 1 and pieces[0].size == pytest.approx(math.sqrt(2))


def test_fig1_two_thick_pieces():
    assert len(thick_thin(load_fixture("fig1"), FIG1_EPS, 3.0)) == 2


def test_omega():
    assert omega_set(load_fixture("torus"), F(1, 10)).connections == ()
    fig1 = omega_set(load_fixture("fig1"), FIG1_EPS)
    assert edge_connection(load_fixture("fig1"), 1).key in {sc.key for sc in fig1.connections}
    assert fig1.rank >= 1
    flowed = geodesic_flow(load_fixture("torus"), 64)[0]
    om = omega_set(flowed)
    assert om.connections and om.rank == 1


def test_saddle_drift():
    fig1 = load_fixture("fig1")
    w = next(sc for sc in enumerate_saddle_connections(fig1, 2) if sc.start_vertex != sc.end_vertex)
    base = 1 / ext_estimate_saddle(fig1, w)
    for lam in (2, 4, 8):
        q, _, (wt,) = geodesic_flow(fig1, lam, [w])
        assert abs(1 / ext_estimate_saddle(q, wt) - base) <= 2 * math.log(lam) + DRIFT_C


def test_shrinking_edge_one_gives_more_short_curves():
    a = short_curves(build_fig1(F(1, 10)), FIG1_EPS)
    b = short_curves(build_fig1(F(1, 100)), FIG1_EPS)
    assert min(c.ext for c in b) < min(c.ext for c in a)


@pytest.mark.parametrize("n", [1, 5, 17])
def test_dehn_twist_count(n):
    t = load_fixture("torus")
    horiz = next(c for c in cylinders_up_to(t, 1) if c.direction[1] == 0)
    arc = trace(t, 0, (F(n), F(1))) if n else None
    assert abs(twist_in_cylinder(t, arc, horiz)) == n


def test_straight_arc_has_no_twist():
    t = load_fixture("torus")
    horiz = next(c for c in cylinders_up_to(t, 1) if c.direction[1] == 0)
    assert twist_in_cylinder(t, edge_connection(t, 1), horiz) == 0


def test_parallel_arc_does_not_cross():
    t = load_fixture("torus")
    horiz = next(c for c in cylinders_up_to(t, 1) if c.direction[1] == 0)
    with pytest.raises(DoesNotCross):
        twist_in_cylinder(t, edge_connection(t, 0), horiz)
