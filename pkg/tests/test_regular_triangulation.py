import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfsurf.cli import triangulate
from halfsurf.errors import CannotPerturb, SeedNotShort
from halfsurf.experiments import perturb
from halfsurf.fixtures import FIXTURE_NAMES, load_fixture
from halfsurf.flow import geodesic_flow
from halfsurf.intersections import intersection_number
from halfsurf.geometry import LARGE_CYLINDER, cylinders_up_to, short_curves
from halfsurf.regular_triangulation import (build_regular_triangulation, euler_edge_count, perturbed_boundary,
                                            verify_regular)
from halfsurf.saddle import edge_connection, enumerate_saddle_connections, trace

EPS = {"torus": F(1, 10), "lshape": F(1, 10), "fig1": F(1, 3)}
BETA_MODULUS = F(25, 4)


@pytest.fixture(scope="module")
def fig1_tri():
    return build_regular_triangulation(load_fixture("fig1"), 3.0, eps0=EPS["fig1"])


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_round_trip(name):
    s = load_fixture(name)
    T = build_regular_triangulation(s, 3.0, eps0=EPS[name])
    assert T.report.ok
    assert verify_regular(T.surface, T, 3.0, eps0=EPS[name]).ok
    assert len(T.edges) <= euler_edge_count(s)


def test_torus_standard():
    t = load_fixture("torus")
    T = build_regular_triangulation(t, 3.0)
    assert len(T.edges) == 3
    assert sorted(sc.length2 for sc in T.edges) == [1, 1, 2]


def test_fig1_excludes_beta(fig1_tri):
    T = fig1_tri
    assert [c.modulus for c in T.excluded_cylinders] == [BETA_MODULUS]
    keys = {sc.key for sc in T.edges}
    beta = next(c for c in cylinders_up_to(T.surface, 3) if c.modulus == BETA_MODULUS)
    assert {sc.key for sc in beta.bottom + beta.top} <= keys
    assert T.report.faces.get("cylinder", 0) > 0


def test_fig1_seed_contained():
    f = load_fixture("fig1")
    seed = edge_connection(f, 1)
    T, edges = triangulate(f, 3.0, [seed], EPS["fig1"])
    assert seed.key in {sc.key for sc in edges}


def test_missing_boundary_flagged(fig1_tri):
    T = fig1_tri
    beta = next(c for c in cylinders_up_to(T.surface, 3) if c.modulus == BETA_MODULUS)
    drop = beta.bottom[0].key
    rep = verify_regular(T.surface, [sc for sc in T.edges if sc.key != drop], 3.0, eps0=EPS["fig1"])
    assert not rep["condition1"].passed
    assert not rep.ok


def test_dehn_twisted_edge_flagged():
    t = load_fixture("torus")
    horiz = next(c for c in cylinders_up_to(t, 1) if c.direction[1] == 0)
    edges = [edge_connection(t, 0), trace(t, 0, (F(10), F(1))), trace(t, 0, (F(11), F(1)))]
    rep = verify_regular(t, edges, 3.0, cylinders=[horiz])
    assert not rep["condition3"].passed
    assert rep.max_twist_count >= 10
    ok = verify_regular(t, [edge_connection(t, e) for e in t.edges], 3.0, cylinders=[horiz])
    assert ok.ok


def test_disjoint_core_unchanged():
    flowed = geodesic_flow(load_fixture("torus"), 64)[0]
    (c,) = short_curves(flowed)
    assert c.kind == LARGE_CYLINDER
    assert perturbed_boundary(flowed, c, ()) == c.chains


def test_crossing_seed_cannot_perturb():
    f = load_fixture("fig1")
    conns = enumerate_saddle_connections(f, 4)
    for c in short_curves(f, EPS["fig1"]):
        crossing = [sc for sc in conns if intersection_number(f, sc, c.connections)]
        if crossing:
            with pytest.raises(CannotPerturb):
                perturbed_boundary(f, c, crossing[:1])
            return
    pytest.fail("no connection crosses a short curve")


def test_seed_must_be_short():
    t = load_fixture("torus")
    with pytest.raises(SeedNotShort):
        build_regular_triangulation(t, 3.0, [edge_connection(t, 0)])


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_perturbed_lshape_round_trip(seed):
    s = perturb(load_fixture("lshape"), random.Random(seed))
    T = build_regular_triangulation(s, 3.0)
    assert verify_regular(T.surface, T, 3.0).ok
    assert len(T.edges) == euler_edge_count(s)
