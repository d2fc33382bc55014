import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfsurf.errors import DomainError
from halfsurf.fixtures import FIXTURE_NAMES, load_fixture
from halfsurf.flow import (FlowMatrix, apply_matrix, geodesic_flow, is_delaunay, make_delaunay,
                           triangulation_edges)
from halfsurf.saddle import enumerate_saddle_connections, length_spectrum
from halfsurf.surface import area, stratum_signature

LSHAPE_FLIPS_AT_8 = 1


def test_identity_is_bit_exact():
    s = load_fixture("fig1")
    assert apply_matrix(s, ((1, 0), (0, 1))).hol == s.hol


def test_diag_scales_holonomy():
    s = apply_matrix(load_fixture("torus"), FlowMatrix.diag(2))
    hols = {sc.holonomy for sc in enumerate_saddle_connections(s, 2)}
    assert (2, 0) in hols


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_group_law(name):
    s = load_fixture(name)
    a = apply_matrix(apply_matrix(s, FlowMatrix.diag(3)), FlowMatrix.diag(F(5, 2)))
    assert a.hol == apply_matrix(s, FlowMatrix.diag(F(15, 2))).hol


def test_bad_determinant():
    with pytest.raises(DomainError):
        FlowMatrix(2, 0, 0, 2)


def test_lambda_one_is_trivial():
    s = load_fixture("lshape")
    out, log = geodesic_flow(s, 1)
    assert out == s and len(log) == 0


def test_torus_flow_matches_lattice_oracle():
    out, _ = geodesic_flow(load_fixture("torus"), 4)
    assert is_delaunay(out)
    got = length_spectrum(out, 3)
    oracle = sorted((4 * p) ** 2 + F(q, 4) ** 2 for p in range(-12, 13) for q in range(-12, 13)
                    if math.gcd(p, q) == 1 and (p > 0 or (p == 0 and q > 0)) and (4 * p) ** 2 + F(q, 4) ** 2 <= 9)
    assert got == oracle


def test_lshape_flow_regression():
    s = load_fixture("lshape")
    out, log = geodesic_flow(s, 8)
    assert len(log) == LSHAPE_FLIPS_AT_8
    assert stratum_signature(out) == stratum_signature(s)


def test_make_delaunay():
    t = load_fixture("torus")
    assert len(make_delaunay(t)[1]) == 0
    sheared = apply_matrix(t, ((1, 3), (0, 1)))
    out, log = make_delaunay(sheared)
    assert len(log) > 0 and is_delaunay(out)
    again, log2 = make_delaunay(out)
    assert len(log2) == 0 and again == out


@settings(max_examples=25, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.sampled_from(FIXTURE_NAMES))
def test_shear_invariants(a, b, name):
    s = load_fixture(name)
    m = FlowMatrix(1, a, 0, 1) @ FlowMatrix(1, 0, b, 1)
    try:
        q = apply_matrix(s, m)
    except DomainError:
        return
    d, _ = make_delaunay(q)
    assert area(d) == area(s)
    assert is_delaunay(d)
    assert length_spectrum(d, 2) == length_spectrum(q, 2)


def test_tracked_edges_survive_flow():
    s = load_fixture("lshape")
    out, log, tr = geodesic_flow(s, 8, triangulation_edges(s))
    assert [sc.vector for sc in tr] == [(8 * sc.vector[0], sc.vector[1] / 8) for sc in triangulation_edges(s)]
