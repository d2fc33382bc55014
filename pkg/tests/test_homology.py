import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfsurf.errors import AlreadyOrientable, DependentFixedEdges
from halfsurf.experiments import edge_basis, perturb
from halfsurf.fixtures import FIXTURE_NAMES, load_fixture
from halfsurf.flow import FlowMatrix, apply_matrix, make_delaunay
from halfsurf.homology import (apply_change, chain_rank, coordinate_change, cover_systole_ok, dual_pairing, h_dimension,
                               h_R, independent_rank, mod2_gain, nonorientable_relation, orientation_double_cover,
                               period_coordinates, random_dual_cycle, rank, relation_chain, riemann_hurwitz_genus,
                               triangle_relations, twisted_edges, with_periods)
from halfsurf.saddle import edge_connection, enumerate_saddle_connections, systole
from halfsurf.surface import is_orientable

FIG1_COVER_GENUS = 4


def test_h_dimensions():
    assert h_dimension(load_fixture("torus")) == 2
    assert h_dimension(load_fixture("lshape")) == 4
    f = load_fixture("fig1")
    assert h_dimension(f) == 2 * f.genus + f.n_vertices - 2


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_h_matches_chain_complex(name):
    s = load_fixture(name)
    assert h_dimension(s) == chain_rank(s) - (0 if is_orientable(s) else 1)


def test_independent_rank():
    t = load_fixture("torus")
    assert independent_rank(t, [0]) == 1
    assert independent_rank(t, list(t.triangles[0])) == 2
    assert independent_rank(t, enumerate_saddle_connections(t, 2)) == 2


def test_period_coordinates():
    t = load_fixture("torus")
    assert period_coordinates(t, [0, 1]) == [(1, 0), (0, 1)]
    m = FlowMatrix(2, 1, 1, 1)
    q = apply_matrix(t, m)
    assert period_coordinates(q, [0, 1]) == [(2, 1), (1, 1)]


def test_transition_between_triangulations_is_linear():
    rng = random.Random(3)
    s = load_fixture("lshape")
    b1 = edge_basis(s)
    for _ in range(5):
        p = perturb(s, rng)
        q = apply_matrix(p, ((1, 2), (0, 1)))
        d, _, tracked = make_delaunay(q, [edge_connection(q, e) for e in b1])
        b2 = edge_basis(d)
        a = coordinate_change(d, tracked, b2)
        assert apply_change(a, [sc.vector for sc in tracked]) == period_coordinates(d, b2)


def test_double_cover():
    f = load_fixture("fig1")
    cov = orientation_double_cover(f)
    assert is_orientable(cov.cover)
    assert cov.genus == riemann_hurwitz_genus(f) == FIG1_COVER_GENUS
    assert systole(cov.cover) >= systole(f)
    with pytest.raises(AlreadyOrientable):
        orientation_double_cover(load_fixture("torus"))


def test_cover_systole_under_perturbation():
    rng = random.Random(1)
    f = load_fixture("fig1")
    for _ in range(10):
        assert cover_systole_ok(perturb(f, rng))


def test_torus_triangle_relations():
    rels = triangle_relations(load_fixture("torus"))
    assert len(rels) == 2
    for r in rels:
        assert sorted(r.coefficients.values()) == [-1, 1, 1]


def test_one_relation_per_triangle():
    f = load_fixture("fig1")
    assert len(triangle_relations(f)) == f.n_triangles


def test_relation_pairing_on_cover():
    rng = random.Random(7)
    cov = orientation_double_cover(load_fixture("fig1")).cover
    for r in triangle_relations(cov):
        ch = relation_chain(cov, r)
        for _ in range(20):
            assert abs(dual_pairing(cov, ch, random_dual_cycle(cov, rng))) <= 1


def test_nonorientable_relation():
    f = load_fixture("fig1")
    assert twisted_edges(f)
    assert nonorientable_relation(f).coefficients
    assert mod2_gain(f) == 1
    with pytest.raises(AlreadyOrientable):
        nonorientable_relation(load_fixture("torus"))


def test_h_R():
    t = load_fixture("torus")
    assert h_R(t) == 2
    assert h_R(t, fixed=[0]) == 1
    f = load_fixture("fig1")
    assert h_R(f, fixed=[f.edges[0]]) == h_dimension(f) - 1
    with pytest.raises(DependentFixedEdges):
        h_R(t, fixed=list(t.triangles[0]))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["torus", "lshape"]))
def test_perturbed_periods_round_trip(seed, name):
    s = load_fixture(name)
    p = perturb(s, random.Random(seed))
    basis = edge_basis(s)
    assert with_periods(s, basis, period_coordinates(p, basis)).hol == p.hol


def test_rank_over_rationals():
    assert rank([{0: 1, 1: 1}, {0: 2, 1: 2}, {2: F(1, 2)}]) == 2
