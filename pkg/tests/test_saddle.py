import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfsurf.errors import BudgetExceeded
from halfsurf.experiments import torus_oracle
from halfsurf.fixtures import FIXTURE_NAMES, load_fixture
from halfsurf.flow import FlowMatrix, apply_matrix
from halfsurf.saddle import edge_connection, enumerate_saddle_connections, systole


def _norm(h):
    p, q = int(h[0]), int(h[1])
    return (p, q) if p > 0 or (p == 0 and q > 0) else (-p, -q)


def test_torus_length_two():
    got = [sc.holonomy for sc in enumerate_saddle_connections(load_fixture("torus"), 2)]
    assert {_norm(h) for h in got} == {(1, 0), (0, 1), (1, 1), (1, -1)}
    assert len(got) == 4


def test_torus_length_one():
    assert len(enumerate_saddle_connections(load_fixture("torus"), 1)) == 2


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_below_systole_is_empty(name):
    s = load_fixture(name)
    sys2 = systole(s)
    assert enumerate_saddle_connections(s, F(math.isqrt(int(sys2 * 10 ** 8)), 10 ** 4) * F(99, 100)) == []


def test_systoles():
    assert systole(load_fixture("torus")) == 1
    assert systole(apply_matrix(load_fixture("torus"), FlowMatrix.diag(2))) == F(1, 4)
    fig1 = load_fixture("fig1")
    assert systole(fig1) == F(1, 100)
    assert edge_connection(fig1, 1).length2 == F(1, 100)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 20))
def test_torus_oracle(L):
    got = {_norm(sc.holonomy) for sc in enumerate_saddle_connections(load_fixture("torus"), L)}
    assert got == torus_oracle(L)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_sorted_and_duplicate_free(name):
    conns = enumerate_saddle_connections(load_fixture(name), 3)
    keys = [sc.key for sc in conns]
    assert len(keys) == len(set(keys))
    assert [sc.length2 for sc in conns] == sorted(sc.length2 for sc in conns)


def test_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_saddle_connections(load_fixture("torus"), 200, budget=100)


def test_reverse_has_same_key():
    for sc in enumerate_saddle_connections(load_fixture("lshape"), 3):
        assert sc.reverse() == sc
