from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfsurf.errors import ClosureViolation, SurfaceFormatError
from halfsurf.fixtures import BUILDERS, FIXTURE_NAMES, fixture_text, load_fixture
from halfsurf.homology import orientation_double_cover
from halfsurf.surface import (area, dumps, is_orientable, loads, normalize_area, scale, stratum_signature,
                              to_dict, validate)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_files_match_builders(name):
    assert fixture_text(name) == dumps(BUILDERS[name]())


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_round_trip(name):
    s = load_fixture(name)
    assert loads(dumps(s)) == s
    assert to_dict(loads(dumps(s))) == to_dict(s)


def test_torus_valid():
    rep = validate(load_fixture("torus"))
    assert rep.ok and rep.genus == 1 and rep.vertex_count == 1 and rep.area == 1


def test_broken_closure_reported():
    d = to_dict(load_fixture("torus"))
    d["holonomy"]["0"] = "2,0"
    rep = validate(loads(__import__("json").dumps(d)))
    assert not rep.ok
    assert any(isinstance(p, ClosureViolation) for p in rep.problems)
    assert any(p.simplex == ("triangle", 0) for p in rep.problems if isinstance(p, ClosureViolation))


def test_fig1_valid_with_marked_puncture():
    s = load_fixture("fig1")
    rep = validate(s)
    assert rep.ok and rep.genus == 2
    assert s.marked


def test_stratum_signatures():
    assert stratum_signature(load_fixture("torus")).nu == (0,)
    assert stratum_signature(load_fixture("torus")).varsigma == 1
    sig = stratum_signature(load_fixture("lshape"))
    assert sig.nu == (4,) and sig.varsigma == 1
    sig = stratum_signature(load_fixture("fig1"))
    assert sig.varsigma == -1 and sum(sig.nu) == 4


def test_orientability():
    assert is_orientable(load_fixture("torus"))
    assert not is_orientable(load_fixture("fig1"))
    assert is_orientable(orientation_double_cover(load_fixture("fig1")).cover)


def test_area_and_scaling():
    t = load_fixture("torus")
    assert area(t) == 1
    assert area(scale(t, 3)) == 9
    out, c, res = normalize_area(scale(t, 3))
    assert c == F(1, 3) and res == 0 and area(out) == 1
    assert area(load_fixture("lshape")) == 3


@pytest.mark.parametrize("text", ["not json", "{}", '{"triangles": [["a","b"]], "gluing": [], "holonomy": {}}'])
def test_format_errors(text):
    with pytest.raises(SurfaceFormatError):
        loads(text)


@settings(max_examples=30, deadline=None)
@given(st.fractions(min_value=F(1, 100), max_value=100), st.sampled_from(FIXTURE_NAMES))
def test_scaling_multiplies_area(c, name):
    s = load_fixture(name)
    assert area(scale(s, c)) == c * c * area(s)
    assert validate(scale(s, c)).ok
