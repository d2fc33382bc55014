import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfsurf.counting_modular import (CountRow, CyclicWord, G_weight, canonical_rotation, class_count, count_report,
                                       dilatation, enumerate_classes, fit_exponent, kerckhoff_sup,
                                       teich_distance_tori, thin_constrained_count, torus_extremal, trace_bound,
                                       word_matrix)
from halfsurf.errors import BudgetExceeded, DegenerateFit
from halfsurf.experiments import brute_force_classes, word_letters
from halfsurf.fixtures import build_fig1, load_fixture
from halfsurf.geometry import short_curves

N3, N4 = 78, 422


def test_small_R():
    assert enumerate_classes(0.9) == []
    assert [str(c.word) for c in enumerate_classes(1.0)] == ["RL"]


@pytest.mark.parametrize("R", [1.0, 2.0, 3.0, 3.5, 4.0])
def test_brute_force_oracle(R):
    got = [word_letters(c.word) for c in enumerate_classes(R)]
    assert len(got) == len(set(got))
    assert set(got) == brute_force_classes(R)


def test_frozen_counts():
    assert class_count(3.0) == N3 and class_count(4.0) == N4


def test_traces():
    assert dilatation((1, 1))[0] == 3
    assert dilatation((2, 1))[0] == 4
    assert dilatation((2, 3))[0] == 8
    assert word_matrix((2, 3)) == (7, 2, 3, 1)
    t, lam, log_lam = dilatation((1, 1))
    assert lam == pytest.approx((3 + math.sqrt(5)) / 2) and log_lam == pytest.approx(math.log(lam))


def test_word_validation():
    with pytest.raises(ValueError):
        CyclicWord((1, 2, 3))
    with pytest.raises(ValueError):
        CyclicWord((0, 1))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=4).map(lambda d: d + d[:1] if len(d) % 2 else d),
       st.integers(0, 5))
def test_rotation_invariants(digits, k):
    k = 2 * (k % (len(digits) // 2))
    rot = digits[k:] + digits[:k]
    assert canonical_rotation(rot) == canonical_rotation(digits)
    a, _, _, d = word_matrix(digits)
    a2, _, _, d2 = word_matrix(rot)
    assert a + d == a2 + d2


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 12.0))
def test_trace_bound(R):
    t = trace_bound(R)
    assert t < 3 or math.acosh(t / 2) <= R
    assert math.acosh((t + 1) / 2) > R


def test_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_classes(10.0)


def test_fit_and_report():
    with pytest.raises(DegenerateFit):
        fit_exponent([CountRow(5.0, 10, 1.0)])
    rep = count_report([3.0, 3.5, 4.0])
    assert [r.count for r in rep.rows][0] == N3
    csv = rep.to_csv("# h")
    lines = csv.splitlines()
    assert lines[0] == "# h" and lines[1] == "R,count,ratio,fitted_exponent" and len(lines) == 5


def test_thin_counts():
    assert thin_constrained_count(4.0, 1, 0.0) == class_count(4.0)
    assert thin_constrained_count(6.0, 5, 1.0) <= thin_constrained_count(6.0, 5, 0.5) <= class_count(6.0)
    slope = fit_exponent([(R, thin_constrained_count(R, 10, 0.5)) for R in (5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0)])
    assert slope <= 2.0


def test_torus_extremal_lengths():
    sq = (F(0), F(1))
    assert torus_extremal(sq, 1, 0) == 1
    for p, q in [(2, 1), (3, 5), (-4, 7)]:
        assert torus_extremal(sq, p, q) == p * p + q * q
    with pytest.raises(ValueError):
        torus_extremal(sq, 2, 4)


def test_kerckhoff_stretch():
    assert abs(kerckhoff_sup((0, 1), (0, 4)) - 0.5 * math.log(4)) <= 1e-3
    assert teich_distance_tori((0, 1), (0, 4)) == pytest.approx(0.5 * math.log(4))


def test_G_weight():
    assert G_weight(load_fixture("torus")) == 2
    f = load_fixture("fig1")
    sh = short_curves(f, F(1, 3))
    expect = 1 + 1 / math.sqrt(sh[0].ext * sh[1].ext)
    assert G_weight(f, F(1, 3)) == pytest.approx(expect)
    assert G_weight(build_fig1(F(1, 100)), F(1, 3)) > G_weight(build_fig1(F(1, 10)), F(1, 3))
