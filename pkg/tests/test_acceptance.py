"""One test per acceptance criterion.  Each prints a single PASS/FAIL line,
collected again in the terminal summary."""

import pytest

from halfsurf import experiments as ex

RESULTS: dict[int, str] = {}


def record(res: ex.CriterionResult) -> ex.CriterionResult:
    RESULTS[res.number] = res.line()
    print(res.line())
    return res


def test_criterion_1_torus_asymptotics():
    r = record(ex.criterion_1())
    assert 0.6 <= r.values["ratio"] <= 1.4
    assert 1.8 <= r.values["exponent"] <= 2.2
    assert r.seconds <= 60


def test_criterion_2_thin_exponent_drop():
    r = record(ex.criterion_2())
    e = r.values["exponents"]
    assert e[5] <= 1.5
    assert e[5] > e[10] > e[20]
    assert abs(e[20] - 1) <= 0.3
    assert r.seconds <= 120


def test_criterion_3_theta_interpolation():
    r = record(ex.criterion_3())
    e = r.values["exponents"]
    for th, v in e.items():
        assert abs(v - (2 - th)) <= 0.5
    assert e[0.0] > e[0.5] > e[1.0]


def test_criterion_4_oracles():
    r = record(ex.criterion_4())
    assert r.values["bad_R"] == [] and r.values["bad_L"] == []


def test_criterion_5_flow_invariants():
    r = record(ex.criterion_5())
    assert r.values["surfaces"] == 3 * 26
    assert r.values["area"] == r.values["linear"] == r.values["spectrum"] == 0


def test_criterion_6_homology():
    r = record(ex.criterion_6())
    assert r.passed, r.values["problems"]


def test_criterion_7_residuals_vs_growth():
    r = record(ex.criterion_7())
    assert max(r.values["residuals"]) <= 2
    assert 0.8 <= r.values["exponent"] <= 1.1


def test_criterion_8_regular_triangulations():
    r = record(ex.criterion_8())
    assert r.values["runs"] >= 4 and r.values["problems"] == []


def test_criterion_9_kerckhoff():
    r = record(ex.criterion_9())
    assert max(r.values["errors"]) <= 1e-3


def test_criterion_10_walk_model():
    r = record(ex.criterion_10())
    assert r.values["mismatches"] == 0 and r.values["cert_fail"] == 0
