import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfsurf.errors import BudgetExceeded, NotContractive
from halfsurf.experiments import brute_force_walks, contractive_net, random_net
from halfsurf.walk_model import (NetEdge, NetGraph, TrajectoryQuery, average_operator, check_contraction,
                                 count_trajectories, load_net, verify_counting_bound)


def test_no_thin_edges():
    g = NetGraph({0: 1, 1: 1}, [NetEdge(0, 1, 0), NetEdge(1, 0, 0)])
    assert average_operator(g, g.weights) == {0: 0, 1: 0}


def test_self_loop():
    g = NetGraph({0: 1}, [NetEdge(0, 0, 1)], h=2, lam=F(3))
    assert average_operator(g, {0: 1}) == {0: F(1, 9)}
    assert count_trajectories(g, TrajectoryQuery(0, 5, 1)) == 1


def test_average_operator_oracle():
    rng = random.Random(5)
    g = random_net(rng, 50, p=0.1)
    f = {v: F(rng.randint(1, 9), rng.randint(1, 9)) for v in g.nodes}
    got = average_operator(g, f)
    for v in g.nodes:
        direct = F(0)
        for e in g.edges:
            if e.source == v and e.thin >= 1:
                direct += f[e.target]
        assert got[v] == direct / 9


def test_complete_graph():
    g = NetGraph({i: 1 for i in range(3)}, [NetEdge(u, v, 0) for u in range(3) for v in range(3)])
    assert count_trajectories(g, TrajectoryQuery(0, 4, 0)) == 81


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 6), st.integers(1, 8), st.sampled_from([0, F(1, 3), F(1, 2), 1]))
def test_dp_matches_brute_force(seed, n_nodes, n, theta):
    rng = random.Random(seed)
    g = random_net(rng, n_nodes)
    end = rng.choice(g.nodes + [None])
    q = TrajectoryQuery(0, n, theta, end)
    assert count_trajectories(g, q) == brute_force_walks(g, q)


def _contractive_graph():
    # c = 1, m = 1, lambda = 3: each node has one thin and two thick out-edges
    w = {"a": 1, "b": 1, "c": 1}
    edges = [NetEdge("a", "b", 1), NetEdge("b", "c", 1), NetEdge("c", "a", 1)]
    edges += [NetEdge(u, v, 0) for u in w for v in w if u != v]
    return NetGraph(w, edges, 2, F(3), 1, 1, 1)


def test_certificate_holds():
    g = _contractive_graph()
    check_contraction(g)
    cert = verify_counting_bound(g, "a", n_max=20)
    assert cert.holds and len(cert.rows) == 20 and not cert.failures()


def test_violation_names_node():
    g = NetGraph({"ok": 1, "bad": 1}, [NetEdge("bad", "ok", 1)] * 40 + [NetEdge("ok", "bad", 0)], 2, F(3))
    with pytest.raises(NotContractive) as info:
        check_contraction(g)
    assert info.value.node == "bad"


def test_theta_zero_consistency():
    g = _contractive_graph()
    cert = verify_counting_bound(g, "a", n_max=8, thetas=(0,))
    for row in cert.rows:
        for w in g.nodes:
            cnt = count_trajectories(g, TrajectoryQuery("a", row["n"], 0, w))
            assert cnt <= row["V"] / g.weights[w]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1, 2]))
def test_enforced_certificates(seed, j):
    rng = random.Random(seed)
    g = contractive_net(random_net(rng, rng.randint(2, 6), lam=F(rng.choice([2, 3, 5])), j=j))
    assert verify_counting_bound(g, 0, n_max=10, j=j).holds


def test_net_file_round_trip(tmp_path):
    g = _contractive_graph()
    p = tmp_path / "n.json"
    p.write_text(json.dumps(g.to_dict()))
    h = load_net(p)
    assert h.weights == g.weights and h.edges == g.edges and h.lam == g.lam


def test_query_validation():
    with pytest.raises(ValueError):
        TrajectoryQuery(0, 0)
    with pytest.raises(ValueError):
        TrajectoryQuery(0, 3, F(3, 2))


def test_budget():
    g = random_net(random.Random(0), 6)
    with pytest.raises(BudgetExceeded):
        count_trajectories(g, TrajectoryQuery(0, 2000, 0))
