import math

import numpy as np
import pytest

from newsflow.news_params import (cardinal_aggregates, cardinal_turning,
                                  compile_intersection, compile_network,
                                  network_means, project_io_demand, supply_ratios)
from newsflow.network import load_network

from conftest import (cross_nodes_streets, cross_through_turning,
                      cross_uniform_turning, make_net)

GAMMA = 1.0 / 3.0
N, E, W, S = 0, 1, 2, 3


def two_feeder_net(phi_ratio: float = 1.0):
    """Two eastbound feeders i1, i2 merging into one outgoing street j."""
    nodes = [("A", -100, 30), ("B", -100, -30), ("X", 0, 0), ("C", 100, 0)]
    streets = [("i1", "A", "X", 100, 1, 10.0, 0.5 * phi_ratio),
               ("i2", "B", "X", 100, 1, 10.0, 0.5),
               ("j", "X", "C", 100, 1, 10.0)]
    turning = {"X": {("i1", "j"): 0.5, ("i2", "j"): 0.5}}
    return make_net(nodes, streets, turning)


def test_supply_ratios_single_feeder():
    nodes = [("A", -100, 0), ("X", 0, 0), ("C", 100, 0)]
    streets = [("i", "A", "X", 100, 1, 10.0), ("j", "X", "C", 100, 1, 10.0)]
    net = make_net(nodes, streets, {"X": {("i", "j"): 1.0}})
    assert supply_ratios(net, "X", GAMMA) == {("i", "j"): 1.0}


def test_supply_ratios_symmetric_feeders():
    beta = supply_ratios(two_feeder_net(1.0), "X", GAMMA)
    assert beta[("i1", "j")] == pytest.approx(0.5)
    assert beta[("i2", "j")] == pytest.approx(0.5)


def test_supply_ratios_capacity_weighted():
    beta = supply_ratios(two_feeder_net(2.0), "X", GAMMA)
    assert beta[("i1", "j")] == pytest.approx(2.0 / 3.0)
    assert beta[("i2", "j")] == pytest.approx(1.0 / 3.0)


def test_supply_ratio_columns_sum_to_one(fixtures_dir):
    net = load_network(fixtures_dir / "town.net")
    for node in net.intersections:
        beta = supply_ratios(net, node.id, GAMMA)
        for s_out in net.outgoing(node.id):
            column = [beta[(s_in.id, s_out.id)] for s_in in net.incoming(node.id)]
            feeder = sum(net.turning.alpha(node.id, s_in.id, s_out.id)
                         for s_in in net.incoming(node.id))
            if feeder > 0:
                assert sum(column) == pytest.approx(1.0, abs=1e-9)
            else:
                assert all(b == 0.0 for b in column)


def test_cardinal_turning_all_through_cross():
    nodes, streets = cross_nodes_streets()
    net = make_net(nodes, streets, cross_through_turning())
    beta = supply_ratios(net, "X", GAMMA)
    alpha_c, beta_c = cardinal_turning(net, "X", beta, GAMMA)
    assert alpha_c[E, E] == pytest.approx(1.0)
    assert alpha_c[E, N] == pytest.approx(0.0)
    assert beta_c[E, E] == pytest.approx(1.0)
    # every incoming cardinal keeps its direction
    assert np.allclose(np.diag(alpha_c), 1.0)


def test_cardinal_turning_uniform_cross():
    nodes, streets = cross_nodes_streets()
    net = make_net(nodes, streets, cross_uniform_turning())
    beta = supply_ratios(net, "X", GAMMA)
    alpha_c, _ = cardinal_turning(net, "X", beta, GAMMA)
    assert alpha_c[E, N] == pytest.approx(1.0 / 3.0)
    assert np.allclose(alpha_c.sum(axis=1), 1.0)


def test_cardinal_turning_eastbound_only():
    nodes = [("A", -100, 0), ("X", 0, 0), ("C", 100, 0)]
    streets = [("i", "A", "X", 100, 1, 10.0), ("j", "X", "C", 100, 1, 10.0)]
    net = make_net(nodes, streets, {"X": {("i", "j"): 1.0}})
    beta = supply_ratios(net, "X", GAMMA)
    alpha_c, _ = cardinal_turning(net, "X", beta, GAMMA)
    assert np.all(alpha_c[N] == 0.0)
    assert np.all(alpha_c[W] == 0.0)
    assert np.all(alpha_c[S] == 0.0)
    assert alpha_c[E, E] == pytest.approx(1.0)


def test_aggregates_single_north_street():
    nodes = [("X", 0, 0), ("T", 0, 100)]
    streets = [("up", "X", "T", 100, 1, 10.0)]
    net = make_net(nodes, streets, {})
    means = network_means(net, GAMMA)
    cos_bar, sin_bar, v_max, rho_max, rho_crit, length = cardinal_aggregates(
        net, "X", GAMMA, means)
    assert cos_bar[N] == pytest.approx(0.0)
    assert sin_bar[N] == pytest.approx(1.0)
    assert length == pytest.approx(100.0)
    assert v_max[N] == pytest.approx(10.0)
    assert rho_max[N] == pytest.approx(1.0 / 6.0)
    assert rho_crit[N] == pytest.approx(GAMMA / 6.0)


def test_aggregates_symmetric_ne_nw():
    nodes = [("X", 0, 0), ("P", 100, 100), ("Q", -100, 100)]
    streets = [("ne", "X", "P", 141.42, 1, 10.0), ("nw", "X", "Q", 141.42, 1, 10.0)]
    net = make_net(nodes, streets, {})
    cos_bar, sin_bar, *_ = cardinal_aggregates(net, "X", GAMMA,
                                               network_means(net, GAMMA))
    assert cos_bar[N] == pytest.approx(0.0, abs=1e-15)
    assert sin_bar[N] == pytest.approx(math.sqrt(2) / 2, rel=1e-12)


def test_length_scale_weighted_by_jam_density():
    nodes = [("X", 0, 0), ("P", 100, 0), ("Q", 0, 200)]
    streets = [("a", "X", "P", 100, 1, 10.0), ("b", "X", "Q", 200, 2, 10.0)]
    net = make_net(nodes, streets, {})
    *_, length = cardinal_aggregates(net, "X", GAMMA, network_means(net, GAMMA))
    assert length == pytest.approx((1 * 100 + 2 * 200) / 3.0)


def test_unprojected_direction_gets_network_means():
    nodes = [("A", -100, 0), ("X", 0, 0), ("C", 100, 0)]
    streets = [("i", "A", "X", 100, 1, 10.0), ("j", "X", "C", 100, 1, 10.0)]
    net = make_net(nodes, streets, {"X": {("i", "j"): 1.0}})
    means = network_means(net, GAMMA)
    cos_bar, sin_bar, v_max, rho_max, rho_crit, _ = cardinal_aggregates(
        net, "X", GAMMA, means)
    for d in (N, W, S):
        assert cos_bar[d] == 0.0 and sin_bar[d] == 0.0
        assert v_max[d] == means.v_max
        assert rho_max[d] == means.rho_max
        assert rho_crit[d] == means.rho_crit


def test_project_io_single_north_street():
    nodes = [("X", 0, 0), ("T", 0, 100)]
    streets = [("up", "X", "T", 100, 1, 10.0)]
    net = make_net(nodes, streets, {})
    projected = project_io_demand(list(net.outgoing("X")), np.array([[600.0]]))
    assert projected[N, 0] == pytest.approx(600.0)
    assert projected[[E, W, S], 0].tolist() == [0.0, 0.0, 0.0]


def test_project_io_diagonal_split():
    nodes = [("X", 0, 0), ("T", 100, 100)]
    streets = [("ne", "X", "T", 141.0, 1, 10.0)]
    net = make_net(nodes, streets, {})
    projected = project_io_demand(list(net.outgoing("X")), np.array([[1.0]]))
    assert projected[N, 0] == pytest.approx(0.5)
    assert projected[E, 0] == pytest.approx(0.5)


def test_projection_scale_invariance():
    """Moving the arm endpoints outward (same street lengths) changes nothing."""
    results = []
    for arm in (100.0, 350.0):
        nodes, streets = cross_nodes_streets(arm=arm)
        streets = [(sid, a, b, 100.0, lanes, v) for sid, a, b, _, lanes, v in streets]
        net = make_net(nodes, streets, cross_uniform_turning())
        results.append(compile_intersection(net, "X", GAMMA))
    first, second = results
    assert np.allclose(first.cos_bar, second.cos_bar, atol=1e-14)
    assert np.allclose(first.sin_bar, second.sin_bar, atol=1e-14)
    assert np.allclose(first.alpha, second.alpha, atol=1e-14)
    assert np.allclose(first.beta, second.beta, atol=1e-14)
    assert np.allclose(first.rho_max, second.rho_max, atol=1e-14)
    assert first.length_scale == second.length_scale


def test_cos_bar_east_nonnegative_for_eastish_streets():
    rng = np.random.default_rng(3)
    for trial in range(50):
        n_out = rng.integers(1, 5)
        nodes = [("X", 0, 0)]
        streets = []
        for idx in range(n_out):
            xi = rng.uniform(0.0, 100.0)
            eta = rng.uniform(-100.0, 100.0)
            if xi + abs(eta) < 1.0:
                xi += 1.0
            nodes.append((f"T{idx}", xi, eta))
            streets.append((f"s{idx}", "X", f"T{idx}", 100.0, 1, 10.0))
        net = make_net(nodes, streets, {})
        cos_bar, *_ = cardinal_aggregates(net, "X", GAMMA, network_means(net, GAMMA))
        assert cos_bar[E] >= -1e-12


def test_compile_network_invariants(fixtures_dir):
    net = load_network(fixtures_dir / "town.net")
    params = compile_network(net, GAMMA)
    assert set(params) == {n.id for n in net.intersections}
    for p in params.values():
        assert np.all(p.cos_bar**2 + p.sin_bar**2 <= 1.0 + 1e-9)
        assert np.all(p.rho_crit > 0) and np.all(p.rho_crit <= p.rho_max + 1e-12)
        assert p.length_scale > 0
