import json
import math

import numpy as np
import pytest

from implicit_af.core import Grid1D, Zero, init_state
from implicit_af.errors import ConfigurationError, SingularCouplingError
from implicit_af.network import (
    Edge,
    NetworkConfig,
    SumSignal,
    build_solver,
    config_from_dict,
    exact_network_solution,
    initial_states,
    junction_coefficients,
    junction_order_for,
    load_config,
    network_step,
    run_network,
    six_edge_config,
    validate,
)
from implicit_af.solver import AdvectionProblem, ConstantSignal, Dirichlet, SineSignal, run


def six_edge(dx=1 / 8):
    return config_from_dict(six_edge_config(dx))


def test_six_edge_config_is_valid():
    cfg = six_edge()
    assert validate(cfg) == []
    tau = cfg.crossing_times()
    assert tau == {"1": 5.0, "2": 10.0, "3": 20.0, "4": 30.0, "5": pytest.approx(11.5), "6": 30.0}
    assert [e.id for e in cfg.topological_edges()][:1] == ["1"]


def test_interference_condition():
    tau = six_edge().crossing_times()
    omega = 2 * math.pi / 3
    assert omega * (tau["2"] + tau["5"]) == pytest.approx(omega * tau["3"] + math.pi, abs=1e-12)
    assert 3 / 4 * (1 - 2 / 3) == pytest.approx(1 - 3 / 4)


def test_validation_errors():
    d = six_edge_config()
    d["edges"][1]["alpha"] = 0.5
    d["edges"][2]["alpha"] = 0.6
    errors = validate(config_from_dict(d))
    assert any("N1" in e and "sum" in e for e in errors)

    d = six_edge_config()
    d["edges"].append({"id": "7", "from": "N5", "to": "N1", "length": 1, "speed": 1, "n_cells": 8})
    d["edges"][5]["alpha"] = 1.0
    d["edges"][-1]["alpha"] = 1.0
    d["edges"][1]["alpha"] = 0.75
    assert any("cycle" in e for e in validate(config_from_dict(d)))

    d = six_edge_config()
    d["edges"][0]["speed"] = -1
    assert any("speed" in e for e in validate(config_from_dict(d)))

    # c = 0.5 on edge 1
    assert any("edge '1'" in e and "CFL" in e for e in validate(six_edge(), dt=0.0625))


def test_junction_reconstruction_closed_form():
    c = 2.0
    qm, q0, q1 = 0.3, -0.7, 1.1  # q^n_{N-1/2}, q^n_{N+1/2}, q^{n+1}_{N+1/2}
    coeffs = junction_coefficients(3, c, qm, q0, q1)
    lin = (c * c * (q0 - qm) + q1 - q0) / (1 - c)
    quad = c * (q1 - q0 + c * (q0 - qm)) / (c - 1)
    np.testing.assert_allclose(coeffs, [q0, lin, quad], atol=1e-14)


def test_junction_reconstruction_conditions():
    for order in (3, 4):
        for c in (1.7, 5.0, 10.0):
            coeffs = junction_coefficients(order, c, 0.2, -0.4, 0.9, 0.1)
            p = np.polynomial.Polynomial(coeffs)
            assert p(0) == pytest.approx(-0.4)
            assert p(1) == pytest.approx(0.9)
            assert p(1 / c) == pytest.approx(0.2)
            if order == 4:
                assert c * p.integ()(1 / c) == pytest.approx(0.1)
            k = junction_coefficients(order, c, 2.0, 2.0, 2.0, 2.0)
            np.testing.assert_allclose(k, [2.0] + [0.0] * (order - 1), atol=1e-12)


def test_junction_reconstruction_is_singular_at_unit_cfl():
    with pytest.raises(SingularCouplingError):
        junction_coefficients(3, 1.0 + 1e-10, 0.0, 0.0, 0.0)


def test_junction_order():
    assert junction_order_for("3C") == 3
    assert junction_order_for("4B") == 4
    assert junction_order_for("5A") == 4


def test_sum_signal_splits_mass():
    parts = (SineSignal(1.0), ConstantSignal(0.5))
    a = SumSignal(parts, 0.25)
    b = SumSignal(parts, 0.75)
    t = np.linspace(0, 2, 7)
    np.testing.assert_allclose(a(t) + b(t), SumSignal(parts)(t), atol=1e-15)


def test_zero_network_stays_zero():
    d = six_edge_config(0.5)
    d["initial"] = []
    d["boundary"]["amplitude"] = 0.0
    r = run_network(config_from_dict(d), "4B", 5.0, 10.0)
    for s in r.states.values():
        assert not s.to_vector().any()


def test_single_edge_matches_solver():
    edge = Edge("a", "in", "out", 2.0, 1.5, 16, 1.0)
    cfg = NetworkConfig(("in", "out"), (edge,), SineSignal(2.0))
    r = run_network(cfg, "4B", 3.0, 3.0)
    direct = run(AdvectionProblem(1.5, Zero(), Dirichlet(SineSignal(2.0))), edge.grid, "4B", 3.0, 3.0)
    np.testing.assert_allclose(r.states["a"].to_vector(), direct.final.to_vector(), atol=1e-15)


def test_junction_flux_is_consistent():
    cfg = six_edge(0.5)
    solver = build_solver(cfg, "4B", 5 * 0.5)
    states = initial_states(cfg)
    t_n, dt = 0.0, solver.dt
    new = network_step(solver, states, t_n)
    # outflow through N1 over the step equals the summed inflow of edges 2 and 3
    from implicit_af.network import junction_reconstruction
    from implicit_af.solver import window_average

    recon = junction_reconstruction(4, solver.systems["1"].c, states["1"], new["1"], t_n, dt)
    out = window_average(recon, t_n, t_n + dt)
    inflow = sum(window_average(SumSignal((recon,), cfg.edge(k).alpha), t_n, t_n + dt) for k in ("2", "3"))
    assert inflow == pytest.approx(out, rel=1e-12, abs=1e-15)


def test_exact_solution_formulas():
    cfg = six_edge()
    b = lambda t: math.sin(2 * math.pi / 3 * t)
    t = 83.3
    assert exact_network_solution(cfg, t, "4", 0.0) == pytest.approx(0.5 * b(t - 15))
    for x in (0.0, 7.5, 30.0):
        assert exact_network_solution(cfg, t, "6", x) == pytest.approx(0.0, abs=1e-12)
    assert exact_network_solution(cfg, t, "3", 4.0) == pytest.approx(0.25 * b(t - 5 - 4))
    with pytest.raises(ConfigurationError):
        exact_network_solution(cfg, 3.0, "6", 1.0)


def test_load_config(tmp_path):
    path = tmp_path / "net.json"
    path.write_text(json.dumps(six_edge_config()))
    cfg = load_config(path)
    assert len(cfg.edges) == 6 and cfg.edge("5").speed == pytest.approx(40 / 23)
    path.write_text("{")
    with pytest.raises(ConfigurationError):
        load_config(path)
    with pytest.raises(ConfigurationError):
        config_from_dict({"nodes": [], "edges": [{"id": 1}], "boundary": {"type": "sine", "omega": 1}})


def test_edge_six_decreases_with_resolution():
    peaks = []
    for dx in (1 / 8, 1 / 16):
        r = run_network(six_edge(dx), "4B", 5.0, 70.0)
        peaks.append(np.abs(r.states["6"].point_values).max())
    assert peaks[1] < peaks[0] / 8
