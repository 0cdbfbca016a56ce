import math

import numpy as np
import pytest

from implicit_af.core import Constant, Grid1D, Sine, StateAF, error_norms, exact_advection, init_state
from implicit_af.errors import ConfigurationError
from implicit_af.semidiscrete import (
    TABLEAUX,
    ButcherTableau,
    irk_step,
    irk_system,
    rhs_matrix,
    run_semidiscrete,
    semidiscrete_rhs,
)
from implicit_af.solver import AdvectionProblem


def test_tableaux_as_printed():
    r = TABLEAUX["radau-iia"]
    np.testing.assert_array_equal(r.A, [[5 / 12, -1 / 12], [3 / 4, 1 / 4]])
    np.testing.assert_array_equal(r.b, [3 / 4, 1 / 4])
    np.testing.assert_array_equal(r.c, [1 / 3, 1])
    r = TABLEAUX["radau-ia"]
    np.testing.assert_array_equal(r.A, [[1 / 4, -1 / 4], [1 / 4, 5 / 12]])
    np.testing.assert_array_equal(r.c, [0, 2 / 3])
    g = 0.5 + math.sqrt(3) / 6
    np.testing.assert_allclose(TABLEAUX["dirk-crouzeix"].A, [[g, 0], [-math.sqrt(3) / 3, g]])


@pytest.mark.parametrize("name", sorted(TABLEAUX))
def test_row_sums_equal_nodes(name):
    t = TABLEAUX[name]
    np.testing.assert_allclose(t.A.sum(axis=1), t.c, atol=1e-15)
    assert t.b.sum() == pytest.approx(1.0, abs=1e-15)


def test_scalar_surrogates():
    z = -0.7 + 0.2j
    assert TABLEAUX["backward-euler"].stability_function(z) == pytest.approx(1 / (1 - z))
    assert TABLEAUX["crank-nicolson"].stability_function(z) == pytest.approx((1 + z / 2) / (1 - z / 2))
    pade_12 = (1 + z / 3) / (1 - 2 * z / 3 + z * z / 6)
    assert TABLEAUX["radau-iia"].stability_function(z) == pytest.approx(pade_12)
    assert TABLEAUX["radau-ia"].stability_function(z) == pytest.approx(pade_12)


def test_bad_tableau():
    with pytest.raises(ConfigurationError):
        ButcherTableau("x", [[1.0]], [0.5], [1.0])
    with pytest.raises(ConfigurationError):
        ButcherTableau("x", [[1.0, 0.0]], [1.0], [1.0])


def test_rhs_of_constant_vanishes():
    s = init_state(Grid1D(9), Constant(3.0))
    d = semidiscrete_rhs(s, 1.0, 0.1)
    np.testing.assert_allclose(d.to_vector(), 0.0, atol=1e-12)


def test_rhs_of_single_point_value():
    n, u, dx = 6, 2.0, 0.5
    p = np.zeros(n)
    p[1] = 1.0  # right interface of cell 0
    d = semidiscrete_rhs(StateAF(np.zeros(n), p), u, dx)
    assert d.averages[0] == -u / dx
    assert d.averages[1] == u / dx
    assert d.point_values[1] == -4 * u / dx
    assert d.point_values[2] == -2 * u / dx


def test_rhs_symbol():
    # d/dt of a Fourier mode: finite-difference symbol of the two update formulas
    n, u, dx = 16, 1.0, 1 / 16
    beta = 2 * math.pi * 3 / n
    k = np.arange(n)
    p_hat, a_hat = 0.3 + 0.1j, -0.2 + 0.4j
    p = p_hat * np.exp(1j * beta * (k - 1))  # interface k is the right edge of cell k - 1
    a = a_hat * np.exp(1j * beta * k)
    L = rhs_matrix(n, u, dx).toarray()
    y = np.empty(2 * n, dtype=complex)
    y[0::2], y[1::2] = p, a
    d = L @ y
    np.testing.assert_allclose(d[1::2], -u / dx * (np.exp(1j * beta) - 1) * p_hat * np.exp(1j * beta * (k - 1)), atol=1e-12)
    want = -u / dx * (2 * np.exp(-1j * beta) * p_hat - 6 * a_hat + 4 * p_hat) * np.exp(1j * beta * (k - 1))
    np.testing.assert_allclose(d[0::2], want, atol=1e-12)


def test_matrix_and_function_agree():
    g = Grid1D(12)
    s = init_state(g, Sine())
    d = semidiscrete_rhs(s, 1.3, g.dx)
    np.testing.assert_allclose(rhs_matrix(12, 1.3, g.dx) @ s.to_vector(), d.to_vector(), atol=1e-12)


@pytest.mark.parametrize("name", sorted(TABLEAUX))
def test_step_conserves_mass(name):
    g = Grid1D(30)
    s = init_state(g, lambda x: 1 + np.exp(-50 * (x - 0.5) ** 2))
    out = irk_step(name, s, 0.1, 1.0, g.dx)
    assert out.total_mass(g.dx) == pytest.approx(s.total_mass(g.dx), rel=1e-13)


@pytest.mark.parametrize("name", sorted(TABLEAUX))
def test_stable_at_cfl_3(name):
    system = irk_system(name, 100, 1.0, 0.01, 0.03)
    assert np.abs(np.linalg.eigvals(system.one_step_matrix())).max() <= 1 + 1e-10


def test_dirichlet_is_rejected():
    s = init_state(Grid1D(5), Sine(), periodic=False)
    with pytest.raises(ConfigurationError):
        semidiscrete_rhs(s, 1.0, 0.2)
    with pytest.raises(ConfigurationError):
        irk_step("radau-iia", s, 0.1, 1.0, 0.2)
    with pytest.raises(ConfigurationError):
        irk_step("explicit-euler", init_state(Grid1D(5), Sine()), 0.1, 1.0, 0.2)


@pytest.mark.parametrize("name,order", [("backward-euler", 1), ("crank-nicolson", 2), ("radau-iia", 3)])
def test_orders(name, order):
    p = AdvectionProblem(1.0, Sine())
    errs = []
    for n in (80, 160):
        g = Grid1D(n)
        r = run_semidiscrete(p, g, name, 0.5, 1.0)
        errs.append(error_norms(r.final, exact_advection(Sine(), 1.0, r.actual_T, g), g.dx)["L1_avg"])
    assert math.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.3)
