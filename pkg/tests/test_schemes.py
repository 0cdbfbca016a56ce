from fractions import Fraction

import numpy as np
import pytest
import sympy as sym
from hypothesis import given, settings
from hypothesis import strategies as st

from implicit_af.reference_equations import REFERENCE_EQUATIONS
from implicit_af.errors import ConfigurationError, SingularCflError
from implicit_af.schemes import (
    MATCH_CFLS,
    StencilMask,
    all_masks,
    reference_mismatch,
    build_weights,
    enumerate_masks,
    interpolation_matrix,
    is_singular,
    match_reference,
    named_masks,
    resolve_scheme,
    scheme_name,
)


def sympy_weights(flags, c):
    """Independent rational oracle: interpolate symbolically, then read off the functionals."""
    tau = sym.Symbol("tau")
    c = sym.Rational(c)
    m = sum(flags)
    coef = sym.symbols(f"a0:{m}")
    p = sum(a * tau**j for j, a in enumerate(coef))
    dofs = sym.symbols("d0:6")
    conditions = [
        c * sym.integrate(p, (tau, 0, 1 / c)),
        p.subs(tau, 0),
        c * sym.integrate(p, (tau, -1 / c, 0)),
        c * sym.integrate(p, (tau, 1, 1 + 1 / c)),
        p.subs(tau, 1),
        c * sym.integrate(p, (tau, 1 - 1 / c, 1)),
    ]
    eqs = [sym.Eq(conditions[k], dofs[k]) for k in range(6) if flags[k]]
    sol = sym.solve(eqs, coef, dict=True)[0]
    p_sol = p.subs(sol)
    at_foot = sym.expand(p_sol.subs(tau, 1 - 1 / c))
    flux = sym.expand(sym.integrate(p_sol, (tau, 0, 1)))
    return ([at_foot.coeff(d) for d in dofs], [flux.coeff(d) for d in dofs])


def test_mask_counts():
    assert [len(enumerate_masks(k)) for k in (3, 4, 5, 6)] == [20, 15, 6, 1]
    assert len(all_masks()) == 42
    with pytest.raises(ConfigurationError):
        enumerate_masks(2)


def test_mask_string_round_trip():
    for m in all_masks():
        assert StencilMask.parse(str(m)) == m
    assert StencilMask.parse("010011") == StencilMask.parse("010|011")
    with pytest.raises(ConfigurationError):
        StencilMask.parse("01|011")


def test_all_six_weights_match_rational_oracle():
    flags = (1,) * 6
    wp, wf = sympy_weights(flags, 2)
    w = build_weights(StencilMask(flags), 2.0)
    np.testing.assert_allclose(w.w_point, [float(v) for v in wp], rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(w.w_flux, [float(v) for v in wf], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("mask", ["010|011", "101|011", "110|010", "000|111", "011|111"])
@pytest.mark.parametrize("c", [Fraction(3, 2), Fraction(7, 2)])
def test_exact_path_matches_rational_oracle(mask, c):
    m = StencilMask.parse(mask)
    wp, wf = sympy_weights(m.flags, c)
    w = build_weights(m, c, exact=True)
    np.testing.assert_allclose(w.w_point, [float(v) for v in wp], rtol=1e-14, atol=1e-14)
    np.testing.assert_allclose(w.w_flux, [float(v) for v in wf], rtol=1e-14, atol=1e-14)


def test_3c_worked_example():
    # printed closed forms of the point update and the numerical flux
    for c in (1.5, 3.0, 7.0):
        w = build_weights(StencilMask.parse("010|011"), c)
        den = c * (3 * c - 2)
        np.testing.assert_allclose(
            w.w_point, [0, 1 / den, 0, 0, -(1 - 4 * c + 3 * c * c) / den, 6 * (c - 1) * c / den], atol=1e-13
        )
        np.testing.assert_allclose(
            w.w_flux, [0, (c - 1) / (3 * c - 2), 0, 0, (c - 1) * (1 - c) / (3 * c - 2), c * c / (3 * c - 2)],
            atol=1e-13,
        )
    w = build_weights(StencilMask.parse("010|011"), 3.0)
    np.testing.assert_allclose(21 * w.w_point, [0, 1, 0, 0, -16, 36], atol=1e-12)
    np.testing.assert_allclose(7 * w.w_flux, [0, 2, 0, 0, -4, 9], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(all_masks()), st.floats(0.3, 9.7))
def test_weights_are_consistent(mask, c):
    try:
        w = build_weights(mask, c)
    except SingularCflError:
        return
    assert abs(w.w_point.sum() - 1) < 1e-12 * max(1.0, np.abs(w.w_point).max())
    assert abs(w.w_flux.sum() - 1) < 1e-12 * max(1.0, np.abs(w.w_flux).max())
    unused = np.logical_not(mask.flags)
    assert not w.w_point[unused].any() and not w.w_flux[unused].any()


def test_weights_reproduce_polynomials():
    # degree-(m-1) data in time are reconstructed exactly: check with p(tau) = tau**(m-1)
    c = 2.5
    for mask in all_masks():
        try:
            w = build_weights(mask, c)
        except SingularCflError:
            continue
        k = mask.order - 1
        poly = np.zeros(k + 1)
        poly[k] = 1.0
        dofs = interpolation_matrix(StencilMask((1,) * 6), c)[:, : k + 1] @ poly if k < 6 else None
        assert w.w_point @ dofs == pytest.approx((1 - 1 / c) ** k, abs=1e-10)
        assert w.w_flux @ dofs == pytest.approx(1 / (k + 1), abs=1e-10)


def test_residual_rows():
    c = 3.0
    w = build_weights(StencilMask.parse("010|011"), c)
    pr = w.point_residual()
    assert pr[("p", 1, 1)] == 1.0
    assert pr[("p", 0, 0)] == pytest.approx(-1 / 21)
    # printed average equation of the worked example, multiplied out by (3c - 2)
    printed = {
        ("a", 0, 0): 2 - 3 * c,
        ("a", 1, 1): c**3,
        ("a", 0, 1): -(2 - 3 * c + c**3),
        ("p", -1, 0): -(c - 1) * c,
        ("p", -1, 1): (c - 1) ** 2 * c,
        ("p", 0, 0): (c - 1) * c,
        ("p", 0, 1): (c - 1) * c * (1 - c),
    }
    ar = w.average_residual()
    keys = sorted(set(ar) | set(printed))
    got = np.array([ar.get(k, 0.0) for k in keys])
    want = np.array([printed.get(k, 0.0) for k in keys])
    np.testing.assert_allclose(got * (3 * c - 2), want, atol=1e-12)
    # telescoping: the flux coefficients of the two interfaces cancel in total
    assert sum(ar.values()) == pytest.approx(0.0, abs=1e-13)


def test_singular_cfl_is_reported():
    m = StencilMask.parse("111|111")
    assert is_singular(m, 1.0)
    with pytest.raises(SingularCflError, match="c=1"):
        build_weights(m, 1.0)
    with pytest.raises(ConfigurationError):
        build_weights(m, -1.0)


def test_every_named_scheme_has_one_mask():
    table = named_masks()
    assert sorted(table) == sorted(REFERENCE_EQUATIONS)
    assert len(set(table.values())) == 16
    assert str(table["3C"]) == "010|011"
    for name, mask in table.items():
        assert match_reference(mask) == name
        assert reference_mismatch(mask, name, MATCH_CFLS) <= 1e-10
        assert mask.order == int(name[0])


def test_unnamed_masks_do_not_match():
    named = set(named_masks().values())
    for mask in enumerate_masks(4):
        if mask not in named:
            assert match_reference(mask) is None


def test_resolve_scheme():
    assert resolve_scheme("4b") == named_masks()["4B"]
    assert resolve_scheme("010|011") == named_masks()["3C"]
    assert scheme_name(StencilMask.parse("010|011")) == "3C"
    assert scheme_name(StencilMask.parse("111|111")) == "111|111"
    for bad in ("9Z", "010|000", ""):
        with pytest.raises(ConfigurationError):
            resolve_scheme(bad)
