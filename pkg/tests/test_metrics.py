from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomy_lab.metrics import (
    ProfileFormatError,
    boundary_slope,
    canonical_C,
    custom_profile,
    dump_profile,
    family_G,
    integrate_ode,
    load_profile,
    ode_residual,
    printed_Q,
    profile_W,
    refit_C,
)

rationals01 = st.fractions(min_value=0, max_value=Fraction(29, 30), max_denominator=30)
radii = st.fractions(min_value=Fraction(41, 40), max_value=6, max_denominator=40)


def test_closed_form_value():
    # n = 1, α = 0, C = -1, r = 2: (256 - 1) / 256
    assert profile_W(1, 0)(2) == Fraction(255, 256)
    assert canonical_C(1, 0) == -1
    assert canonical_C(2, Fraction(1, 2)) == -((1 - Fraction(1, 16)) ** 3)


@pytest.mark.parametrize("r", [Fraction(3, 2), 2, 3])
def test_residual_exact_zero(r):
    assert ode_residual(profile_W(2, Fraction(1, 3)), r) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), rationals01, radii)
def test_residual_vanishes_on_family(n, alpha, r):
    assert ode_residual(profile_W(n, alpha), r) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), rationals01, st.fractions(-3, 3, max_denominator=7), radii)
def test_residual_vanishes_for_any_C(n, alpha, C, r):
    # C is a free integration constant; only the boundary picks the canonical one
    assert ode_residual(profile_W(n, alpha, C), r) == 0


def test_flat_profile_is_not_a_solution():
    # u ≡ 1 (no collapse) solves Q̃ = 0 only when α = 0
    one = custom_profile(2, Fraction(1, 2), lambda r: 1 + 0 * r, "one")
    assert ode_residual(one, 2) == 4 * 2 * Fraction(1, 16)  # 4nα⁴
    zero_alpha = custom_profile(2, 0, lambda r: 1 + 0 * r, "one")
    assert ode_residual(zero_alpha, 2) == 0


def test_negative_control_profile():
    bad = custom_profile(1, Fraction(1, 2), lambda r: 1 - 1 / (r * r), "bad")
    assert ode_residual(bad, 2) != 0


def test_printed_residual_does_not_vanish():
    assert abs(printed_Q(profile_W(1, 0.5), 2.0)) > 1


def test_family_limits():
    # α = 1 collapses to 1 - r⁻⁴ and stays finite at r = 1
    hk = profile_W(3, 1)
    assert hk(1) == 0
    assert hk(2) == Fraction(15, 16)


def test_positivity():
    m = family_G(2, 0.6)
    assert all(m.is_positive(r) for r in (1.01, 1.5, 3.0, 10.0))
    assert not m.is_positive(0.99)


def test_family_rejects_bad_input():
    with pytest.raises(ValueError):
        family_G(0, 0.5)
    with pytest.raises(ValueError):
        family_G(1, 1.5)


def test_coefficients_match_closed_form():
    m = family_G(1, Fraction(1, 2))
    c = m.coefficients(Fraction(2))
    u = profile_W(1, Fraction(1, 2))(2)
    assert c["grr"].v == 1 / u
    assert c["lam"].v == u
    assert c["nu"].v == 4
    assert c["sigma"].v == Fraction(15, 8)
    assert c["Sigma"].v == Fraction(17, 8)


@pytest.mark.parametrize(
    "n, alpha, r0, r1",
    [(2, 0.9, 1.001, 4.0), (1, 0.0, 1.01, 5.0), (3, 0.5, 1.001, 4.0), (1, 1.0, 1.001, 4.0)],
)
def test_ode_matches_closed_form(n, alpha, r0, r1):
    u = profile_W(n, alpha)
    sol = integrate_ode(n, alpha, r0, u(r0), r1, tol=1e-10)
    assert abs(sol.u_end - u(r1)) / (1 + abs(u(r1))) <= 1e-8


def test_ode_alpha_zero_is_simple():
    sol = integrate_ode(1, 0.0, 1.01, 1 - 1.01**-8, 5.0)
    assert math.isclose(sol.u_end, 1 - 5.0**-8, rel_tol=1e-9)


def test_ode_refit():
    C = refit_C(1, 0.5, 1.5, 0.9)
    member = profile_W(1, 0.5, C)
    assert math.isclose(member(1.5), 0.9, rel_tol=1e-14)
    sol = integrate_ode(1, 0.5, 1.5, 0.9, 4.0)
    assert abs(sol.u_end - member(4.0)) <= 1e-8
    assert not math.isclose(C, float(canonical_C(1, 0.5)))


def test_ode_rejects():
    with pytest.raises(ValueError):
        integrate_ode(1, 0.5, 2.0, 0.9, 1.5)
    with pytest.raises(ValueError):
        integrate_ode(1, 0.5, 1.5, 0.9, 2.0, tol=0)


@pytest.mark.parametrize("n, alpha, expected", [(1, Fraction(1, 2), 4), (3, 0, 8), (2, Fraction(9, 10), 6)])
def test_boundary_slope_series(n, alpha, expected):
    res = boundary_slope(n, alpha)
    assert res.slope == expected and res.flag is None


def test_boundary_slope_hyperkahler():
    res = boundary_slope(2, 1)
    assert res.slope == 2.0 and res.flag == "hyperkahler bolt"


@pytest.mark.parametrize("n, alpha", [(1, 0.5), (2, 0.0), (3, 0.9)])
def test_boundary_routes_agree(n, alpha):
    a = boundary_slope(n, alpha, "series").slope
    b = boundary_slope(n, alpha, "richardson").slope
    assert abs(a - b) <= 1e-6


def test_profile_json_roundtrip():
    prof = profile_W(2, Fraction(1, 3))
    text = dump_profile(prof, [1.5, 2.0])
    loaded, rs = load_profile(text)
    assert rs == [1.5, 2.0]
    for r in rs:
        a, b = prof.jet(r), loaded.jet(r)
        assert np.allclose([a.v, a.d1, a.d2], [b.v, b.d1, b.d2], rtol=1e-14)
    assert json.loads(text) == json.loads(dump_profile(prof, [1.5, 2.0]))


def test_profile_json_expr():
    doc = {"n": 1, "alpha": "1/2", "expr": "1 - r**-2", "samples": [{"r": 2}]}
    prof, rs = load_profile(json.dumps(doc))
    j = prof.jet(2.0)
    assert np.allclose([j.v, j.d1, j.d2], [0.75, 0.25, -0.375])


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        json.dumps({"alpha": "1/2", "samples": []}),
        json.dumps({"n": 1, "alpha": "1/2", "samples": [{"r": 2, "u": 0.5}]}),
        json.dumps({"n": 1, "alpha": "1/2", "expr": "1 - s", "samples": [{"r": 2}]}),
        json.dumps({"n": 1, "alpha": "1/2", "expr": "1"}),
    ],
)
def test_profile_json_errors(doc):
    with pytest.raises(ProfileFormatError):
        load_profile(doc)
