from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomy_lab.exterior import ExactPoly, FormExpr, Jet, ScalarTypeError, d, generator, top_power, wedge
from holonomy_lab.holonomy import build_omega
from holonomy_lab.liealg import build_algebra

ALG1 = build_algebra(1)
R = ExactPoly.r()

small = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@st.composite
def polys(draw):
    coeffs = draw(st.dictionaries(st.integers(-3, 3), small, max_size=3))
    return ExactPoly(coeffs)


@st.composite
def forms(draw, degree, dim=ALG1.dim):
    keys = draw(st.lists(st.sets(st.integers(0, dim - 1), min_size=degree, max_size=degree), max_size=4))
    items = [(tuple(sorted(k)), draw(polys())) for k in keys]
    return FormExpr.from_unsorted(degree, ExactPoly, items)


def test_wedge_examples():
    e1, e2, e3 = generator(1), generator(2), generator(3)
    assert (e2 ^ e1) == -(e1 ^ e2)
    assert (e1 ^ e1).is_zero()
    tri = e3 ^ e1 ^ e2
    assert tri.terms == {(1, 2, 3): ExactPoly.const(1)}
    two = (e1 ^ e2).scale(R)
    assert (two ^ e3).coefficient((1, 2, 3)) == R


def test_from_unsorted_sign():
    f = FormExpr.from_unsorted(2, ExactPoly, [((3, 1), ExactPoly.const(2))])
    assert f.coefficient((1, 3)) == ExactPoly.const(-2)


@settings(max_examples=40, deadline=None)
@given(forms(1), forms(2))
def test_leibniz(a, b):
    lhs = d(wedge(a, b), ALG1)
    rhs = wedge(d(a, ALG1), b) - wedge(a, d(b, ALG1))
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(forms))
def test_d_squared_random(form):
    assert d(d(form, ALG1), ALG1).is_zero()


def test_d_squared_n3():
    alg = build_algebra(3)
    for k in alg.horizontal[:6]:
        f = generator(k).scale(R**3 + 2)
        assert d(d(f, alg), alg).is_zero()


def test_exactpoly_arithmetic():
    p = (R + 1) ** 2
    assert p == R * R + 2 * R + 1
    assert p.diff() == 2 * R + 2
    assert ExactPoly({-2: 1}).diff() == ExactPoly({-3: -2})
    assert p(Fraction(1, 2)) == Fraction(9, 4)
    assert (R * R / 2)(3) == Fraction(9, 2)


def test_jet_matches_exactpoly():
    p = 3 * R**4 - ExactPoly({-3: 1}) + Fraction(1, 7) * R
    for r in (1.2, 2.5, 4.0):
        j = Jet.variable(r)
        q = 3 * j**4 - j**-3 + (1 / 7) * j
        assert math.isclose(q.v, float(p(Fraction(r))), rel_tol=1e-12)
        assert math.isclose(q.d1, float(p.diff()(Fraction(r))), rel_tol=1e-12)
        assert math.isclose(q.d2, float(p.diff().diff()(Fraction(r))), rel_tol=1e-12)


def test_jet_sqrt_and_arrays():
    x = Jet.variable(np.array([2.0, 3.0]))
    s = (x * x + 1).sqrt()
    v = np.array([2.0, 3.0])
    assert np.allclose(s.v, np.sqrt(v * v + 1))
    assert np.allclose(s.d1, v / np.sqrt(v * v + 1))
    assert np.allclose(s.d2, (v * v + 1) ** -1.5)


def test_jet_diff_marks_unknown():
    j = Jet.variable(2.0) ** 3
    dj = j.diff()
    assert dj.v == 12.0 and dj.d1 == 12.0 and math.isnan(dj.d2)


def test_jet_keeps_fractions():
    j = Jet.variable(Fraction(3, 2)) ** 2 + Fraction(1, 3)
    assert j.v == Fraction(9, 4) + Fraction(1, 3)
    assert isinstance(j.d1, Fraction)


def test_top_power_frozen_value():
    # Ω⁴ for n = 1, α = 1/2: 4!·r·2r²·(-(r²+α²))(r²-α²) on dr∧λ∧…∧Σ₂
    om = build_omega(1, Fraction(1, 2)).form
    top = top_power(om, 4)
    coef = top.coefficient(tuple(range(8)))
    assert coef(2) == -6120
    assert coef(Fraction(3, 2)) == -810
    r, a2 = Fraction(5, 3), Fraction(1, 4)
    assert coef(r) == 24 * r * 2 * r * r * (-(r * r + a2)) * (r * r - a2)


def test_top_power_rejects_odd():
    with pytest.raises(ValueError):
        top_power(generator(1), 2)


def test_mixed_scalars_rejected():
    a = generator(1)
    b = FormExpr(1, Jet, {(2,): Jet.const(1.0)})
    with pytest.raises(ScalarTypeError):
        a + b
    with pytest.raises(ScalarTypeError):
        Jet.coerce(R)


def test_render_is_stable():
    f = (generator(1) ^ generator(2)).scale(R * 2) + (generator(3) ^ generator(4))
    assert f.render(ALG1.names) == f.render(ALG1.names)
    assert "lam" in f.render(ALG1.names)


def test_form_degree_mismatch():
    with pytest.raises((ValueError, TypeError)):
        generator(1) + (generator(1) ^ generator(2))


def test_all_pairs_anticommute():
    gens = [generator(i) for i in range(5)]
    for a, b in itertools.combinations(gens, 2):
        assert (a ^ b) + (b ^ a) == FormExpr.zero(2)
