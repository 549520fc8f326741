"""Minimal exterior calculus over a left-invariant coframe plus a radial direction.

Forms are sparse maps from strictly increasing generator-index tuples to scalar
coefficients.  Index 0 is always the radial generator ``dr``; every other index
is a left-invariant 1-form whose exterior derivative is read off a structure
algebra (anything with a ``dgen(i)`` method, see :mod:`holonomy_lab.liealg`).

Two scalar backends share the same small interface (``+ - * diff() is_zero()``):

* :class:`ExactPoly` -- Laurent polynomials in ``r`` with rational coefficients.
* :class:`Jet` -- a value carried together with its first and second ``r``
  derivatives (forward-mode differentiation, truncated at order two).
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
import sympy

__all__ = [
    "ExactPoly",
    "Jet",
    "NumDual",
    "FormExpr",
    "wedge",
    "d",
    "top_power",
    "generator",
    "ScalarTypeError",
]


class ScalarTypeError(TypeError):
    """Raised when forms over different scalar backends are combined."""


def _canon_number(c):
    # sympy rationals collapse back to Fraction so equality and hashing stay cheap
    if isinstance(c, sympy.Basic):
        c = sympy.nsimplify(c) if c.is_Float else c
        if c.is_Rational:
            return Fraction(int(c.p), int(c.q))
        return c
    if isinstance(c, int):
        return Fraction(c)
    return c


class ExactPoly:
    """Laurent polynomial in ``r`` with exact coefficients.

    Coefficients are :class:`fractions.Fraction`; algebraic numbers such as
    ``sqrt(2)`` are admitted as sympy objects (only basis translation needs
    them).  Terms with zero coefficient are never stored.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        c = {}
        for e, v in (coeffs or {}).items():
            v = _canon_number(v)
            if v != 0:
                c[int(e)] = v
        self._c = c

    @classmethod
    def const(cls, value) -> "ExactPoly":
        return cls({0: value})

    @classmethod
    def r(cls) -> "ExactPoly":
        return cls({1: 1})

    @classmethod
    def coerce(cls, x) -> "ExactPoly":
        if isinstance(x, ExactPoly):
            return x
        if isinstance(x, (numbers.Rational, sympy.Basic)):
            return cls.const(x)
        raise ScalarTypeError(f"cannot use {type(x).__name__} as an exact coefficient")

    @property
    def coeffs(self) -> dict[int, object]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __add__(self, other):
        other = ExactPoly.coerce(other)
        out = dict(self._c)
        for e, v in other._c.items():
            out[e] = out.get(e, 0) + v
        return ExactPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactPoly({e: -v for e, v in self._c.items()})

    def __sub__(self, other):
        return self + (-ExactPoly.coerce(other))

    def __rsub__(self, other):
        return ExactPoly.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, ExactPoly):
            other = ExactPoly.coerce(other)
        out: dict[int, object] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + v1 * v2
        return ExactPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ExactPoly):
            if len(other._c) != 1:
                raise ZeroDivisionError("only division by a monomial stays polynomial")
            (e, v), = other._c.items()
            return ExactPoly({k - e: c / v for k, c in self._c.items()})
        other = _canon_number(other)
        return ExactPoly({e: v / other for e, v in self._c.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("ExactPoly powers must be non-negative integers")
        out = ExactPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def diff(self) -> "ExactPoly":
        return ExactPoly({e - 1: e * v for e, v in self._c.items() if e != 0})

    def __call__(self, r):
        """Evaluate at ``r`` (a number, a :class:`Jet`, or a numpy array)."""
        total = 0
        for e, v in self._c.items():
            if isinstance(v, sympy.Basic):
                v = float(v)
            total = total + v * r**e
        return total

    def __eq__(self, other):
        try:
            other = ExactPoly.coerce(other)
        except ScalarTypeError:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted(self._c.items())))

    def __repr__(self):
        return f"ExactPoly({self})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for e in sorted(self._c, reverse=True):
            v = self._c[e]
            mono = "" if e == 0 else ("r" if e == 1 else f"r^{e}")
            if mono and v == 1:
                parts.append(mono)
            elif mono and v == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{v}*{mono}" if mono else f"{v}")
        return " + ".join(parts).replace("+ -", "- ")


class Jet:
    """Truncated Taylor jet ``(f, f', f'')`` with respect to ``r``.

    Components may be floats, Fractions, or numpy arrays (elementwise).  The
    product and chain rules are applied through second order; ``diff`` shifts
    the jet down one order and marks the unknown third derivative as NaN.
    """

    __slots__ = ("v", "d1", "d2")
    __array_priority__ = 100  # keep Jet arithmetic when mixed with ndarrays

    def __init__(self, v, d1=0, d2=0):
        self.v = v
        self.d1 = d1
        self.d2 = d2

    @classmethod
    def variable(cls, r) -> "Jet":
        return cls(r, 1, 0)

    @classmethod
    def const(cls, value) -> "Jet":
        return cls(value, 0, 0)

    @classmethod
    def coerce(cls, x) -> "Jet":
        if isinstance(x, Jet):
            return x
        if isinstance(x, ExactPoly):
            raise ScalarTypeError("cannot mix ExactPoly and Jet coefficients")
        if isinstance(x, sympy.Basic):
            x = _canon_number(x)
            if not isinstance(x, Fraction):
                x = float(x)
        return cls(x, 0, 0)

    def __add__(self, o):
        o = Jet.coerce(o)
        return Jet(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.d1, -self.d2)

    def __sub__(self, o):
        o = Jet.coerce(o)
        return Jet(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)

    def __rsub__(self, o):
        return Jet.coerce(o) - self

    def __mul__(self, o):
        if not isinstance(o, Jet):
            if isinstance(o, ExactPoly):
                return NotImplemented
            o = Jet.coerce(o).v
            return Jet(self.v * o, self.d1 * o, self.d2 * o)
        return Jet(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2 * self.d1 * o.d1 + self.v * o.d2,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        inv = 1 / self.v
        return Jet(inv, -self.d1 * inv**2, (2 * self.d1**2 * inv - self.d2) * inv**2)

    def __truediv__(self, o):
        if not isinstance(o, Jet):
            o = Jet.coerce(o).v
            return Jet(self.v / o, self.d1 / o, self.d2 / o)
        return self * o.reciprocal()

    def __rtruediv__(self, o):
        return Jet.coerce(o) * self.reciprocal()

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet(1 + 0 * self.v, 0 * self.d1, 0 * self.d2)
            for _ in range(p):
                out = out * self
            return out
        if isinstance(p, int):
            return (self ** (-p)).reciprocal()
        # real exponent via chain rule: f^p, p f^(p-1) f', ...
        base = self.v
        fp = base ** (p - 1)
        return Jet(
            base**p,
            p * fp * self.d1,
            p * (p - 1) * base ** (p - 2) * self.d1**2 + p * fp * self.d2,
        )

    def sqrt(self) -> "Jet":
        s = np.sqrt(self.v) if isinstance(self.v, np.ndarray) else math.sqrt(self.v)
        return Jet(s, self.d1 / (2 * s), (2 * self.d2 * self.v - self.d1**2) / (4 * self.v * s))

    def diff(self) -> "Jet":
        return Jet(self.d1, self.d2, math.nan)

    def is_zero(self) -> bool:
        if isinstance(self.v, np.ndarray):
            return False
        return self.v == 0 and self.d1 == 0 and self.d2 == 0

    def __repr__(self):
        return f"Jet({self.v!r}, {self.d1!r}, {self.d2!r})"

    __str__ = __repr__


NumDual = Jet


def _scalar_type(x):
    if isinstance(x, ExactPoly):
        return ExactPoly
    if isinstance(x, Jet):
        return Jet
    raise ScalarTypeError(f"unsupported coefficient type {type(x).__name__}")


def _merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """Sign and sorted index tuple of e^a ∧ e^b, or None if they share an index."""
    if set(a) & set(b):
        return None
    inversions = sum(1 for i in a for j in b if i > j)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


class FormExpr:
    """Homogeneous differential form with a single scalar backend."""

    __slots__ = ("degree", "scalar", "terms")

    def __init__(self, degree: int, scalar=ExactPoly, terms: Mapping[tuple[int, ...], object] | None = None):
        self.degree = degree
        self.scalar = scalar
        clean = {}
        for idx, coef in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"term {idx} has wrong length for a {degree}-form")
            if any(i >= j for i, j in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing")
            coef = scalar.coerce(coef)
            if not coef.is_zero():
                clean[idx] = coef
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def zero(cls, degree: int, scalar=ExactPoly) -> "FormExpr":
        return cls(degree, scalar)

    @classmethod
    def from_unsorted(cls, degree: int, scalar, items: Iterable[tuple[tuple[int, ...], object]]) -> "FormExpr":
        """Build a form from possibly unsorted or repeated index tuples."""
        acc: dict[tuple[int, ...], object] = {}
        for idx, coef in items:
            if len(set(idx)) != len(idx):
                continue
            order = sorted(range(len(idx)), key=idx.__getitem__)
            inv = sum(1 for x in range(len(order)) for y in range(x + 1, len(order)) if order[x] > order[y])
            key = tuple(idx[k] for k in order)
            term = scalar.coerce(coef)
            if inv % 2:
                term = -term
            acc[key] = acc[key] + term if key in acc else term
        return cls(degree, scalar, acc)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "FormExpr"):
        if not isinstance(other, FormExpr):
            raise TypeError("expected a FormExpr")
        if other.scalar is not self.scalar:
            raise ScalarTypeError("forms carry different scalar backends")

    def __add__(self, other: "FormExpr") -> "FormExpr":
        self._check(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return FormExpr(self.degree, self.scalar, out)

    def __neg__(self) -> "FormExpr":
        return FormExpr(self.degree, self.scalar, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "FormExpr") -> "FormExpr":
        return self + (-other)

    def scale(self, c) -> "FormExpr":
        c = self.scalar.coerce(c)
        return FormExpr(self.degree, self.scalar, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __xor__(self, other: "FormExpr") -> "FormExpr":
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, FormExpr):
            return NotImplemented
        if self.scalar is not other.scalar or self.degree != other.degree:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def coefficient(self, idx: Iterable[int]):
        """Coefficient of e^idx, with the permutation sign if idx is unsorted."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return self.scalar.coerce(0)
        order = sorted(range(len(idx)), key=idx.__getitem__)
        inv = sum(1 for x in range(len(order)) for y in range(x + 1, len(order)) if order[x] > order[y])
        key = tuple(idx[k] for k in order)
        val = self.terms.get(key, self.scalar.coerce(0))
        return -val if inv % 2 else val

    def map_coefficients(self, fn) -> "FormExpr":
        return FormExpr(self.degree, self.scalar, {k: fn(v) for k, v in self.terms.items()})

    def render(self, names: Mapping[int, str] | None = None) -> str:
        """Deterministic one-line text rendering (lexicographic index order)."""
        if not self.terms:
            return "0"
        names = names or {}
        lines = []
        for idx, coef in self.terms.items():
            basis = "^".join(names.get(i, f"e{i}") for i in idx) or "1"
            lines.append(f"({coef})*{basis}")
        return " + ".join(lines)

    def __repr__(self):
        return f"FormExpr[{self.degree}]({self.render()})"


def generator(i: int, scalar=ExactPoly) -> FormExpr:
    return FormExpr(1, scalar, {(i,): scalar.coerce(1)})


def wedge(a: FormExpr, b: FormExpr) -> FormExpr:
    a._check(b)
    out: dict[tuple[int, ...], object] = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            merged = _merge_sign(ia, ib)
            if merged is None:
                continue
            sign, key = merged
            term = ca * cb
            if sign < 0:
                term = -term
            out[key] = out[key] + term if key in out else term
    return FormExpr(a.degree + b.degree, a.scalar, out)


def d(form: FormExpr, alg) -> FormExpr:
    """Exterior derivative; coefficients depend on ``r`` only, generators via ``alg``."""
    scalar = form.scalar
    out: dict[tuple[int, ...], object] = {}

    def add(key, val):
        out[key] = out[key] + val if key in out else val

    for idx, coef in form.terms.items():
        dc = coef.diff()
        if 0 not in idx and not dc.is_zero():
            add((0,) + idx, dc)
        for pos, g in enumerate(idx):
            # d(e^{i1}..e^{ik}) = Σ (-1)^pos e^{i1}..d e^{ipos}..e^{ik}
            for (j, k), c in alg.dgen(g):
                rest = idx[:pos] + (j, k) + idx[pos + 1:]
                if len(set(rest)) != len(rest):
                    continue
                order = sorted(range(len(rest)), key=rest.__getitem__)
                inv = sum(1 for x in range(len(order)) for y in range(x + 1, len(order)) if order[x] > order[y])
                sign = -1 if (inv + pos) % 2 else 1
                add(tuple(rest[t] for t in order), coef * scalar.coerce(c * sign))
    return FormExpr(form.degree + 1, scalar, out)


def top_power(form: FormExpr, k: int) -> FormExpr:
    """ω∧…∧ω (k factors) for an even-degree form."""
    if form.degree % 2:
        raise ValueError("top_power needs an even-degree form")
    if k < 0:
        raise ValueError("k must be non-negative")
    out = FormExpr(0, form.scalar, {(): form.scalar.coerce(1)})
    for _ in range(k):
        out = wedge(out, form)
    return out
