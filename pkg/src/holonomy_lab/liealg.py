"""Structure constants of su(n+2) in the coframe adapted to SU(n+2)/S(U(n)×U(1)).

The complex left-invariant forms satisfy ``dL_A^B = i L_A^C ∧ L_C^B`` with
``L_A^B(X) = i X_AB`` on anti-Hermitian ``X``; conjugation swaps the indices.
Matrix slot 0 is ``A = 1``, slot 1 is ``A = 2`` and slot ``1 + β`` is ``β``.

Real coframe (generator order is fixed and used everywhere else)::

    0            dr (radial, not part of the algebra)
    1            λ  = L_1^1 - L_2^2
    2, 3         ν₁, ν₂            with ν  = L_1^2 = ν₁ + iν₂
    4+2(β-1)+s   σ_{1β}, σ_{2β}     with σ_β = L_1^β
    4+2n+2(β-1)+s Σ_{1β}, Σ_{2β}    with Σ_β = L_2^β
    4n+4 ...     vertical (isotropy) generators, n² of them

All arithmetic is exact (Gaussian rationals built from ``Fraction``).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exterior import ExactPoly, FormExpr

__all__ = [
    "GeneratorIndex",
    "StructureAlgebra",
    "build_algebra",
    "exterior_derivative_table",
    "translate_basis",
    "ETA_NAMES",
]

# Gaussian rationals as (re, im) pairs of Fractions
_ZERO = (Fraction(0), Fraction(0))


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _mat(entries):
    return {k: (Fraction(v[0]), Fraction(v[1])) for k, v in entries.items()}


def _matmul(x, y):
    out = {}
    for (a, b), xv in x.items():
        for (b2, c), yv in y.items():
            if b == b2:
                out[(a, c)] = _gadd(out.get((a, c), _ZERO), _gmul(xv, yv))
    return {k: v for k, v in out.items() if v != _ZERO}


def _bracket(x, y):
    xy, yx = _matmul(x, y), _matmul(y, x)
    out = dict(xy)
    for k, v in yx.items():
        out[k] = _gadd(out.get(k, _ZERO), (-v[0], -v[1]))
    return {k: v for k, v in out.items() if v != _ZERO}


@dataclass(frozen=True)
class GeneratorIndex:
    """Classification of one coframe generator.

    ``kind`` is one of ``Radial, Lambda, Nu1, Nu2, Sigma1, Sigma2, BigSigma1,
    BigSigma2, Vertical``; ``beta`` is set for the σ/Σ kinds and ``a`` for
    vertical generators.
    """

    kind: str
    beta: int | None = None
    a: int | None = None

    @property
    def is_radial(self) -> bool:
        return self.kind == "Radial"

    @property
    def is_vertical(self) -> bool:
        return self.kind == "Vertical"

    @property
    def is_horizontal(self) -> bool:
        return not (self.is_radial or self.is_vertical)

    @property
    def name(self) -> str:
        base = {
            "Radial": "dr",
            "Lambda": "lam",
            "Nu1": "nu1",
            "Nu2": "nu2",
            "Sigma1": "sig1",
            "Sigma2": "sig2",
            "BigSigma1": "Sig1",
            "BigSigma2": "Sig2",
            "Vertical": "v",
        }[self.kind]
        if self.beta is not None:
            return f"{base}_{self.beta}"
        if self.a is not None:
            return f"{base}{self.a}"
        return base


@dataclass(frozen=True)
class StructureAlgebra:
    """Real structure constants ``[e_i, e_j] = c^k_ij e_k`` for i < j.

    ``c`` maps ordered pairs ``(i, j)`` with ``i < j`` to tuples of
    ``(k, coefficient)``; the opposite order is implied by antisymmetry.
    Generator 0 (radial) never appears.
    """

    n: int
    generators: tuple[GeneratorIndex, ...]
    c: dict[tuple[int, int], tuple[tuple[int, Fraction], ...]] = field(repr=False)
    _dgen: dict[int, tuple[tuple[tuple[int, int], Fraction], ...]] = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        """Number of generators including the radial one."""
        return len(self.generators)

    @property
    def horizontal(self) -> list[int]:
        return [i for i, g in enumerate(self.generators) if g.is_horizontal]

    @property
    def vertical(self) -> list[int]:
        return [i for i, g in enumerate(self.generators) if g.is_vertical]

    @property
    def names(self) -> dict[int, str]:
        return {i: g.name for i, g in enumerate(self.generators)}

    def index(self, name: str) -> int:
        for i, g in enumerate(self.generators):
            if g.name == name:
                return i
        raise KeyError(name)

    def const(self, k: int, i: int, j: int) -> Fraction:
        """c^k_ij with sign handling for any ordering of i, j."""
        if i == j:
            return Fraction(0)
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        for kk, v in self.c.get((i, j), ()):
            if kk == k:
                return sign * v
        return Fraction(0)

    def dgen(self, k: int):
        """``d e^k`` as ``((i, j), coeff)`` pairs with i < j: de^k = Σ coeff e^i∧e^j."""
        return self._dgen.get(k, ())

    def dense(self):
        """Structure constants as a dense float array ``C[k, i, j]`` (radial slot zero)."""
        import numpy as np

        D = self.dim
        arr = np.zeros((D, D, D))
        for (i, j), lst in self.c.items():
            for k, v in lst:
                arr[k, i, j] = float(v)
                arr[k, j, i] = -float(v)
        return arr

    def to_json(self) -> str:
        """Deterministic sorted listing of the nonzero structure constants."""
        rows = []
        for (i, j) in sorted(self.c):
            for k, v in sorted(self.c[(i, j)]):
                rows.append({"i": i, "j": j, "k": k, "c": str(v)})
        payload = {
            "schema": 1,
            "n": self.n,
            "generators": [g.name for g in self.generators],
            "brackets": rows,
        }
        return json.dumps(payload, indent=1, sort_keys=True)


def _generators(n: int) -> list[GeneratorIndex]:
    gens = [GeneratorIndex("Radial"), GeneratorIndex("Lambda"), GeneratorIndex("Nu1"), GeneratorIndex("Nu2")]
    for beta in range(1, n + 1):
        gens += [GeneratorIndex("Sigma1", beta), GeneratorIndex("Sigma2", beta)]
    for beta in range(1, n + 1):
        gens += [GeneratorIndex("BigSigma1", beta), GeneratorIndex("BigSigma2", beta)]
    for a in range(1, n * n + 1):
        gens.append(GeneratorIndex("Vertical", a=a))
    return gens


def _basis_and_dual(n: int):
    """Dual basis vectors of su(n+2) and coordinate functionals.

    Returns ``(vectors, coords)`` where ``vectors[k]`` is the matrix dual to
    generator ``k`` and ``coords(X)`` gives all coordinates of ``X``.
    """
    half = Fraction(1, 2)
    vectors: dict[int, dict] = {1: _mat({(0, 0): (0, -half), (1, 1): (0, half)})}
    # for a pair form  f1 = -Im X_ab,  f2 = Re X_ab
    pairs: list[tuple[int, int, int]] = [(2, 0, 1)]
    for beta in range(1, n + 1):
        pairs.append((4 + 2 * (beta - 1), 0, 1 + beta))
    for beta in range(1, n + 1):
        pairs.append((4 + 2 * n + 2 * (beta - 1), 1, 1 + beta))
    for k, a, b in pairs:
        vectors[k] = _mat({(a, b): (0, -1), (b, a): (0, -1)})
        vectors[k + 1] = _mat({(a, b): (1, 0), (b, a): (-1, 0)})

    vert = 4 * n + 4
    diag_slots = {}
    for beta in range(1, n + 1):
        s = 1 + beta
        vectors[vert] = _mat({(s, s): (0, 1), (0, 0): (0, -half), (1, 1): (0, -half)})
        diag_slots[vert] = s
        vert += 1
    off_slots = {}
    for beta, gamma in itertools.combinations(range(1, n + 1), 2):
        s, t = 1 + beta, 1 + gamma
        vectors[vert] = _mat({(s, t): (1, 0), (t, s): (-1, 0)})
        vectors[vert + 1] = _mat({(s, t): (0, 1), (t, s): (0, 1)})
        off_slots[vert] = (s, t)
        vert += 2

    def coords(x) -> dict[int, Fraction]:
        g = lambda a, b: x.get((a, b), _ZERO)  # noqa: E731
        out = {1: g(1, 1)[1] - g(0, 0)[1]}
        for k, a, b in pairs:
            out[k] = -g(a, b)[1]
            out[k + 1] = g(a, b)[0]
        for k, s in diag_slots.items():
            out[k] = g(s, s)[1]
        for k, (s, t) in off_slots.items():
            out[k] = g(s, t)[0]
            out[k + 1] = g(s, t)[1]
        return {k: v for k, v in out.items() if v != 0}

    return vectors, coords


def _combine(vectors, coeffs):
    out = {}
    for k, c in coeffs.items():
        for key, v in vectors[k].items():
            out[key] = _gadd(out.get(key, _ZERO), (c * v[0], c * v[1]))
    return {k: v for k, v in out.items() if v != _ZERO}


@lru_cache(maxsize=None)
def build_algebra(n: int) -> StructureAlgebra:
    """Exact real structure constants of su(n+2) in the adapted basis."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    gens = _generators(n)
    vectors, coords = _basis_and_dual(n)
    for k, v in vectors.items():
        if coords(v) != {k: 1}:
            raise AssertionError(f"basis/dual mismatch at generator {k}")
    c = {}
    for i, j in itertools.combinations(sorted(vectors), 2):
        br = _bracket(vectors[i], vectors[j])
        co = coords(br)
        if _combine(vectors, co) != br:
            raise AssertionError(f"bracket of {i},{j} left the algebra span")
        if co:
            c[(i, j)] = tuple(sorted(co.items()))
    dgen: dict[int, list] = {}
    for (i, j), lst in c.items():
        for k, v in lst:
            # de^k(X, Y) = -e^k([X, Y])  =>  de^k = -Σ_{i<j} c^k_ij e^i∧e^j
            dgen.setdefault(k, []).append(((i, j), -v))
    return StructureAlgebra(
        n=n,
        generators=tuple(gens),
        c=c,
        _dgen={k: tuple(sorted(v)) for k, v in dgen.items()},
    )


def exterior_derivative_table(alg: StructureAlgebra, scalar=ExactPoly) -> dict[int, FormExpr]:
    """``d e^k`` for every generator (``d(dr) = 0``)."""
    table = {}
    for k in range(alg.dim):
        table[k] = FormExpr(2, scalar, {ij: scalar.coerce(v) for ij, v in alg.dgen(k)})
    return table


# n = 1 dictionary between the coset coframe and the 3-Sasakian η-forms:
# generator -> (η index, factor) meaning  generator = factor * η
ETA_NAMES = {0: "dr", 1: "eta1", 2: "eta2", 3: "eta3", 4: "eta4", 5: "eta5", 6: "eta6", 7: "eta7", 8: "v1"}
_SQRT2 = "sqrt2"
_CGLP_TO_ETA = {
    0: (0, 1),
    1: (1, 2),  # λ = 2η₁
    2: (3, 1),  # ν₁ = η₃
    3: (2, 1),  # ν₂ = η₂
    4: (6, _SQRT2),  # σ₁ = √2 η₆
    5: (7, _SQRT2),  # σ₂ = √2 η₇
    6: (4, _SQRT2),  # Σ₁ = √2 η₄
    7: (5, _SQRT2),  # Σ₂ = √2 η₅
    8: (8, 1),
}


def _factor(power_of_sqrt2: int, rational: Fraction, scalar):
    # exact for ExactPoly (sympy sqrt(2) when the power is odd), float otherwise
    import sympy

    if power_of_sqrt2 % 2 == 0:
        val = rational * Fraction(2) ** (power_of_sqrt2 // 2)
        return val
    val = rational * Fraction(2) ** ((power_of_sqrt2 - 1) // 2)
    if scalar is ExactPoly:
        return sympy.Rational(val.numerator, val.denominator) * sympy.sqrt(2)
    return float(val) * 2**0.5


def translate_basis(form: FormExpr, direction: str, n: int) -> FormExpr:
    """Rewrite an n = 1 form between the coset coframe and the η coframe.

    ``cglp_to_eta`` substitutes λ = 2η₁, ν₁ = η₃, ν₂ = η₂, Σ_i = √2 η_{3+i},
    σ_i = √2 η_{5+i}; ``eta_to_cglp`` inverts it.  Index 0 stays ``dr`` and
    index 8 (the single vertical generator) is untouched.
    """
    if n != 1:
        raise ValueError("the η dictionary is only defined for n = 1")
    if direction == "cglp_to_eta":
        table = _CGLP_TO_ETA
        inverse = False
    elif direction == "eta_to_cglp":
        table = {eta: (g, f) for g, (eta, f) in _CGLP_TO_ETA.items()}
        inverse = True
    else:
        raise ValueError(f"unknown direction {direction!r}")
    scalar = form.scalar
    items = []
    for idx, coef in form.terms.items():
        rational, p = Fraction(1), 0
        new_idx = []
        for g in idx:
            target, f = table[g]
            new_idx.append(target)
            if f == _SQRT2:
                p += -1 if inverse else 1
            else:
                rational *= Fraction(1, f) if inverse else Fraction(f)
        if p < 0:
            # 1/√2^k = √2^k / 2^k
            rational /= Fraction(2) ** (-p)
            p = -p
        items.append((tuple(new_idx), coef * scalar.coerce(_factor(p, rational, scalar))))
    return FormExpr.from_unsorted(form.degree, scalar, items)

