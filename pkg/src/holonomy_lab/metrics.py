"""Closed-form metrics of the family and the radial ODE that produces them.

Conventions.  The cohomogeneity-one ansatz is written in the coset coframe::

    g = grr dr² + f_λ² λ² + c² (ν₁² + ν₂²) + a² Σ_β(σ_{1β}² + σ_{2β}²) + b² Σ_β(Σ_{1β}² + Σ_{2β}²)

and the family uses ``grr = 1/u``, ``f_λ² = u r²/4``, ``c² = r²``,
``a² = (r² - α²)/2``, ``b² = (r² + α²)/2`` with ``u = W²`` given by::

    u(r) = ((r⁴ - α⁴)^(n+1) + C) / (r⁴ (r⁴ - α⁴)^n),    C = -(1 - α⁴)^(n+1).

Every numeric routine accepts ``r`` and ``α`` as floats or Fractions; with
Fractions the results are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy
from scipy.integrate import solve_ivp

from .exterior import Jet

__all__ = [
    "RadialProfile",
    "MetricAnsatz",
    "family_G",
    "profile_W",
    "canonical_C",
    "ode_residual",
    "printed_Q",
    "ode_rhs",
    "integrate_ode",
    "OdeResult",
    "OdeIntegrationError",
    "refit_C",
    "boundary_slope",
    "BoundarySlope",
    "load_profile",
    "dump_profile",
    "ProfileFormatError",
    "COEFFICIENT_CLASSES",
]

COEFFICIENT_CLASSES = ("grr", "lam", "nu", "sigma", "Sigma")


class OdeIntegrationError(RuntimeError):
    pass


class ProfileFormatError(ValueError):
    pass


def _as_number(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return x


def canonical_C(n: int, alpha):
    """Integration constant placing the collapse at r = 1."""
    alpha = _as_number(alpha)
    return -((1 - alpha**4) ** (n + 1))


def _closed_form(n, alpha, C):
    a = alpha**4

    def u(r):
        p = r**4 - a
        return (p ** (n + 1) + C) / (r**4 * p**n)

    return u


def _hyperkahler_u(r):
    return 1 - 1 / r**4


@dataclass(frozen=True)
class RadialProfile:
    """``u(r) = W(r)²`` together with the parameters it belongs to.

    ``fn`` maps a :class:`Jet` (or a plain number) in ``r`` to ``u``; the jet
    gives ``u, u', u''``.  ``C`` is None for profiles that are not members of
    the closed-form one-parameter family.
    """

    n: int
    alpha: object
    C: object | None
    fn: Callable = field(repr=False, compare=False)
    label: str = "closed-form"

    def jet(self, r) -> Jet:
        if isinstance(r, Jet):
            return self.fn(r)
        r = _as_number(r)
        if self.fn is not _hyperkahler_u and self.label == "closed-form" and r**4 == self.alpha**4:
            raise ZeroDivisionError("profile is singular at r⁴ = α⁴")
        return self.fn(Jet.variable(r))

    def __call__(self, r):
        return self.jet(r).v


def profile_W(n: int, alpha, C=None) -> RadialProfile:
    """Closed-form profile; ``C=None`` selects the canonical constant."""
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha = _as_number(alpha)
    if C is None:
        C = canonical_C(n, alpha)
    C = _as_number(C)
    if alpha**4 == 1 and C == 0:
        # (r⁴-1)^(n+1) / (r⁴ (r⁴-1)^n) reduces to 1 - r⁻⁴; keeps r = 1 evaluable
        return RadialProfile(n, alpha, C, _hyperkahler_u, "closed-form")
    return RadialProfile(n, alpha, C, _closed_form(n, alpha, C), "closed-form")


def custom_profile(n: int, alpha, fn: Callable, label: str = "custom") -> RadialProfile:
    """Wrap an arbitrary jet-aware function of r as a profile (negative controls)."""
    return RadialProfile(n, _as_number(alpha), None, fn, label)


@dataclass(frozen=True)
class MetricAnsatz:
    """Diagonal cohomogeneity-one metric built from a radial profile."""

    profile: RadialProfile
    r_min: object = 1

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def alpha(self):
        return self.profile.alpha

    @property
    def dimension(self) -> int:
        return 4 * (self.n + 1)

    def coefficients(self, r) -> dict[str, Jet]:
        """Squared coefficients as jets ``(value, d/dr, d²/dr²)``."""
        rj = r if isinstance(r, Jet) else Jet.variable(_as_number(r))
        u = self.profile.jet(rj)
        s = self.alpha**2
        r2 = rj * rj
        return {
            "grr": 1 / u,
            "lam": u * r2 / 4,
            "nu": r2,
            "sigma": (r2 - s) / 2,
            "Sigma": (r2 + s) / 2,
        }

    def eta_coefficients(self, r) -> dict[str, object]:
        """Values of the coefficients in the η coframe (n = 1 dictionary, β-summed)."""
        c = {k: v.v for k, v in self.coefficients(r).items()}
        return {
            "dr": c["grr"],
            "eta1": 4 * c["lam"],
            "eta23": c["nu"],
            "eta45": 2 * c["Sigma"],
            "eta67": 2 * c["sigma"],
        }

    def is_positive(self, r) -> bool:
        return all(v.v > 0 for v in self.coefficients(r).values())


def family_G(n: int, alpha) -> MetricAnsatz:
    """The Ricci-flat family on 4(n+1) dimensions, 0 ≤ α ≤ 1, r ≥ 1."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("n must be an integer >= 1")
    alpha = _as_number(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return MetricAnsatz(profile_W(n, alpha))


def ode_residual(profile: RadialProfile, r):
    """Q̃ = u'(r⁵ - rα⁴) - 4uα⁴ - 4(n+1)(r⁴ - α⁴ - r⁴u); zero on solutions."""
    r = _as_number(r)
    j = profile.jet(r)
    a = profile.alpha**4
    n = profile.n
    return j.d1 * (r**5 - r * a) - 4 * j.v * a - 4 * (n + 1) * (r**4 - a - r**4 * j.v)


def printed_Q(profile: RadialProfile, r):
    """The residual as printed, read literally with W = √u and dW/dr.

    Kept for comparison only: it does not vanish on the closed-form family.
    """
    r = _as_number(r)
    j = profile.jet(r)
    a = profile.alpha**4
    n = profile.n
    w = j.sqrt()
    return w.d1 * (r**5 - r * a) + 4 * j.v * a + 4 * (n + 1) * (r**4 - a - r**4 * j.v)


def ode_rhs(n: int, alpha: float):
    """u' as a function of (r, u) from Q̃ = 0."""
    a = float(alpha) ** 4

    def rhs(r, u):
        return (4 * u * a + 4 * (n + 1) * (r**4 - a - r**4 * u)) / (r**5 - r * a)

    return rhs


def refit_C(n: int, alpha, r0, u0):
    """Integration constant of the closed-form member passing through (r0, u0)."""
    alpha, r0, u0 = _as_number(alpha), _as_number(r0), _as_number(u0)
    p = r0**4 - alpha**4
    return u0 * r0**4 * p**n - p ** (n + 1)


@dataclass
class OdeResult:
    n: int
    alpha: float
    r: np.ndarray
    u: np.ndarray
    nfev: int

    @property
    def u_end(self) -> float:
        return float(self.u[-1])


def integrate_ode(n: int, alpha, r0, u0, r1, tol: float = 1e-10, samples: int = 50) -> OdeResult:
    """Integrate Q̃ = 0 from (r0, u0) to r1 with an adaptive 8(5,3) Runge–Kutta pair."""
    r0, r1, alpha = float(r0), float(r1), float(alpha)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not r1 > r0:
        raise ValueError("need r1 > r0")
    if r0 <= 1 and not (alpha < 1 and r0 > alpha):
        raise ValueError("r0 must exceed 1")
    rhs = ode_rhs(n, alpha)
    grid = np.linspace(r0, r1, samples)
    sol = solve_ivp(
        lambda r, y: [rhs(r, y[0])],
        (r0, r1),
        [float(u0)],
        method="DOP853",
        t_eval=grid,
        rtol=tol,
        atol=tol * 1e-2,
    )
    if sol.status != 0:
        raise OdeIntegrationError(
            f"integration stopped at r={sol.t[-1] if sol.t.size else r0!r}: {sol.message}"
        )
    return OdeResult(n, alpha, sol.t, sol.y[0], sol.nfev)


@dataclass(frozen=True)
class BoundarySlope:
    n: int
    alpha: object
    slope: float
    method: str
    flag: str | None = None


def _slope_at(profile: RadialProfile, r):
    # d/dt sqrt(g_η₁η₁) with g_η₁η₁ = u r² and dt = dr/√u reduces to u + r u'/2
    j = profile.jet(r)
    return j.v + r * j.d1 / 2


def boundary_slope(n: int, alpha, method: str = "series") -> BoundarySlope:
    """Rate at which the η₁-circle opens up at r = 1, measured in proper distance.

    ``series`` evaluates the leading Taylor coefficient at r = 1 (exact for
    rational α); ``richardson`` extrapolates samples at r = 1 + h, h → 0.
    """
    alpha = _as_number(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    profile = profile_W(n, alpha)
    flag = "hyperkahler bolt" if alpha == 1 else None
    if method == "series":
        value = _slope_at(profile, Fraction(1) if isinstance(alpha, Fraction) else 1.0)
    elif method == "richardson":
        value = _richardson(lambda h: float(_slope_at(profile, 1.0 + h)), h0=1e-2, levels=6)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BoundarySlope(n, alpha, float(value), method, flag)


def _richardson(f, h0: float, levels: int) -> float:
    table = [[f(h0 / 2**k)] for k in range(levels)]
    for j in range(1, levels):
        for k in range(j, levels):
            prev, cur = table[k - 1][j - 1], table[k][j - 1]
            table[k].append(cur + (cur - prev) / (2**j - 1))
    return table[-1][-1]


# --- profile JSON -------------------------------------------------------------


def dump_profile(profile: RadialProfile, rs) -> str:
    """``{n, alpha, C, samples: [{r, u, du, d2u}]}`` for the given radii."""
    samples = []
    for r in rs:
        j = profile.jet(float(r))
        samples.append({"r": float(r), "u": float(j.v), "du": float(j.d1), "d2u": float(j.d2)})
    payload = {
        "schema": 1,
        "n": profile.n,
        "alpha": str(profile.alpha) if isinstance(profile.alpha, Fraction) else profile.alpha,
        "C": None if profile.C is None else float(profile.C),
        "samples": samples,
    }
    return json.dumps(payload, indent=1, sort_keys=True)


def load_profile(text: str) -> tuple[RadialProfile, list[float]]:
    """Parse a profile document; returns the profile and its sample radii.

    The profile's jets come from ``expr`` (a formula in ``r``) when present,
    otherwise from each sample's ``u``/``du``/``d2u`` (only at those radii).
    """
    try:
        doc = json.loads(text)
        n = int(doc["n"])
        alpha = _as_number(doc["alpha"])
        samples = doc.get("samples", [])
        rs = [float(s["r"]) for s in samples]
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfileFormatError(f"malformed profile document: {exc}") from exc
    if n < 1:
        raise ProfileFormatError("n must be >= 1")
    C = doc.get("C")
    if "expr" in doc:
        fn = _expr_profile(doc["expr"])
        label = f"expr:{doc['expr']}"
    else:
        table = {}
        for s in samples:
            if "du" not in s or "d2u" not in s:
                raise ProfileFormatError("samples need du and d2u unless an expr is given")
            table[float(s["r"])] = (float(s["u"]), float(s["du"]), float(s["d2u"]))
        fn = _table_profile(table)
        label = "samples"
    if not rs:
        raise ProfileFormatError("profile has no samples")
    return RadialProfile(n, alpha, None if C is None else _as_number(C), fn, label), rs


def _expr_profile(expr: str):
    r = sympy.Symbol("r", positive=True)
    try:
        e = sympy.sympify(expr, locals={"r": r})
    except (sympy.SympifyError, SyntaxError) as exc:
        raise ProfileFormatError(f"cannot parse expr {expr!r}") from exc
    if e.free_symbols - {r}:
        raise ProfileFormatError("expr may only depend on r")
    derivs = [sympy.lambdify(r, e.diff(r, k), "math") for k in range(3)]

    def fn(rj):
        x = rj.v if isinstance(rj, Jet) else rj
        vals = [f(float(x)) for f in derivs]
        if not isinstance(rj, Jet):
            return vals[0]
        # compose with the incoming jet (chain rule through second order)
        return Jet(vals[0], vals[1] * rj.d1, vals[2] * rj.d1**2 + vals[1] * rj.d2)

    return fn


def _table_profile(table):
    def fn(rj):
        x = float(rj.v if isinstance(rj, Jet) else rj)
        for key, (u, du, d2u) in table.items():
            if math.isclose(key, x, rel_tol=0, abs_tol=1e-15):
                break
        else:
            raise ProfileFormatError(f"sampled profile has no entry at r={x}")
        if not isinstance(rj, Jet):
            return u
        return Jet(u, du * rj.d1, d2u * rj.d1**2 + du * rj.d2)

    return fn
