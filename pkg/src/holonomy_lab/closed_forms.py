"""Exact (sympy) forms of the reference metrics and the identities tying them together.

All coefficients are rational functions of ``r``; ``alpha`` may be a Fraction,
a sympy Rational, or a sympy Symbol.  Identities are decided by ``cancel`` on
the difference, which is exact for rational functions.
"""

from __future__ import annotations

from fractions import Fraction

import sympy

__all__ = [
    "R",
    "sym_alpha",
    "sym_u",
    "family_cglp",
    "family_eta",
    "eight_dim_metric",
    "hyperkahler",
    "page_pope",
    "cglp_to_eta",
    "residual_Q",
    "identities",
    "is_identity",
]

R = sympy.Symbol("r", positive=True)


def sym_alpha(alpha):
    if isinstance(alpha, sympy.Basic):
        return alpha
    if isinstance(alpha, Fraction):
        return sympy.Rational(alpha.numerator, alpha.denominator)
    if isinstance(alpha, str):
        return sympy.Rational(alpha)
    if isinstance(alpha, float):
        raise TypeError("exact identities need a rational alpha, not a float")
    return sympy.Rational(alpha)


def sym_u(n: int, alpha, C=None):
    al = sym_alpha(alpha)
    if C is None:
        C = -((1 - al**4) ** (n + 1))
    p = R**4 - al**4
    return (p ** (n + 1) + C) / (R**4 * p**n)


def family_cglp(n: int, alpha) -> dict:
    """Squared coefficients in the coset coframe (β-sums implied)."""
    al = sym_alpha(alpha)
    u = sym_u(n, al)
    return {
        "grr": 1 / u,
        "lam": u * R**2 / 4,
        "nu": R**2,
        "sigma": (R**2 - al**2) / 2,
        "Sigma": (R**2 + al**2) / 2,
    }


def family_eta(n: int, alpha) -> dict:
    """The family as written in the η coframe."""
    al = sym_alpha(alpha)
    p = R**4 - al**4
    D = p ** (n + 1) - (1 - al**4) ** (n + 1)
    return {
        "dr": R**4 * p**n / D,
        "eta1": D / (R**2 * p**n),
        "eta23": R**2,
        "eta45": R**2 + al**2,
        "eta67": R**2 - al**2,
    }


def eight_dim_metric(alpha) -> dict:
    """The eight-dimensional (n = 1) family in the η coframe."""
    al = sym_alpha(alpha)
    D = R**8 - 2 * al**4 * (R**4 - 1) - 1
    return {
        "dr": R**4 * (R**2 - al**2) * (R**2 + al**2) / D,
        "eta1": D / (R**2 * (R**2 - al**2) * (R**2 + al**2)),
        "eta23": R**2,
        "eta45": R**2 + al**2,
        "eta67": R**2 - al**2,
    }


def hyperkahler() -> dict:
    """The α = 1 metric on T*CP^(n+1), coset coframe."""
    return {
        "grr": 1 / (1 - R**-4),
        "lam": (1 - R**-4) * R**2 / 4,
        "nu": R**2,
        "sigma": (R**2 - 1) / 2,
        "Sigma": (R**2 + 1) / 2,
    }


def page_pope(m: int) -> dict:
    """Radial and fibre coefficients of the canonical-bundle metric, ρ = r."""
    f = 1 - (1 / R) ** (2 * m + 2)
    return {"dr": 1 / f, "eta1": f * R**2}


def cglp_to_eta(coeffs: dict) -> dict:
    """Squared coefficients under λ = 2η₁, ν_i ↔ η_{2,3}, σ = √2 η_{6,7}, Σ = √2 η_{4,5}."""
    return {
        "dr": coeffs["grr"],
        "eta1": 4 * coeffs["lam"],
        "eta23": coeffs["nu"],
        "eta45": 2 * coeffs["Sigma"],
        "eta67": 2 * coeffs["sigma"],
    }


def residual_Q(u, n: int, alpha):
    """Q̃ for a sympy expression u(r)."""
    al = sym_alpha(alpha)
    a = al**4
    return sympy.diff(u, R) * (R**5 - R * a) - 4 * u * a - 4 * (n + 1) * (R**4 - a - R**4 * u)


def is_identity(lhs, rhs) -> bool:
    return sympy.cancel(sympy.together(lhs - rhs)) == 0


def _same(d1: dict, d2: dict, keys=None) -> bool:
    keys = keys or d1.keys()
    return all(is_identity(d1[k], d2[k]) for k in keys)


def identities(n: int, alpha) -> dict[str, bool | None]:
    """Every exact identity applicable at (n, α); None marks "not applicable"."""
    al = sym_alpha(alpha)
    eta = family_eta(n, al)
    cglp = family_cglp(n, al)
    out: dict[str, bool | None] = {
        "grr_times_eta1_is_r2": is_identity(eta["dr"] * eta["eta1"], R**2),
        "cglp_matches_eta_form": _same(cglp_to_eta(cglp), eta),
        "Q_tilde_vanishes": is_identity(residual_Q(sym_u(n, al), n, al), 0),
        "u_at_1_is_0": None,
        "n1_matches_eight_dim": None,
        "alpha1_matches_hyperkahler": None,
        "alpha0_matches_page_pope": None,
    }
    if al != 1:
        out["u_at_1_is_0"] = sympy.simplify(sym_u(n, al).subs(R, 1)) == 0
    if n == 1:
        out["n1_matches_eight_dim"] = _same(eta, eight_dim_metric(al))
    if al == 1:
        out["alpha1_matches_hyperkahler"] = _same(cglp, hyperkahler())
    if al == 0:
        out["alpha0_matches_page_pope"] = _same(eta, page_pope(2 * n + 1), keys=("dr", "eta1"))
    return out
