"""Kähler form, complex structure and a curvature-span estimate of the holonomy algebra."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .curvature import build_frame, riemann
from .exterior import ExactPoly, FormExpr, d, top_power
from .liealg import StructureAlgebra, build_algebra
from .metrics import MetricAnsatz, _as_number

__all__ = [
    "KahlerForm",
    "HolonomyEstimate",
    "build_omega",
    "check_closed",
    "nondegeneracy",
    "complex_structure",
    "holonomy_dimension",
    "ConventionError",
    "su_dim",
    "sp_dim",
]


class ConventionError(RuntimeError):
    """J² is not proportional to -Id: the form and metric do not match."""


def su_dim(n: int) -> int:
    return (2 * n + 2) ** 2 - 1


def sp_dim(n: int) -> int:
    return (n + 1) * (2 * n + 3)


@dataclass(frozen=True)
class KahlerForm:
    n: int
    alpha: object
    form: FormExpr

    @property
    def term_count(self) -> int:
        return len(self.form.terms)


def build_omega(n: int, alpha, sigma_coeff=None, Sigma_coeff=None) -> KahlerForm:
    """Ω = r dr∧λ + 2r² ν₁∧ν₂ - (r²+α²) Σ_β Σ_{1β}∧Σ_{2β} + (r²-α²) Σ_β σ_{1β}∧σ_{2β}.

    ``sigma_coeff``/``Sigma_coeff`` override the last two coefficients (as
    ExactPoly) for negative controls.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha = _as_number(alpha)
    r = ExactPoly.r()
    s = ExactPoly.const(alpha * alpha)
    sig = (r * r - s) if sigma_coeff is None else sigma_coeff
    Sig = -(r * r + s) if Sigma_coeff is None else Sigma_coeff
    terms = {(0, 1): r, (2, 3): 2 * r * r}
    for beta in range(1, n + 1):
        i = 4 + 2 * (beta - 1)
        terms[(i, i + 1)] = sig
        j = 4 + 2 * n + 2 * (beta - 1)
        terms[(j, j + 1)] = Sig
    return KahlerForm(n, alpha, FormExpr(2, ExactPoly, terms))


def check_closed(omega: KahlerForm, alg: StructureAlgebra | None = None) -> tuple[bool, FormExpr]:
    """Exact test of dΩ = 0; returns the residual 3-form as well."""
    alg = alg or build_algebra(omega.n)
    res = d(omega.form, alg)
    return res.is_zero(), res


def nondegeneracy(omega: KahlerForm, r) -> object:
    """Coefficient of e^0∧…∧e^{4n+3} in Ω^{2(n+1)} evaluated at r."""
    k = 2 * (omega.n + 1)
    top = top_power(omega.form, k)
    key = tuple(range(4 * omega.n + 4))
    coef = top.terms.get(key)
    return Fraction(0) if coef is None else coef(_as_number(r))


def frame_matrix(omega: KahlerForm, metric: MetricAnsatz, r) -> np.ndarray:
    """Ω_ab in the orthonormal frame (radial + horizontal indices)."""
    frame = build_frame(metric, r)
    H = frame.horizontal
    s = frame.scale.v
    pos = {int(g): a for a, g in enumerate(H)}
    M = np.zeros((len(H), len(H)))
    for (i, j), coef in omega.form.terms.items():
        val = float(coef(float(r))) / (s[i] * s[j])
        M[pos[i], pos[j]] = val
        M[pos[j], pos[i]] = -val
    return M


def complex_structure(omega: KahlerForm, metric: MetricAnsatz, r, tol: float = 1e-10):
    """J with Ω(X, Y) = scale⁻¹ g(JX, Y); the scale is fitted so that J² ≈ -Id.

    Returns ``(J, scale)``.  ``J[a, b]`` is J^a_b in the orthonormal frame.
    """
    M = frame_matrix(omega, metric, r).T
    A = M @ M
    t = -np.trace(A) / np.sum(A * A)
    if t <= 0:
        raise ConventionError("Ω squares to a positive operator")
    scale = float(np.sqrt(t))
    J = scale * M
    err = J @ J + np.eye(len(J))
    if np.max(np.abs(err)) > tol:
        bad = [(a, b) for a in range(0, len(J), 1) for b in range(len(J)) if abs(err[a, b]) > tol]
        raise ConventionError(f"J² ≠ -Id on entries {bad[:6]}")
    return J, scale


@dataclass
class HolonomyEstimate:
    n: int
    alpha: object
    dim: int
    target_su: int
    target_sp: int
    rank_tol: float
    gap: float
    rounds: int
    stable: bool
    singular_values: np.ndarray = field(repr=False)
    generators: np.ndarray = field(repr=False)
    j_commuting_fraction: float = 0.0
    max_j_commutator: float = 0.0
    max_ricci_form_trace: float = 0.0
    single_point_dims: list[int] = field(default_factory=list)

    @property
    def conclusive(self) -> bool:
        return self.stable and self.gap >= 1e3


def _tri(m: int):
    return np.triu_indices(m, 1)


def _vec(ops: np.ndarray, iu) -> np.ndarray:
    # antisymmetric matrices -> upper-triangle vectors (√2 keeps the Frobenius norm)
    return np.sqrt(2) * ops[:, iu[0], iu[1]]


def _unvec(vecs: np.ndarray, m: int, iu) -> np.ndarray:
    out = np.zeros((len(vecs), m, m))
    out[:, iu[0], iu[1]] = vecs / np.sqrt(2)
    return out - out.transpose(0, 2, 1)


def _span(vecs: np.ndarray, rank_tol: float):
    if len(vecs) == 0:
        return np.zeros((0, vecs.shape[1])), np.zeros(0), 0
    _, s, vt = np.linalg.svd(vecs, full_matrices=False)
    if s[0] == 0:
        return np.zeros((0, vecs.shape[1])), s, 0
    k = int(np.sum(s > rank_tol * s[0]))
    return vt[:k], s / s[0], k


def _closure(ops: np.ndarray, rank_tol: float, max_rounds: int = 10):
    m = ops.shape[1]
    iu = _tri(m)
    basis, sv, k = _span(_vec(ops, iu), rank_tol)
    rounds, stable = 0, False
    while rounds < max_rounds:
        rounds += 1
        mats = _unvec(basis, m, iu)
        comm = np.einsum("iab,jbc->ijac", mats, mats)
        comm = (comm - comm.transpose(1, 0, 2, 3)).reshape(-1, m, m)
        stacked = np.vstack([basis, _vec(comm, iu)])
        basis_new, sv, k_new = _span(stacked, rank_tol)
        if k_new == k:
            stable = True
            basis = basis_new
            break
        basis, k = basis_new, k_new
    return basis, sv, k, rounds, stable


def _gap(sv: np.ndarray, k: int) -> float:
    if k >= len(sv) or sv[k] == 0:
        return float("inf")
    return float(sv[k - 1] / sv[k])


def holonomy_dimension(
    metric: MetricAnsatz,
    points,
    rank_tol: float = 1e-8,
    alg: StructureAlgebra | None = None,
    omega: KahlerForm | None = None,
) -> HolonomyEstimate:
    """Dimension of the Lie algebra generated by curvature operators at ``points``.

    Frames at different radii are identified along the radial geodesic.  The
    single-point closures are reported alongside the pooled estimate.
    """
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    n = metric.n
    alg = alg or build_algebra(n)
    omega = omega or build_omega(n, metric.alpha)
    all_ops, singles = [], []
    max_comm, commuting, total, max_trace = 0.0, 0, 0, 0.0
    for r in points:
        data = riemann(build_frame(metric, r, alg))
        ops = np.array(data.curv_ops)
        J, _ = complex_structure(omega, metric, r)
        scale = 1 + data.max_riem
        for op in ops:
            c = float(np.max(np.abs(J @ op - op @ J))) / scale
            max_comm = max(max_comm, c)
            commuting += c <= 1e-9
            total += 1
            max_trace = max(max_trace, abs(float(np.trace(J @ op))) / scale)
        all_ops.append(ops)
        singles.append(_closure(ops, rank_tol)[2])
    basis, sv, k, rounds, stable = _closure(np.vstack(all_ops), rank_tol)
    return HolonomyEstimate(
        n=n,
        alpha=metric.alpha,
        dim=k,
        target_su=su_dim(n),
        target_sp=sp_dim(n),
        rank_tol=rank_tol,
        gap=_gap(sv, k),
        rounds=rounds,
        stable=stable,
        singular_values=sv,
        generators=_unvec(basis, 4 * n + 4, _tri(4 * n + 4)),
        j_commuting_fraction=commuting / total if total else 0.0,
        max_j_commutator=max_comm,
        max_ricci_form_trace=max_trace,
        single_point_dims=singles,
    )
