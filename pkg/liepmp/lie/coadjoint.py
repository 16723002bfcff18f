"""
Dual-space kernels: coadjoint action, cotangent left trivialization, and the dual
of the (left-trivialized) derivative of the exponential map.
"""

import math

import numpy as np

from liepmp.lie.group import (
    AlgebraVector,
    CoAlgebraVector,
    GroupElement,
    GroupKind,
    Matrix,
    Vector,
    ad_matrix,
    adjoint_matrix,
    hat,
)

SERIES_TOL = 1e-15
SERIES_MAX_TERMS = 80


def ad_star(g: GroupElement, rho: CoAlgebraVector) -> CoAlgebraVector:
    """Coadjoint action: ⟨ad_star(g, ρ), w⟩ = ⟨ρ, vee(g·hat(w)·g⁻¹)⟩."""
    return CoAlgebraVector(g.kind, adjoint_matrix(g).T @ rho.c)


def trivialize_cotangent(q: GroupElement, dF: Matrix) -> CoAlgebraVector:
    """
    Pull an ambient gradient `dF` at `q` back to the dual of the algebra, so that
    ⟨result, w⟩ = trace(dFᵀ·q·hat(w)) = d/ds F(q·exp(s·hat(w))) at s = 0.
    """
    kind = q.kind
    dF = np.asarray(dF, dtype=float)
    c = np.empty(kind.n_q)
    for i, e in enumerate(np.eye(kind.n_q)):
        c[i] = np.sum(dF * (q.m @ hat(kind, e)))
    return CoAlgebraVector(kind, c)


def dexp_left_matrix(kind: GroupKind, a: Vector) -> Matrix:
    """
    Matrix of the left-trivialized derivative of exp at `a`, Σ (-ad_a)^k / (k+1)!,
    so that exp(a)⁻¹ · d/dε exp(a + εδ) = hat(dexp_left_matrix(a) @ δ).
    """
    n_q = kind.n_q
    ad = -ad_matrix(kind, np.asarray(a, dtype=float))
    term = np.eye(n_q)
    total = term.copy()
    for k in range(1, SERIES_MAX_TERMS):
        term = term @ ad / (k + 1)
        total += term
        if np.max(np.abs(term)) < SERIES_TOL:
            break
    return total


def dexp_dual(a: AlgebraVector, zeta: CoAlgebraVector) -> CoAlgebraVector:
    """
    Pullback of `zeta` through the derivative of exp at `a`: the series
    Σ (-ad_a*)^k / (k+1)! applied to ζ, truncated once a term drops below 1e-15.
    """
    ad_star_a = ad_matrix(a.kind, a.v).T
    term = zeta.c.copy()
    total = term.copy()
    for k in range(1, SERIES_MAX_TERMS):
        term = -(ad_star_a @ term) / (k + 1)
        total += term
        if np.max(np.abs(term)) < SERIES_TOL:
            break
    return CoAlgebraVector(a.kind, total)


def dexp_dual_inverse(a: AlgebraVector, zeta: CoAlgebraVector) -> CoAlgebraVector:
    """Inverse of `dexp_dual` at `a`."""
    T = dexp_left_matrix(a.kind, a.v)
    return CoAlgebraVector(a.kind, np.linalg.solve(T.T, zeta.c))


def dexp_left_closed_form(a: Vector) -> Matrix:
    """SO(3) closed form of `dexp_left_matrix`, kept for cross-checks."""
    a = np.asarray(a, dtype=float)
    th = float(np.linalg.norm(a))
    K = hat(GroupKind.SO3, a)
    if th < 1e-6:
        return np.eye(3) - 0.5 * K + (K @ K) / 6.0
    A = (1.0 - math.cos(th)) / th**2
    B = (th - math.sin(th)) / th**3
    return np.eye(3) - A * K + B * (K @ K)
