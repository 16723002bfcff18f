import numpy as np
import scipy.linalg

from liepmp.errors import BoundaryMismatch, SubmersionRankError
from liepmp.lie.group import GroupElement, Vector
from liepmp.model import partials
from liepmp.model.problem import FixedInitFreeFinal, FixedInitSubmanifold, LieOCP
from liepmp.pmp.costate import Costate

RANK_TOL = 1e-10


def terminal_covector(
    p: LieOCP, costate: Costate, mu: Vector, q: GroupElement, x: Vector, nu: float
) -> Vector:
    """(ρ^{N-1}, ξ^{N-1}) - ν·D c_N - D g_Nᵀ μᴺ, group part left-trivialized."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float)).reshape(p.constraint_count(p.N))
    cq, cx = partials.final_cost_partials(p, q, x)
    Gq, Gx = partials.constraint_partials(p, p.N, q, x)
    return np.concatenate(
        [
            costate.rho.c - nu * cq - Gq.T @ mu,
            costate.xi - nu * cx - Gx.T @ mu,
        ]
    )


def transversality_free(
    p: LieOCP, costate: Costate, mu: Vector, q: GroupElement, x: Vector, nu: float
) -> Vector:
    """
    Residual of the free-endpoint transversality conditions, zero at an extremal.

    Raises:
        BoundaryMismatch: if the problem's final state is not free.
    """
    if not isinstance(p.boundary, FixedInitFreeFinal):
        raise BoundaryMismatch(
            f"Free-endpoint transversality needs a free final state, got {type(p.boundary).__name__}"
        )
    return terminal_covector(p, costate, mu, q, x, nu)


def tangent_basis(D: np.ndarray, n: int) -> np.ndarray:
    """
    Orthonormal basis (columns) of ker D from a full QR of Dᵀ.

    Raises:
        SubmersionRankError: if D does not have full row rank.
    """
    m = D.shape[0]
    if m == 0:
        return np.eye(n)
    if m > n:
        raise SubmersionRankError(f"Submersion has {m} components on a {n}-dimensional space")
    Q, R = scipy.linalg.qr(D.T, mode="full")
    diag = np.abs(np.diag(R))
    if np.min(diag) <= RANK_TOL * max(1.0, float(np.max(diag))):
        raise SubmersionRankError(f"D b_fin is rank deficient (smallest pivot {np.min(diag):.3e})")
    return Q[:, m:]


def transversality_submanifold(
    p: LieOCP, costate: Costate, mu: Vector, q: GroupElement, x: Vector, nu: float
) -> Vector:
    """
    [b_fin(q_N, x_N); projection of the terminal covector onto the tangent space of
    the final submanifold], of dimension n_q + n_x.

    Raises:
        BoundaryMismatch: if the final state is not constrained to a submanifold.
        SubmersionRankError: if D b_fin is rank deficient at (q_N, x_N).
    """
    b = p.boundary
    if not isinstance(b, FixedInitSubmanifold):
        raise BoundaryMismatch(
            f"Submanifold transversality needs a submanifold endpoint, got {type(b).__name__}"
        )
    x = np.atleast_1d(np.asarray(x, dtype=float))
    value = np.atleast_1d(np.asarray(b.b_fin(q, x), dtype=float))
    Bq, Bx = partials.submersion_partials(b, q, x)
    basis = tangent_basis(np.hstack([Bq, Bx]), p.n_q + p.n_x)
    return np.concatenate([value, basis.T @ terminal_covector(p, costate, mu, q, x, nu)])
