"""
Group steps defined implicitly by v_t(s, q, x) = 0.

Newton runs in algebra coordinates, s ← s·exp(hat(w)), so iterates stay on the
group without re-orthonormalization.
"""

from dataclasses import dataclass

import numpy as np

from liepmp.errors import NoConvergence, SingularJacobian
from liepmp.lie.group import AlgebraVector, GroupElement, Matrix, Vector, exp
from liepmp.log import liepmpLog
from liepmp.model.problem import ImplicitStepSpec
from liepmp.util.fd import group_jacobian, jacobian

RESIDUAL_TOL = 1e-12
MAX_ITER = 50
MAX_HALVINGS = 30
DET_TOL = 1e-12


@dataclass(frozen=True)
class ImplicitStepSolution:
    s: GroupElement
    newton_iters: int
    residual_norm: float


@dataclass(frozen=True)
class KappaPartials:
    """Derivatives of the solution map s = κ(q, x), as s⁻¹·δs = hat(Kq·η + Kx·δx)"""

    Kq: Matrix
    Kx: Matrix


def _residual(spec: ImplicitStepSpec, t: int, s: GroupElement, q: GroupElement, x: Vector):
    return np.atleast_1d(np.asarray(spec.residual(t, s, q, x), dtype=float))


def residual_partials(
    spec: ImplicitStepSpec, s: GroupElement, q: GroupElement, x: Vector, *, t: int = 0
) -> tuple[Matrix, Matrix, Matrix]:
    """(Ds v, Dq v, Dx v), from the step's `partials` hook or by central differences."""
    if spec.partials is not None:
        Ds, Dq, Dx = spec.partials(t, s, q, x)
        n_q = s.kind.n_q
        return (
            np.asarray(Ds, dtype=float).reshape(n_q, n_q),
            np.asarray(Dq, dtype=float).reshape(n_q, n_q),
            np.asarray(Dx, dtype=float).reshape(n_q, x.size),
        )
    Ds = group_jacobian(lambda ss: _residual(spec, t, ss, q, x), s)
    Dq = group_jacobian(lambda qq: _residual(spec, t, s, qq, x), q)
    Dx = jacobian(lambda xx: _residual(spec, t, s, q, xx), x)
    return Ds, Dq, Dx


def _checked_solve(Ds: Matrix, rhs: Matrix) -> Matrix:
    if abs(np.linalg.det(Ds)) < DET_TOL:
        raise SingularJacobian(f"|det Ds v| = {abs(np.linalg.det(Ds)):.3e} below {DET_TOL}")
    return np.linalg.solve(Ds, rhs)


def solve_step(
    spec: ImplicitStepSpec, q: GroupElement, x: Vector, *, t: int = 0
) -> ImplicitStepSolution:
    """
    Solve v_t(s, q, x) = 0 for s by damped Newton on the algebra correction.

    Raises:
        NoConvergence: no residual below 1e-12 within 50 iterations.
        SingularJacobian: |det Ds v| < 1e-12 at an iterate.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = spec.initial_guess(t, q, x)
    v = _residual(spec, t, s, q, x)
    norm = float(np.max(np.abs(v)))

    for it in range(MAX_ITER + 1):
        if norm <= RESIDUAL_TOL:
            return ImplicitStepSolution(s=s, newton_iters=it, residual_norm=norm)
        if it == MAX_ITER:
            break

        if spec.partials is not None:
            Ds = np.asarray(spec.partials(t, s, q, x)[0], dtype=float).reshape(v.size, v.size)
        else:
            Ds = group_jacobian(lambda ss: _residual(spec, t, ss, q, x), s)
        w = _checked_solve(Ds, -v)

        alpha = 1.0
        for _ in range(MAX_HALVINGS):
            s_try = s @ exp(AlgebraVector(s.kind, alpha * w))
            v_try = _residual(spec, t, s_try, q, x)
            if np.linalg.norm(v_try) <= (1.0 - 1e-4 * alpha) * np.linalg.norm(v):
                break
            alpha *= 0.5
        else:
            liepmpLog.error(f"Implicit step line search stalled at residual {norm:.3e}")
            raise NoConvergence(f"Implicit step line search stalled at residual {norm:.3e}")

        s, v = s_try, v_try
        norm = float(np.max(np.abs(v)))
        liepmpLog.debug(f"implicit step newton {it + 1}: |v| = {norm:.3e}, alpha = {alpha}")

    liepmpLog.error(f"Implicit step did not converge, |v| = {norm:.3e}")
    raise NoConvergence(f"Implicit step did not converge after {MAX_ITER} iterations")


def kappa_partials(
    spec: ImplicitStepSpec, s: GroupElement, q: GroupElement, x: Vector, *, t: int = 0
) -> KappaPartials:
    """
    D_qκ = -Ds v⁻¹ ∘ Dq v and D_xκ = -Ds v⁻¹ ∘ Dx v at a solution of v = 0.

    Raises:
        SingularJacobian: if Ds v is not invertible.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    Ds, Dq, Dx = residual_partials(spec, s, q, x, t=t)
    return KappaPartials(Kq=-_checked_solve(Ds, Dq), Kx=-_checked_solve(Ds, Dx))
