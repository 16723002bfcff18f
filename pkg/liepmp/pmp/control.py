"""
Control selection by maximizing the Hamiltonian over the control box, and the
first-order condition ⟨D_uH, w - u⟩ ≤ 0 for all w in the box.
"""

from dataclasses import dataclass

import numpy as np

from liepmp.errors import NonConcaveHamiltonian
from liepmp.lie.group import CoAlgebraVector, GroupElement, Vector
from liepmp.log import liepmpLog
from liepmp.model import partials
from liepmp.model.problem import LieOCP
from liepmp.util.fd import jacobian

NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-13
CONCAVITY_TOL = 1e-10


@dataclass(frozen=True)
class ControlChoice:
    u: Vector
    singular: bool = False


def _u_gradient(p: LieOCP, t: int, xi: Vector, q: GroupElement, x: Vector, u: Vector, nu: float) -> Vector:
    _, _, Fu = partials.euclid_partials(p, t, q, x, u)
    _, _, cu = partials.stage_cost_partials(p, t, q, x, u)
    return nu * cu + Fu.T @ xi


def _u_value(p: LieOCP, t: int, xi: Vector, q: GroupElement, x: Vector, u: Vector, nu: float) -> float:
    f = np.atleast_1d(np.asarray(p.euclid(t, q, x, u), dtype=float))
    return nu * float(p.stage_cost(t, q, x, u)) + float(xi @ f)


def _projected_newton(
    p: LieOCP, t: int, xi: Vector, q: GroupElement, x: Vector, nu: float
) -> Vector:
    box = p.control_set
    u = box.clamp(np.zeros(p.n_u))
    for it in range(NEWTON_MAX_ITER):
        g = _u_gradient(p, t, xi, q, x, u, nu)
        Hu = jacobian(lambda uu: _u_gradient(p, t, xi, q, x, uu, nu), u)
        Hu = 0.5 * (Hu + Hu.T)
        if np.max(np.linalg.eigvalsh(Hu)) >= -CONCAVITY_TOL:
            raise NonConcaveHamiltonian(f"H is not strictly concave in u at t={t}")

        at_lo = (u <= box.lo) & (g < 0)
        at_hi = (u >= box.hi) & (g > 0)
        free = ~(at_lo | at_hi)
        if not np.any(free) or np.max(np.abs(g[free])) <= NEWTON_TOL:
            break

        d = np.zeros(p.n_u)
        d[free] = -np.linalg.solve(Hu[np.ix_(free, free)], g[free])
        h0 = _u_value(p, t, xi, q, x, u, nu)
        alpha = 1.0
        while alpha > 1e-10:
            u_try = box.clamp(u + alpha * d)
            if _u_value(p, t, xi, q, x, u_try, nu) >= h0:
                break
            alpha *= 0.5
        if np.max(np.abs(u_try - u)) <= NEWTON_TOL:
            u = u_try
            break
        u = u_try
        liepmpLog.debug(f"control newton t={t} it={it}: |g_free| = {np.max(np.abs(g[free])):.3e}")
    return u


def control_choice(
    p: LieOCP, t: int, xi: Vector, q: GroupElement, x: Vector, nu: float
) -> ControlChoice:
    """
    The maximizer of H over the control box, flagged singular when the abnormal
    (ν = 0) switching function vanishes.

    Raises:
        NonConcaveHamiltonian: if H is not strictly concave in u on the general path.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    box = p.control_set
    u0 = box.clamp(np.zeros(p.n_u))

    if nu == 0.0:
        _, _, Fu = partials.euclid_partials(p, t, q, x, u0)
        sigma = Fu.T @ xi
        u = np.where(sigma > 0, box.hi, np.where(sigma < 0, box.lo, u0))
        singular = bool(np.any(sigma == 0.0))
        if singular:
            liepmpLog.warning(f"Singular arc at t={t}: switching function vanishes")
        return ControlChoice(u=u, singular=singular)

    if p.quadratic_control is not None:
        _, _, Fu = partials.euclid_partials(p, t, q, x, u0)
        return ControlChoice(u=box.clamp((Fu.T @ xi) / p.quadratic_control.weight))

    return ControlChoice(u=_projected_newton(p, t, xi, q, x, nu))


def control_argmax(
    p: LieOCP, t: int, xi: Vector, q: GroupElement, x: Vector, nu: float
) -> Vector:
    """u* = argmax over the box of H(t, ζ, ξ, q, x, ·); ζ does not enter."""
    return control_choice(p, t, xi, q, x, nu).u


def stationarity_residual(
    p: LieOCP,
    t: int,
    zeta: CoAlgebraVector,
    xi: Vector,
    q: GroupElement,
    x: Vector,
    u: Vector,
    nu: float,
) -> float:
    """
    max over the box of ⟨D_uH, w - u⟩, attained componentwise at the box corners,
    floored at zero.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    D = _u_gradient(p, t, xi, q, x, u, nu)
    return stationarity_from_gradient(p, D, u)


def stationarity_from_gradient(p: LieOCP, D: Vector, u: Vector) -> float:
    box = p.control_set
    gain = np.maximum(D * (box.hi - u), D * (box.lo - u))
    return max(0.0, float(np.sum(gain)))


def maximization_gap(
    p: LieOCP,
    t: int,
    zeta: CoAlgebraVector,
    xi: Vector,
    q: GroupElement,
    x: Vector,
    u: Vector,
    nu: float,
    *,
    rng: np.random.Generator | None = None,
    samples: int = 1000,
) -> float:
    """
    max_w H(w) - H(u) over random samples of the box; non-positive when u
    maximizes H over the whole box and not only to first order.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    box = p.control_set
    h_u = _u_value(p, t, xi, q, x, u, nu)
    ws = rng.uniform(box.lo, box.hi, size=(samples, p.n_u))
    return max(_u_value(p, t, xi, q, x, w, nu) for w in ws) - h_u
