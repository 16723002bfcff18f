"""Central finite differences, in Euclidean and in left-trivialized group directions."""

import typing as t

import numpy as np
from numpy.typing import NDArray

from liepmp.lie.group import AlgebraVector, GroupElement, exp

type Array = NDArray[np.float64]


def fd_step(x: float) -> float:
    """Perturbation size for a coordinate of magnitude |x|."""
    return max(1e-6, 1e-8 * abs(x))


def jacobian(fun: t.Callable[[Array], Array | float], x: Array) -> Array:
    """
    Central-difference Jacobian of `fun` at `x`, one column per coordinate.
    Scalar-valued functions give a gradient row of shape (1, n).
    """
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(np.asarray(fun(x), dtype=float))
    J = np.zeros((f0.size, x.size))
    for i in range(x.size):
        h = fd_step(x[i])
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fp = np.atleast_1d(np.asarray(fun(xp), dtype=float))
        fm = np.atleast_1d(np.asarray(fun(xm), dtype=float))
        J[:, i] = (fp - fm) / (2 * h)
    return J


def group_jacobian(fun: t.Callable[[GroupElement], Array | float], q: GroupElement) -> Array:
    """
    Central differences of `fun` along q·exp(s·hat(e_j)), one column per algebra
    direction (the left-trivialized derivative).
    """
    n_q = q.kind.n_q
    f0 = np.atleast_1d(np.asarray(fun(q), dtype=float))
    J = np.zeros((f0.size, n_q))
    h = 1e-6
    for j, e in enumerate(np.eye(n_q)):
        fp = np.atleast_1d(np.asarray(fun(q @ exp(AlgebraVector(q.kind, h * e))), dtype=float))
        fm = np.atleast_1d(np.asarray(fun(q @ exp(AlgebraVector(q.kind, -h * e))), dtype=float))
        J[:, j] = (fp - fm) / (2 * h)
    return J


def relative_error(analytic: Array, reference: Array, *, floor: float = 1e-3) -> float:
    """‖a - b‖∞ / max(‖b‖∞, floor)"""
    a = np.atleast_1d(np.asarray(analytic, dtype=float))
    b = np.atleast_1d(np.asarray(reference, dtype=float))
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), floor))
