"""
Matrix Lie groups SO(2) and SO(3), their Lie algebras in hat coordinates, and the
closed-form exponential and logarithm.

Group elements are stored as orthonormal matrices; algebra elements as coordinate
vectors under the hat isomorphism, so that `hat(v)` is the skew-symmetric matrix.
"""

import enum
import math
import typing as t
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from liepmp.errors import InvalidAlgebraMatrix, InvalidGroupElement, LogBranchCut
from liepmp.log import liepmpLog

type Vector = NDArray[np.float64]
type Matrix = NDArray[np.float64]

ORTHONORMAL_TOL = 1e-10
SKEW_TOL = 1e-10
SMALL_ANGLE = 1e-6
BRANCH_MARGIN = 1e-6


class GroupKind(enum.StrEnum):
    """The matrix groups supported: planar and spatial rotations"""

    SO2 = "SO2"
    SO3 = "SO3"

    @property
    def n(self) -> int:
        """Matrix dimension"""
        return 2 if self is GroupKind.SO2 else 3

    @property
    def n_q(self) -> int:
        """Algebra dimension, n(n-1)/2"""
        return 1 if self is GroupKind.SO2 else 3


def hat(kind: GroupKind, v: t.Sequence[float] | Vector) -> Matrix:
    """Skew-symmetric matrix of the algebra coordinates `v`."""
    v = np.asarray(v, dtype=float).reshape(kind.n_q)
    if kind is GroupKind.SO2:
        return np.array([[0.0, -v[0]], [v[0], 0.0]])
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def vee(kind: GroupKind, A: Matrix) -> Vector:
    """
    Algebra coordinates of a skew-symmetric matrix.

    Raises:
        InvalidAlgebraMatrix: if `A` is not skew-symmetric within 1e-10.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (kind.n, kind.n):
        raise InvalidAlgebraMatrix(f"Expected a {kind.n}x{kind.n} matrix, got {A.shape}")
    if np.max(np.abs(A + A.T)) > SKEW_TOL:
        raise InvalidAlgebraMatrix("Matrix is not skew-symmetric")
    if kind is GroupKind.SO2:
        return np.array([A[1, 0]])
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def _vee_unchecked(kind: GroupKind, A: Matrix) -> Vector:
    # vee of the skew part, for matrices that are only approximately skew
    S = 0.5 * (A - A.T)
    if kind is GroupKind.SO2:
        return np.array([S[1, 0]])
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


@dataclass(frozen=True)
class AlgebraVector:
    """An element of the Lie algebra, in hat coordinates"""

    kind: GroupKind
    v: Vector

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float).reshape(self.kind.n_q)
        object.__setattr__(self, "v", v)

    def matrix(self) -> Matrix:
        return hat(self.kind, self.v)

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        return AlgebraVector(self.kind, self.v + other.v)

    def __neg__(self) -> "AlgebraVector":
        return AlgebraVector(self.kind, -self.v)

    def __mul__(self, scalar: float) -> "AlgebraVector":
        return AlgebraVector(self.kind, scalar * self.v)

    __rmul__ = __mul__

    @classmethod
    def zero(cls, kind: GroupKind) -> "AlgebraVector":
        return cls(kind, np.zeros(kind.n_q))


@dataclass(frozen=True)
class CoAlgebraVector:
    """A linear functional on the Lie algebra, paired as cᵀv in hat coordinates"""

    kind: GroupKind
    c: Vector

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(self.kind.n_q)
        object.__setattr__(self, "c", c)

    def pair(self, a: AlgebraVector) -> float:
        return float(self.c @ a.v)

    def __add__(self, other: "CoAlgebraVector") -> "CoAlgebraVector":
        return CoAlgebraVector(self.kind, self.c + other.c)

    def __mul__(self, scalar: float) -> "CoAlgebraVector":
        return CoAlgebraVector(self.kind, scalar * self.c)

    __rmul__ = __mul__

    @classmethod
    def zero(cls, kind: GroupKind) -> "CoAlgebraVector":
        return cls(kind, np.zeros(kind.n_q))


@dataclass(frozen=True)
class GroupElement:
    """
    A rotation matrix. Construction checks orthonormality; a matrix that drifted
    beyond 1e-10 (but is still close to a rotation) is re-orthonormalized by polar
    projection.
    """

    kind: GroupKind
    m: Matrix

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (self.kind.n, self.kind.n):
            raise InvalidGroupElement(
                f"Expected a {self.kind.n}x{self.kind.n} matrix, got {m.shape}"
            )

        drift = np.linalg.norm(m.T @ m - np.eye(self.kind.n))
        det = np.linalg.det(m)
        if drift > ORTHONORMAL_TOL or abs(det - 1.0) > ORTHONORMAL_TOL:
            if det <= 0.0 or drift > 0.1:
                raise InvalidGroupElement(
                    f"Matrix is not a rotation (drift {drift:.3e}, det {det:.3e})"
                )
            liepmpLog.warning(f"Re-orthonormalizing group element (drift {drift:.3e})")
            m, _ = scipy.linalg.polar(m)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls, kind: GroupKind) -> "GroupElement":
        return cls(kind, np.eye(kind.n))

    @classmethod
    def rotation(cls, theta: float) -> "GroupElement":
        """Planar rotation by `theta` radians."""
        return exp(AlgebraVector(GroupKind.SO2, [theta]))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.kind, self.m @ other.m)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.kind, self.m.T)

    def angle(self) -> float:
        """Rotation angle in (-π, π], taken as atan2 of the first column."""
        return math.atan2(self.m[1, 0], self.m[0, 0])


def exp(a: AlgebraVector) -> GroupElement:
    """Exponential map: planar rotation for SO(2), Rodrigues' formula for SO(3)."""
    if a.kind is GroupKind.SO2:
        th = float(a.v[0])
        c, s = math.cos(th), math.sin(th)
        return GroupElement(a.kind, np.array([[c, -s], [s, c]]))

    th = float(np.linalg.norm(a.v))
    K = hat(a.kind, a.v)
    if th < SMALL_ANGLE:
        A = 1.0 - th**2 / 6.0
        B = 0.5 - th**2 / 24.0
    else:
        A = math.sin(th) / th
        B = (1.0 - math.cos(th)) / th**2
    return GroupElement(a.kind, np.eye(3) + A * K + B * (K @ K))


def log(g: GroupElement) -> AlgebraVector:
    """
    Principal logarithm.

    Raises:
        LogBranchCut: if the rotation angle is π - 1e-6 or larger.
    """
    if g.kind is GroupKind.SO2:
        th = math.atan2(g.m[1, 0], g.m[0, 0])
        if abs(th) >= math.pi - BRANCH_MARGIN:
            raise LogBranchCut(f"Rotation angle {th:.9f} at the branch cut")
        return AlgebraVector(g.kind, [th])

    w = _vee_unchecked(g.kind, g.m)  # sin(θ)·axis
    s = float(np.linalg.norm(w))
    c = 0.5 * (np.trace(g.m) - 1.0)
    th = math.atan2(s, c)
    if th >= math.pi - BRANCH_MARGIN:
        raise LogBranchCut(f"Rotation angle {th:.9f} at the branch cut")
    if th < SMALL_ANGLE:
        return AlgebraVector(g.kind, w * (1.0 + th**2 / 6.0))
    return AlgebraVector(g.kind, w * (th / s))


def adjoint_matrix(g: GroupElement) -> Matrix:
    """Matrix of w ↦ vee(g·hat(w)·g⁻¹) in hat coordinates."""
    if g.kind is GroupKind.SO2:
        return np.eye(1)
    return g.m.copy()


def ad_matrix(kind: GroupKind, a: Vector) -> Matrix:
    """Matrix of the algebra adjoint w ↦ [hat(a), hat(w)]."""
    if kind is GroupKind.SO2:
        return np.zeros((1, 1))
    return hat(kind, a)
