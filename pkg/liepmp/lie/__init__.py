from .coadjoint import (
    ad_star,
    dexp_dual,
    dexp_dual_inverse,
    dexp_left_matrix,
    trivialize_cotangent,
)
from .group import (
    AlgebraVector,
    CoAlgebraVector,
    GroupElement,
    GroupKind,
    adjoint_matrix,
    exp,
    hat,
    log,
    vee,
)

__all__ = [
    "AlgebraVector",
    "CoAlgebraVector",
    "GroupElement",
    "GroupKind",
    "ad_star",
    "adjoint_matrix",
    "dexp_dual",
    "dexp_dual_inverse",
    "dexp_left_matrix",
    "exp",
    "hat",
    "log",
    "trivialize_cotangent",
    "vee",
]
