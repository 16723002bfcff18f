from .audit import derivative_audit
from .direct import OracleOptions, OracleSolution, oracle_solve, reconstruct_costates
from .equivariance import equivariance_check, left_translate

__all__ = [
    "OracleOptions",
    "OracleSolution",
    "derivative_audit",
    "equivariance_check",
    "left_translate",
    "oracle_solve",
    "reconstruct_costates",
]
