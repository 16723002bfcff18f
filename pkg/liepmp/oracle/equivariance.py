import dataclasses
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from liepmp.errors import BoundaryMismatch, LiePMPError
from liepmp.lie.group import GroupElement
from liepmp.log import liepmpLog
from liepmp.model.problem import FixedBoth, LieOCP
from liepmp.shooting.options import SolverOptions
from liepmp.shooting.solver import homotopy_solve, solve


def left_translate(p: LieOCP, g0: GroupElement) -> LieOCP:
    """The same problem with both boundary orientations (and the state guess) moved to g0·q."""
    b = p.boundary
    if not isinstance(b, FixedBoth):
        raise BoundaryMismatch(f"Left translation needs fixed endpoints, got {type(b).__name__}")

    guess = None
    if p.state_guess is not None:
        base = p.state_guess

        def guess(t: int):
            q, x = base(t)
            return g0 @ q, x

    return dataclasses.replace(
        p,
        boundary=FixedBoth(q0=g0 @ b.q0, x0=b.x0, qN=g0 @ b.qN, xN=b.xN),
        state_guess=guess,
        name=f"{p.name} (translated)",
    )


def equivariance_check(p: LieOCP, g0: GroupElement, opts: SolverOptions | None = None) -> float:
    """
    ∞-norm of the difference between the optimal controls of p and of p with
    both boundary orientations left-translated by g0. For problems whose maps
    see q only through left-invariant quantities this is zero up to round-off;
    a failed solve gives inf.
    """
    opts = opts or SolverOptions()
    translated = left_translate(p, g0)
    run = homotopy_solve if opts.homotopy and p.constraints is not None else solve

    def controls(problem: LieOCP) -> np.ndarray | None:
        try:
            extremal, report = run(problem, opts=opts)
        except LiePMPError as e:
            liepmpLog.error(f"'{problem.name}': {e}")
            return None
        return extremal.controls if report.converged else None

    with ThreadPoolExecutor(max_workers=2) as pool:
        original, moved = pool.map(controls, (p, translated))

    if original is None or moved is None:
        liepmpLog.error(f"'{p.name}': equivariance check could not solve both problems")
        return float("inf")
    diff = float(np.max(np.abs(original - moved), initial=0.0))
    liepmpLog.info(f"'{p.name}': control difference under left translation {diff:.3e}")
    return diff
