"""
Flat CSV export of an extremal, one row per time index t = 0..N. Cells with no
value at a row are empty; floats are written with their shortest round-trip repr.
"""

import csv
import typing as t
from pathlib import Path

from liepmp.demos.spacecraft import unwrapped_angles
from liepmp.errors import LiePMPError
from liepmp.lie.group import GroupKind
from liepmp.log import liepmpLog
from liepmp.model.basemodel import Report
from liepmp.model.problem import LieOCP
from liepmp.pmp.costate import ExtremalTrajectory
from liepmp.pmp.hamiltonian import hamiltonian_value
from liepmp.pmp.linearize import linearize


def _cells(values: t.Iterable[float] | None, width: int) -> list[str]:
    cells = [repr(float(v)) for v in values] if values is not None else []
    return cells + [""] * (width - len(cells))


def trajectory_header(p: LieOCP) -> list[str]:
    n, n_g = p.kind.n, max((p.constraint_count(t_) for t_ in range(p.N + 1)), default=0)
    return (
        ["t", "time_s", "theta_rad_unwrapped"]
        + [f"q_{i}{j}" for i in range(n) for j in range(n)]
        + [f"x_{i}" for i in range(p.n_x)]
        + [f"u_{i}" for i in range(p.n_u)]
        + [f"zeta_{i}" for i in range(p.n_q)]
        + [f"xi_{i}" for i in range(p.n_x)]
        + [f"rho_{i}" for i in range(p.n_q)]
        + [f"mu_{i}" for i in range(n_g)]
        + [f"g_{i}" for i in range(n_g)]
        + ["H"]
    )


def trajectory_rows(p: LieOCP, extremal: ExtremalTrajectory) -> t.Iterator[list[str]]:
    traj, nu = extremal.trajectory, extremal.multipliers.nu
    n_g = max((p.constraint_count(t_) for t_ in range(p.N + 1)), default=0)
    h = p.metadata.get("h")
    theta = unwrapped_angles(traj.qs) if p.kind is GroupKind.SO2 else None

    for t_ in range(p.N + 1):
        q, x = traj.qs[t_], traj.xs[t_]
        u = zeta = xi = rho = H = None
        if t_ < p.N:
            u = extremal.controls[t_]
            costate = extremal.costates[t_]
            xi, rho = costate.xi, costate.rho.c
            try:
                lin = linearize(p, t_, q, x, u)
                zeta_cv = costate.zeta(lin.state.a)
                zeta = zeta_cv.c
                H = [hamiltonian_value(lin, zeta_cv, xi, nu)]
            except LiePMPError as e:
                liepmpLog.warning(f"No Hamiltonian data at t={t_}: {e}")
        mu = extremal.multipliers.at(t_) if t_ >= 1 else None
        g = p.constraint(t_, q, x) if t_ >= 1 else None

        yield (
            [str(t_), repr(t_ * float(h)) if h is not None else "", repr(float(theta[t_])) if theta is not None else ""]
            + _cells(q.m.ravel(), p.kind.n**2)
            + _cells(x, p.n_x)
            + _cells(u, p.n_u)
            + _cells(zeta, p.n_q)
            + _cells(xi, p.n_x)
            + _cells(rho, p.n_q)
            + _cells(mu, n_g)
            + _cells(g, n_g)
            + _cells(H, 1)
        )


def write_trajectory_csv(path: Path, p: LieOCP, extremal: ExtremalTrajectory) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(trajectory_header(p))
        writer.writerows(trajectory_rows(p, extremal))
    liepmpLog.info(f"Wrote {p.N + 1} rows to {path}")


def write_json(path: Path, report: Report) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n")
    liepmpLog.info(f"Wrote {path}")
