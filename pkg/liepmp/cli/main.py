"""
`liepmp {solve,verify,demo,audit} (--preset NAME | --problem FILE.json) [options]`

Writes trajectory.csv and report.json into --out (default runs/<problem>). Exit
status: 0 success, 1 solver failure, 2 invalid configuration, 3 failed verification.
"""

import argparse
import logging
import math
import os
import typing as t

import numpy as np
from pydantic import ValidationError

from liepmp.cli.config import RunConfig
from liepmp.cli.export import write_json, write_trajectory_csv
from liepmp.cli.reports import DemoReport, RunReport, VerifyReport
from liepmp.demos import PRESETS, So2ManeuverSpec, So3AttitudeSpec, build, energy_drift
from liepmp.errors import InvalidConfig, InvalidSpec, LiePMPError, LogBranchCut, NoConvergence
from liepmp.lie.group import AlgebraVector, GroupElement, GroupKind, exp
from liepmp.log import liepmpLog
from liepmp.model.dynamics import simulate, total_cost
from liepmp.model.problem import FixedBoth, LieOCP
from liepmp.model.reports import SolveReport
from liepmp.model.validate import validate
from liepmp.oracle import derivative_audit, equivariance_check, oracle_solve
from liepmp.pmp.costate import ExtremalTrajectory
from liepmp.shooting import homotopy_solve, solve

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_INVALID = 2
EXIT_VERIFY = 3

RESIDUAL_FACTOR = 10.0
SATURATION_TOL = 1e-9
AUDIT_TOL = 1e-5
EQUIVARIANCE_TOL = 1e-8
ORACLE_TOL = 1e-3
ORACLE_MAX_STEPS = 200
TRANSLATION_ANGLE = math.radians(30.0)


def parse_args(argv: t.Sequence[str] | None = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--preset", choices=sorted(PRESETS), help="named example problem")
    source.add_argument("--problem", metavar="FILE.json", help="problem document (see docs/problem-schema.md)")
    common.add_argument("--out", metavar="DIR", help="output directory (default: runs/<problem>)")
    common.add_argument("--tol", type=float, default=1e-10, help="Newton tolerance on the residual ∞-norm")
    common.add_argument("--segments", type=int, default=None, help="shooting segments (default: ⌈N/250⌉)")
    common.add_argument("--max-iter", type=int, default=200, help="Newton iteration limit")
    common.add_argument("--homotopy", choices=["on", "off"], default="on", help="continuation in the constraint level")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized audits")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug output")

    parser = argparse.ArgumentParser(
        prog="liepmp",
        description="Discrete-time optimal control on rotation groups by the maximum principle",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("solve", parents=[common], help="solve and export the extremal")
    commands.add_parser("verify", parents=[common], help="solve, then audit derivatives, equivariance and the direct oracle")
    commands.add_parser("demo", parents=[common], help="solve and summarize saturation and angle travel")
    commands.add_parser("audit", parents=[common], help="finite-difference audit of all derivatives")
    return parser.parse_args(argv)


def _threads() -> int:
    raw = os.environ.get("LIEPMP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError as e:
        raise InvalidConfig(f"LIEPMP_THREADS must be an integer, got '{raw}'") from e


def _solve(p: LieOCP, config: RunConfig) -> tuple[ExtremalTrajectory | None, SolveReport]:
    opts = config.solver_options()
    if config.homotopy and p.constraints is not None:
        return homotopy_solve(p, opts=opts)
    return solve(p, opts=opts)


def _solved(report: SolveReport, tol: float) -> bool:
    return (
        report.converged
        and report.residuals is not None
        and report.residuals.max_residual() <= RESIDUAL_FACTOR * tol
    )


def _demo(
    spec: So2ManeuverSpec | So3AttitudeSpec, p: LieOCP, extremal: ExtremalTrajectory, report: SolveReport
) -> DemoReport:
    u = np.abs(extremal.controls)
    bound = float(np.max(p.control_set.hi))
    saturated = np.max(u, axis=1) >= bound - SATURATION_TOL
    fields: dict[str, t.Any] = {}
    if p.kind is GroupKind.SO2:
        raw = np.array([q.angle() for q in extremal.trajectory.qs])
        unwrapped = np.unwrap(raw)
        fields = {
            "final_angle_deg": math.degrees(unwrapped[-1]),
            "angle_travel_raw_rad": raw[-1] - raw[0],
            "angle_travel_unwrapped_rad": unwrapped[-1] - unwrapped[0],
            "wraps": bool(np.any(np.abs(np.diff(raw)) > math.pi)),
        }
    if isinstance(spec, So3AttitudeSpec):
        fields["energy_drift"] = energy_drift(spec, extremal.controls)
    return DemoReport(
        max_abs_u=float(np.max(u)),
        control_bound=bound,
        saturates=bool(np.any(saturated)),
        saturated_at_ends=bool(saturated[0] and saturated[-1]),
        active_constraint_steps=len(report.active_set),
        final_state=extremal.trajectory.xs[-1],
        **fields,
    )


def _translation(kind: GroupKind) -> GroupElement:
    if kind is GroupKind.SO2:
        return GroupElement.rotation(TRANSLATION_ANGLE)
    return exp(AlgebraVector(kind, [0.0, 0.0, TRANSLATION_ANGLE]))


def _verify(p: LieOCP, extremal: ExtremalTrajectory, config: RunConfig) -> VerifyReport:
    audit = derivative_audit(p, seed=config.seed)
    failures, skipped = [], []
    if audit.max_rel_error > AUDIT_TOL:
        failures.append(f"derivative audit: max relative error {audit.max_rel_error:.3e}")

    equivariance = None
    if isinstance(p.boundary, FixedBoth):
        equivariance = equivariance_check(p, _translation(p.kind), config.solver_options())
        if not equivariance <= EQUIVARIANCE_TOL:
            failures.append(f"equivariance: control difference {equivariance:.3e}")
    else:
        skipped.append("equivariance: final state is not fixed")

    oracle: dict[str, float] = {}
    if p.N <= ORACLE_MAX_STEPS:
        pmp_cost = total_cost(p, simulate(p, extremal.controls), extremal.controls)
        try:
            sol = oracle_solve(p)
            gap = abs(sol.cost - pmp_cost) / max(1.0, abs(sol.cost))
            oracle = {
                "oracle_cost": sol.cost,
                "pmp_cost": pmp_cost,
                "oracle_relative_gap": gap,
                "oracle_kkt_norm": sol.kkt_norm,
            }
            if gap > ORACLE_TOL:
                failures.append(f"oracle: relative cost gap {gap:.3e}")
        except (NoConvergence, LogBranchCut) as e:
            failures.append(f"oracle: {e}")
    else:
        skipped.append(f"oracle: N = {p.N} above {ORACLE_MAX_STEPS} steps")

    return VerifyReport(audit=audit, equivariance=equivariance, skipped=skipped, failures=failures, **oracle)


def run(config: RunConfig) -> int:
    """
    Execute one command and write its outputs.

    Raises:
        InvalidConfig: if the problem source cannot be loaded.
        InvalidSpec: if the problem document violates a builder invariant.
    """
    spec = config.load_spec()
    p = build(spec)
    out = config.out_dir(p.name)

    def finish(code: int, **fields: t.Any) -> int:
        write_json(out / "report.json", RunReport(config=config, exit_code=code, **fields))
        return code

    if config.command == "audit":
        audit = derivative_audit(p, seed=config.seed)
        return finish(EXIT_OK if audit.max_rel_error <= AUDIT_TOL else EXIT_VERIFY, audit=audit)

    validation = validate(p)
    if not validation.accepted:
        liepmpLog.error(f"'{p.name}' failed validation: {sorted(validation.codes())}")
        return finish(EXIT_INVALID, validation=validation, message="problem failed validation")

    try:
        extremal, report = _solve(p, config)
    except LiePMPError as e:
        liepmpLog.error(f"'{p.name}': {e}")
        return finish(EXIT_SOLVER, validation=validation, message=str(e))

    if extremal is not None:
        write_trajectory_csv(out / "trajectory.csv", p, extremal)
    if not _solved(report, config.tol):
        return finish(EXIT_SOLVER, validation=validation, solve=report, message=report.message)

    fields: dict[str, t.Any] = {"validation": validation, "solve": report}
    if config.command == "demo":
        fields["demo"] = _demo(spec, p, extremal, report)
    if config.command == "verify":
        verification = _verify(p, extremal, config)
        fields["verify"] = verification
        if not verification.passed:
            liepmpLog.error(f"'{p.name}' failed verification: {'; '.join(verification.failures)}")
            return finish(EXIT_VERIFY, **fields)
    return finish(EXIT_OK, **fields)


def main(argv: t.Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    level = logging.DEBUG if args.verbose >= 2 else logging.INFO if args.verbose == 1 else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = RunConfig(
            command=args.command,
            preset=args.preset,
            problem=args.problem,
            out=args.out,
            tol=args.tol,
            max_iter=args.max_iter,
            segments=args.segments,
            homotopy=args.homotopy == "on",
            seed=args.seed,
            threads=_threads(),
        )
        return run(config)
    except (ValidationError, InvalidConfig, InvalidSpec) as e:
        liepmpLog.error(f"Invalid configuration: {e}")
        return EXIT_INVALID
    except LiePMPError as e:
        liepmpLog.error(str(e))
        return EXIT_SOLVER
