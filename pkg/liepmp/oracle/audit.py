"""
Finite-difference audit of every derivative the maximum-principle solvers use:
the Hamiltonian partials, the implicit-step solution map, the cotangent
trivialization and the problem's own analytic hooks.
"""

import numpy as np

from liepmp.errors import LiePMPError
from liepmp.implicit.step import kappa_partials, solve_step
from liepmp.lie.coadjoint import trivialize_cotangent
from liepmp.lie.group import CoAlgebraVector, GroupElement, Vector, log
from liepmp.log import liepmpLog
from liepmp.model.problem import ImplicitStepSpec, LieOCP
from liepmp.model.reports import AuditEntry, AuditReport
from liepmp.model.validate import partials_errors, sample_control, sample_state
from liepmp.pmp.hamiltonian import hamiltonian, hamiltonian_partials
from liepmp.util.fd import group_jacobian, jacobian, relative_error

AUDIT_POINTS = 100


def _hamiltonian_errors(
    p: LieOCP, t: int, q: GroupElement, x: Vector, u: Vector, rng: np.random.Generator
) -> dict[str, float]:
    zeta = CoAlgebraVector(p.kind, rng.normal(size=p.n_q))
    xi = rng.normal(size=p.n_x)
    nu = -1.0
    D = hamiltonian_partials(p, t, zeta, xi, q, x, u, nu)

    def H(zz=zeta, xx_i=xi, qq=q, xx=x, uu=u) -> float:
        return hamiltonian(p, t, zz, xx_i, qq, xx, uu, nu)

    return {
        "D_zetaH": relative_error(D.d_zeta.v, jacobian(lambda c: H(zz=CoAlgebraVector(p.kind, c)), zeta.c)[0]),
        "D_xiH": relative_error(D.d_xi, jacobian(lambda c: H(xx_i=c), xi)[0]),
        "D_xH": relative_error(D.d_x, jacobian(lambda c: H(xx=c), x)[0]),
        "D_uH": relative_error(D.d_u, jacobian(lambda c: H(uu=c), u)[0]),
        "D_qH": relative_error(D.d_q.c, group_jacobian(lambda g: H(qq=g), q)[0]),
    }


def _kappa_errors(spec: ImplicitStepSpec, t: int, q: GroupElement, x: Vector) -> dict[str, float]:
    s = solve_step(spec, q, x, t=t).s
    K = kappa_partials(spec, s, q, x, t=t)
    s_inv = s.inverse()
    Kq = group_jacobian(lambda qq: log(s_inv @ solve_step(spec, qq, x, t=t).s).v, q)
    Kx = jacobian(lambda xx: log(s_inv @ solve_step(spec, q, xx, t=t).s).v, x)
    return {"kappa_q": relative_error(K.Kq, Kq), "kappa_x": relative_error(K.Kx, Kx)}


def _cotangent_error(q: GroupElement, rng: np.random.Generator) -> float:
    W = rng.normal(size=q.m.shape)
    analytic = trivialize_cotangent(q, W).c
    reference = group_jacobian(lambda g: float(np.sum(W * g.m)), q)[0]
    return relative_error(analytic, reference)


def derivative_audit(p: LieOCP, points: int = AUDIT_POINTS, seed: int = 0) -> AuditReport:
    """
    Maximum relative error per derivative over `points` random sample points. Never
    raises: points outside the problem's domain are skipped and counted out.
    """
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    used = 0
    for _ in range(points):
        t = int(rng.integers(0, p.N))
        q, x = sample_state(p, rng)
        u = sample_control(p, rng)
        try:
            errors = _hamiltonian_errors(p, t, q, x, u, rng)
            errors |= partials_errors(p, t, q, x, u)
            if isinstance(p.step, ImplicitStepSpec):
                errors |= _kappa_errors(p.step, t, q, x)
            errors["trivialize_cotangent"] = _cotangent_error(q, rng)
        except LiePMPError as e:
            liepmpLog.debug(f"audit point at t={t} skipped: {e}")
            continue
        used += 1
        for name, err in errors.items():
            worst[name] = max(worst.get(name, 0.0), err if np.isfinite(err) else np.inf)

    if used < points:
        liepmpLog.warning(f"Derivative audit used {used} of {points} points")
    report = AuditReport(
        points=used,
        entries=[AuditEntry(quantity=name, max_rel_error=err) for name, err in sorted(worst.items())],
    )
    liepmpLog.info(f"'{p.name}': derivative audit max relative error {report.max_rel_error:.3e}")
    return report
