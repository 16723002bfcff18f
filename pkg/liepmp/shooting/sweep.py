"""
Forward sweep over one shooting segment: controls from the costate, states by the
dynamics, costates by the forward-rearranged adjoint recursion.
"""

from dataclasses import dataclass, field

import numpy as np

from liepmp.lie.group import GroupElement, Vector
from liepmp.model.problem import LieOCP
from liepmp.pmp.adjoint import forward_adjoint_step
from liepmp.pmp.control import control_argmax
from liepmp.pmp.costate import Costate
from liepmp.pmp.linearize import InputLinearization, StateLinearization, linearize_input, linearize_state
from liepmp.shooting.layout import ShootingLayout


@dataclass(frozen=True)
class SegmentSweep:
    """
    Segment k from t_k to t_{k+1}. `qs`, `xs` hold t_k..t_{k+1} (the last entry is
    the prediction at the next node); `costates` hold t_k..t_{k+1} as well unless
    t_{k+1} = N, where the last costate is at N-1. `g` holds the constraint values
    at the owned constrained times, in increasing t. `states` holds the step data
    aligned with `qs`, None at t = N.
    """

    k: int
    start: int
    qs: tuple[GroupElement, ...]
    xs: tuple[Vector, ...]
    costates: tuple[Costate, ...]
    controls: tuple[Vector, ...]
    g: dict[int, Vector] = field(default_factory=dict)
    states: tuple[StateLinearization | None, ...] = ()

    @property
    def end_state(self) -> tuple[GroupElement, Vector]:
        return self.qs[-1], self.xs[-1]


def _state_data(
    p: LieOCP, base: SegmentSweep | None, i: int, t: int, q: GroupElement, x: Vector
) -> StateLinearization:
    """Step data at (t, q, x), taken from `base` when its state at i is bitwise the same."""
    if base is not None and i < len(base.states):
        prior = base.states[i]
        if prior is not None and np.array_equal(prior.q.m, q.m) and np.array_equal(prior.x, x):
            return prior
    return linearize_state(p, t, q, x)


def sweep_segment(
    p: LieOCP,
    layout: ShootingLayout,
    z: Vector,
    k: int,
    nu: float,
    *,
    base: SegmentSweep | None = None,
    resume: int | None = None,
) -> SegmentSweep:
    """
    Sweep segment k for the unknowns z. With `base` and `resume`, steps before
    `resume` are copied from `base` and the sweep restarts there; step data of
    `base` is reused wherever the state has not changed.

    Raises:
        LogBranchCut: if a step leaves the domain of the logarithm.
        SingularJacobian: if the adjoint recursion cannot be inverted.
    """
    t0, t1 = layout.nodes[k], layout.nodes[k + 1]
    if base is not None and resume is not None and resume > t0:
        j = resume - t0
        qs, xs = list(base.qs[: j + 1]), list(base.xs[: j + 1])
        costates, controls = list(base.costates[: j + 1]), list(base.controls[:j])
        states = list(base.states[: j + 1])
        g = {t: v for t, v in base.g.items() if t <= resume}
        start = resume
    else:
        if k == 0:
            q, x = p.initial_state()
        else:
            q, x = layout.node_state(z, k)
        qs, xs = [q], [x]
        costates, controls = [layout.seed(z, k)], []
        states = [None]
        g = {}
        start = t0

    inp: InputLinearization | None = None
    for t in range(start, t1):
        i = t - t0
        q, x, costate = qs[i], xs[i], costates[i]
        st = states[i]
        if st is None:
            st = states[i] = _state_data(p, base, i, t, q, x)
        u = control_argmax(p, t, costate.xi, q, x, nu)
        if inp is None or not np.array_equal(inp.u, u):
            inp = linearize_input(p, st, u)

        q_next, x_next = q @ st.s, inp.f
        qs.append(q_next)
        xs.append(x_next)
        controls.append(u)

        if t + 1 < p.N:
            st_next = _state_data(p, base, i + 1, t + 1, q_next, x_next)
            states.append(st_next)
            next_costate, inp = forward_adjoint_step(p, st_next, costate, layout.mu(z, t + 1), nu)
            costates.append(next_costate)
            if t + 1 in layout.mu_offsets:
                g[t + 1] = st_next.g
        else:
            states.append(None)
            if t + 1 in layout.mu_offsets:
                g[t + 1] = p.constraint(t + 1, q_next, x_next)

    return SegmentSweep(
        k=k,
        start=t0,
        qs=tuple(qs),
        xs=tuple(xs),
        costates=tuple(costates),
        controls=tuple(controls),
        g=g,
        states=tuple(states),
    )
