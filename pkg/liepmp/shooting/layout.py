"""
Unknown-vector layout of the multiple-shooting system.

The horizon is split at nodes 0 = t_0 < t_1 < ... < t_S = N. The unknowns are

    z = [ (ρ, ξ) seed at every node t_0..t_{S-1}
        | μᵗ for every constrained t, in increasing t
        | (w, x) state at every interior node t_1..t_{S-1} ]

where an interior node orientation is q_ref·exp(hat(w)) about a fixed reference.
"""

import bisect
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from liepmp.errors import LiePMPError
from liepmp.lie.group import (
    AlgebraVector,
    CoAlgebraVector,
    GroupElement,
    GroupKind,
    Vector,
    exp,
    log,
)
from liepmp.log import liepmpLog
from liepmp.model.dynamics import simulate
from liepmp.model.problem import FixedBoth, LieOCP
from liepmp.pmp.costate import Costate, Multipliers

NODE_SPACING = 10


def default_segments(N: int) -> int:
    return max(1, math.ceil(N / NODE_SPACING))


def _reference_states(p: LieOCP, nodes: list[int]) -> list[tuple[GroupElement, Vector]]:
    if p.state_guess is not None:
        return [p.state_guess(t) for t in nodes]

    q0, x0 = p.initial_state()
    b = p.boundary
    if isinstance(b, FixedBoth):
        gap = log(q0.inverse() @ b.qN)
        xN = np.atleast_1d(np.asarray(b.xN, dtype=float))
        return [
            (q0 @ exp(gap * (t / p.N)), x0 + (xN - x0) * (t / p.N))
            for t in nodes
        ]

    try:
        free = simulate(p, np.tile(p.control_set.clamp(np.zeros(p.n_u)), (p.N, 1)))
        return [(free.qs[t], free.xs[t]) for t in nodes]
    except LiePMPError:
        liepmpLog.warning("Zero-control reference left the log domain; using the initial state")
        return [(q0, x0) for _ in nodes]


@dataclass(frozen=True)
class ShootingLayout:
    kind: GroupKind
    N: int
    n_q: int
    n_x: int
    nodes: tuple[int, ...]
    q_refs: tuple[GroupElement, ...]  # interior nodes t_1..t_{S-1}
    x_refs: tuple[Vector, ...]
    counts: tuple[int, ...]  # n_g(t) for t = 0..N
    constrained: tuple[int, ...]  # times with μ unknowns
    mu_offsets: dict[int, int]
    dim: int

    @classmethod
    def build(
        cls, p: LieOCP, segments: int | None = None, *, with_multipliers: bool = True
    ) -> "ShootingLayout":
        S = default_segments(p.N) if segments is None else segments
        S = max(1, min(S, p.N))
        nodes = sorted({round(k * p.N / S) for k in range(S + 1)})
        S = len(nodes) - 1

        counts = tuple(p.constraint_count(t) for t in range(p.N + 1))
        last = p.N - 1 if isinstance(p.boundary, FixedBoth) else p.N
        constrained = (
            tuple(t for t in range(1, last + 1) if counts[t] > 0) if with_multipliers else ()
        )

        n = p.n_q + p.n_x
        offset = S * n
        mu_offsets = {}
        for t in constrained:
            mu_offsets[t] = offset
            offset += counts[t]

        refs = _reference_states(p, nodes[1:-1])
        return cls(
            kind=p.kind,
            N=p.N,
            n_q=p.n_q,
            n_x=p.n_x,
            nodes=tuple(nodes),
            q_refs=tuple(q for q, _ in refs),
            x_refs=tuple(np.atleast_1d(np.asarray(x, dtype=float)) for _, x in refs),
            counts=counts,
            constrained=constrained,
            mu_offsets=mu_offsets,
            dim=offset + (S - 1) * n,
        )

    @property
    def S(self) -> int:
        return len(self.nodes) - 1

    @property
    def n(self) -> int:
        return self.n_q + self.n_x

    @property
    def node_offset(self) -> int:
        return self.S * self.n + sum(self.counts[t] for t in self.constrained)

    def without_multipliers(self) -> "ShootingLayout":
        n = self.n
        return ShootingLayout(
            kind=self.kind,
            N=self.N,
            n_q=self.n_q,
            n_x=self.n_x,
            nodes=self.nodes,
            q_refs=self.q_refs,
            x_refs=self.x_refs,
            counts=self.counts,
            constrained=(),
            mu_offsets={},
            dim=(2 * self.S - 1) * n,
        )

    def seed(self, z: Vector, k: int) -> Costate:
        i = k * self.n
        return Costate(
            rho=CoAlgebraVector(self.kind, z[i : i + self.n_q]),
            xi=z[i + self.n_q : i + self.n],
        )

    def node_state(self, z: Vector, k: int) -> tuple[GroupElement, Vector]:
        """(q, x) at interior node k in 1..S-1."""
        i = self.node_offset + (k - 1) * self.n
        q_ref = self.q_refs[k - 1]
        w = AlgebraVector(self.kind, z[i : i + self.n_q])
        return q_ref @ exp(w), z[i + self.n_q : i + self.n].copy()

    def mu(self, z: Vector, t: int) -> Vector:
        if t in self.mu_offsets:
            i = self.mu_offsets[t]
            return z[i : i + self.counts[t]]
        return np.zeros(self.counts[t] if 0 <= t <= self.N else 0)

    def mu_block(self, z: Vector) -> Vector:
        return z[self.S * self.n : self.node_offset]

    def multipliers(self, z: Vector, nu: float) -> Multipliers:
        return Multipliers(mu=tuple(self.mu(z, t).copy() for t in range(1, self.N + 1)), nu=nu)

    def segment_of(self, t: int) -> int:
        """The segment k with t_k < t ≤ t_{k+1}."""
        return int(np.searchsorted(self.nodes, t, side="left")) - 1

    def owner(self, i: int) -> tuple[int, int]:
        """(segment, first affected step) of unknown i."""
        n = self.n
        if i < self.S * n:
            k = i // n
            return k, self.nodes[k]
        if i >= self.node_offset:
            k = (i - self.node_offset) // n + 1
            return k, self.nodes[k]
        t = self.constrained[bisect.bisect_right(self._mu_starts, i) - 1]
        return self.segment_of(t), t - 1

    @cached_property
    def _mu_starts(self) -> list[int]:
        return [self.mu_offsets[t] for t in self.constrained]

    def initial_guess(self) -> Vector:
        """Zero costates and multipliers, interior nodes at their references."""
        z = np.zeros(self.dim)
        for k in range(1, self.S):
            i = self.node_offset + (k - 1) * self.n
            z[i + self.n_q : i + self.n] = self.x_refs[k - 1]
        return z

    def transfer(self, z: Vector, source: "ShootingLayout") -> Vector:
        """Embed an iterate of `source` (same nodes) in this layout; new multipliers start at zero."""
        if source.nodes != self.nodes:
            raise ValueError("Layouts have different shooting nodes")
        out = np.zeros(self.dim)
        seeds = self.S * self.n
        out[:seeds] = z[:seeds]
        for t in self.constrained:
            if t in source.mu_offsets:
                out[self.mu_offsets[t] : self.mu_offsets[t] + self.counts[t]] = source.mu(z, t)
        out[self.node_offset :] = z[source.node_offset :]
        return out
