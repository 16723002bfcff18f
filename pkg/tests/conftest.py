import dataclasses

import pytest

from liepmp.demos import So2ManeuverSpec, build_so2, build_so3, preset
from liepmp.model.problem import LieOCP


@pytest.fixture
def small_spec() -> So2ManeuverSpec:
    """Rest-to-rest turn of 0.2 rad in 2 s; the momentum bound never binds."""
    return So2ManeuverSpec(name="small", h=0.1, N=20, c=1.0, d=5.0, theta_i=0.0, theta_f=0.2)


@pytest.fixture
def small(small_spec) -> LieOCP:
    return build_so2(small_spec)


@pytest.fixture
def unconstrained(small) -> LieOCP:
    return dataclasses.replace(small, constraints=None)


@pytest.fixture
def bounded() -> LieOCP:
    """Rest-to-rest turn of 0.3 rad in 3 s whose momentum bound is active mid-maneuver."""
    return build_so2(
        So2ManeuverSpec(name="bounded", h=0.1, N=30, c=1.0, d=0.12, theta_i=0.0, theta_f=0.3)
    )


@pytest.fixture
def t2() -> LieOCP:
    return build_so2(preset("t2"))


@pytest.fixture
def so3() -> LieOCP:
    return build_so3(preset("so3-rest-to-rest"))
