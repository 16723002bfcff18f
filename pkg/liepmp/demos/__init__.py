from .spacecraft import (
    PRESETS,
    ManeuverDefaults,
    ProblemSpec,
    So2ManeuverSpec,
    So3AttitudeSpec,
    build,
    build_so2,
    build_so3,
    energy_drift,
    maneuver_defaults,
    maneuver_step,
    preset,
    problem_spec,
    unwrapped_angles,
)

__all__ = [
    "PRESETS",
    "ManeuverDefaults",
    "ProblemSpec",
    "So2ManeuverSpec",
    "So3AttitudeSpec",
    "build",
    "build_so2",
    "build_so3",
    "energy_drift",
    "maneuver_defaults",
    "maneuver_step",
    "preset",
    "problem_spec",
    "unwrapped_angles",
]
