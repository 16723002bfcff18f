class LiePMPError(Exception):
    def __init__(self, message: str):
        super().__init__(message)


class InvalidAlgebraMatrix(LiePMPError, ValueError):
    pass


class InvalidGroupElement(LiePMPError, ValueError):
    pass


class LogBranchCut(LiePMPError):
    """The step left the domain on which the exponential map is a diffeomorphism."""

    pass


class InconsistentTrajectory(LiePMPError, ValueError):
    pass


class BoundaryMismatch(LiePMPError, ValueError):
    pass


class SubmersionRankError(LiePMPError):
    pass


class NonConcaveHamiltonian(LiePMPError):
    pass


class NoConvergence(LiePMPError):
    pass


class SingularJacobian(LiePMPError):
    pass


class InvalidSpec(LiePMPError, ValueError):
    pass


class InvalidConfig(LiePMPError, ValueError):
    pass
