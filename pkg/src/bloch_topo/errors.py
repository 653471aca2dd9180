"""Exception types raised across the package."""


class BlochTopoError(Exception):
    """Base class for all errors raised by bloch_topo."""


class ConfigInvalid(BlochTopoError, ValueError):
    pass


class NotCoprime(ConfigInvalid):
    pass


class ArmchairExcluded(ConfigInvalid):
    """The edge satisfies <xi_star, v> in pi*Z; the edge index is not defined."""


class RotationNotIntegral(BlochTopoError):
    pass


class BasisNotClosed(BlochTopoError):
    pass


class ConvergenceFailure(BlochTopoError):
    def __init__(self, message, residual=None, where=None):
        super().__init__(message)
        self.residual = residual
        self.where = where


class NotDegenerate(BlochTopoError):
    pass


class MultiplicityError(BlochTopoError):
    """Degenerate eigenvalue found, but its multiplicity is not two."""


class RotationMixing(BlochTopoError):
    pass


class GapClosed(BlochTopoError):
    pass


class SingularLink(BlochTopoError):
    pass


class BranchAmbiguity(BlochTopoError):
    pass


class CrossingOnNode(BlochTopoError):
    pass
