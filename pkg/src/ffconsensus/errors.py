"""Exception hierarchy shared by every layer of the package."""


class ConsensusError(Exception):
    """Base class for all errors raised by ffconsensus."""


class DimensionError(ConsensusError, ValueError):
    pass


class ContractError(ConsensusError, ValueError):
    """A precondition on the arguments of an operation was violated."""


class SingularityError(ConsensusError, ArithmeticError):
    pass


class ConvergenceError(ConsensusError, ArithmeticError):
    pass


class TopologyShapeError(ConsensusError, ValueError):
    """A follower has zero or several in-neighbors."""


class NoSpanningTreeError(ConsensusError, ValueError):
    """Parent links contain a cycle or do not reach the leader."""


class ValidationError(ConsensusError, ValueError):
    """Scenario data failed a consistency check.

    ``agent`` is the 1-based follower index when the failure is agent specific.
    """

    def __init__(self, message, *, agent=None, field=None):
        super().__init__(message)
        self.agent = agent
        self.field = field


class WeightDefinitenessError(ValidationError):
    pass


class FeedforwardInfeasibleError(ConsensusError):
    def __init__(self, message, *, agent=None, parent=None):
        super().__init__(message)
        self.agent = agent
        self.parent = parent


class NonStabilizableError(ConsensusError):
    pass


class ConditioningError(ConsensusError, ArithmeticError):
    pass


class ObserverSynthesisError(ConsensusError):
    def __init__(self, message, *, best_rho):
        super().__init__(message)
        self.best_rho = best_rho


class StabilityError(ConsensusError):
    pass


class RegulatorInfeasibleError(ConsensusError):
    def __init__(self, message, *, residual=None):
        super().__init__(message)
        self.residual = residual


class BaselineUnstableError(ConsensusError):
    def __init__(self, message, *, rho=None):
        super().__init__(message)
        self.rho = rho


class ScenarioParseError(ConsensusError, ValueError):
    pass
