"""Exception types raised across the package."""


class CabError(Exception):
    """Base class for all package errors."""


class InvalidArgumentsError(CabError, ValueError):
    pass


class BudgetExceededError(CabError):
    """Exhaustive verification requested above the tuple cap."""


class NoSeparatingPartitionError(CabError):
    """The family fails the partition assumption for a queried tuple."""


class ArmCapExceededError(CabError):
    def __init__(self, message, *, T=None, M=None, arms=None):
        super().__init__(message)
        self.T = T
        self.M = M
        self.arms = arms


class StrategyOverflowError(CabError, OverflowError):
    pass


class InvalidRewardError(CabError, ValueError):
    pass


class EmptySequenceError(CabError, ValueError):
    pass


class HorizonExceededError(CabError, IndexError):
    pass


class OracleUnsupportedError(CabError):
    pass


class DegenerateFitError(CabError, ValueError):
    pass
