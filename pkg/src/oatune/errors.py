"""Exception hierarchy.

Every error carries ``exit_code`` so the command line can map an error
family onto a process status without a lookup table.
"""


class OATError(Exception):
    exit_code = 1


class ConfigError(OATError, ValueError):
    exit_code = 2


class SchemaError(ConfigError):
    pass


class UnequalLevelCounts(ConfigError):
    pass


class DuplicateFactorName(ConfigError):
    pass


class NotPrimePower(ConfigError):
    pass


class UnsupportedLevels(ConfigError):
    pass


class TooManyFactors(ConfigError):
    pass


class UnknownTable(ConfigError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidCount(ConfigError):
    pass


class InvalidSampleCount(ConfigError):
    pass


class UnknownLevel(ConfigError):
    pass


class PlanMismatch(ConfigError):
    pass


class AssignmentMismatch(ConfigError):
    pass


class ObjectiveError(OATError):
    """Raised when the black-box objective misbehaves.

    ``record`` holds the failed :class:`~oatune.runner.TrialRecord` when one
    was produced.
    """

    exit_code = 3

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class ObjectiveFailure(ObjectiveError):
    pass


class ObjectiveProtocolError(ObjectiveError):
    pass


class TrialTimeout(ObjectiveError, TimeoutError):
    pass


class IncompleteData(OATError):
    exit_code = 4


class MissingRows(IncompleteData):
    pass


class UnknownMetric(IncompleteData, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class BudgetExceeded(OATError):
    exit_code = 5
