"""Exception types shared across the package."""


class ActuplaceError(Exception):
    """Base class for all package-specific errors."""


class InvalidPositionError(ActuplaceError, IndexError):
    """An actuator position index is outside the candidate range."""


class InfeasibleForceError(ActuplaceError, ValueError):
    """A force value violates its box bound."""


class DegenerateInputError(ActuplaceError, ValueError):
    """An input (e.g. an empty gap vector) has no meaningful result."""


class DuplicateSelectionError(ActuplaceError, ValueError):
    """A candidate position was offered twice to the same selection."""


class InvalidBudgetError(ActuplaceError, ValueError):
    """A selection budget is outside [1, m]."""


class TooLargeError(ActuplaceError, ValueError):
    """A combinatorial enumeration would exceed its safety guard."""


class InvalidActionError(ActuplaceError, ValueError):
    """An environment action is masked or out of range."""


class NoActionAvailableError(ActuplaceError, ValueError):
    """Every action is masked; no selection is possible."""


class EpisodeFinishedError(ActuplaceError, RuntimeError):
    """step() was called on an environment whose episode already ended."""


class NumericalFailureError(ActuplaceError, ArithmeticError):
    """The LP solver exceeded its iteration cap or lost feasibility."""


class DatasetFormatError(ActuplaceError, ValueError):
    """A dataset file is malformed or internally inconsistent."""


class ConfigError(ActuplaceError, ValueError):
    """A configuration value violates its owning type's invariants."""


class TrainingDivergedError(ActuplaceError, ArithmeticError):
    """A non-finite loss or gradient appeared during training."""

    def __init__(self, message, last_params=None):
        super().__init__(message)
        self.last_params = last_params
