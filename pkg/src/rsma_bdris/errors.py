"""Exception types raised by the simulator."""


class DimensionError(ValueError):
    """Array shapes are incompatible with the requested operation."""


class ContractViolation(ValueError):
    """An input violates a documented precondition (e.g. symmetry)."""


class DegenerateInputError(ValueError):
    """The input carries no usable information (all-zero matrix or vector)."""


class UndefinedBaselineError(ValueError):
    """A robustness index was requested against a zero safe-rate baseline."""


class ConfigError(ValueError):
    """A configuration document is malformed or violates a scenario invariant.

    ``lineno`` is the 1-based line that triggered the error, or ``None`` when
    the problem is not attributable to a single line.
    """

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        self.message = message
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


class TrialFailure(RuntimeError):
    """A Monte-Carlo trial raised; ``trial_index`` identifies it."""

    def __init__(self, trial_index, cause):
        self.trial_index = trial_index
        super().__init__(f"trial {trial_index} failed: {cause!r}")
