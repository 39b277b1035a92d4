"""Exception types shared across the package."""


class ModelError(ValueError):
    """A physically or numerically ill-posed request (CLI exit status 2)."""


class DegenerateQubitError(ModelError):
    """A qubit with zero level splitting has no finite matching period."""


class ScheduleInfeasibleError(ModelError):
    """No matched delay satisfies the requested constraints."""


class NotUnitaryError(ValueError):
    pass
