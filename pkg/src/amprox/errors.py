"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function (negative, NaN, bad shape)."""


class SingularityError(DomainError):
    """A ratio operator met a vanishing denominator ``(Px)_i``."""

    def __init__(self, index, value=0.0):
        self.index = int(index)
        self.value = float(value)
        super().__init__(f"(Px)_{self.index} = {self.value!r} is too small for a ratio step")


class ConfigError(ValueError):
    """Invalid solver configuration (step size, stopping rule, family name)."""


class IterationError(RuntimeError):
    """An iteration failed; ``k`` is the index of the iterate being computed."""

    def __init__(self, k, message):
        self.k = int(k)
        super().__init__(f"iteration {self.k}: {message}")


class DescentError(IterationError):
    """The objective increased, so the step is not an auxiliary-function step."""


class OracleUnavailable(DomainError):
    """No independent oracle exists for the requested family/size."""
