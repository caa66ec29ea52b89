class PfControlError(Exception):
    pass


class InvalidSpecError(PfControlError, ValueError):
    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"invalid {field}: {message}")


class ConfigError(PfControlError, ValueError):
    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(f"{key}: {message}")


class BlowUpError(PfControlError, ArithmeticError):
    def __init__(self, solver: str, level: int) -> None:
        self.solver = solver
        self.level = level
        super().__init__(
            f"{solver} solution became non-finite at time level {level}"
            " (unstable or excessive time step?)"
        )


class DescentError(PfControlError, RuntimeError):
    def __init__(self, cause: BlowUpError, history) -> None:
        self.cause = cause
        self.history = history
        super().__init__(
            f"descent aborted after {len(history)} recorded iterations:"
            f" {cause}"
        )


class UnknownScenarioError(PfControlError, KeyError):
    def __init__(self, name: str, available: list[str]) -> None:
        self.name = name
        self.available = available
        super().__init__(
            f"unknown scenario {name!r}; available: {', '.join(available)}"
        )

    def __str__(self) -> str:
        return str(self.args[0])
