"""Exception hierarchy shared across the package."""


class PolyhamError(Exception):
    """Base class for every error raised by polyham."""


class ExprSyntaxError(PolyhamError):
    """Malformed expression source.

    Carries the byte offset of the failure and a description of what
    was expected there.
    """

    def __init__(self, offset: int, expected: str):
        self.offset = offset
        self.expected = expected
        super().__init__(f"syntax error at offset {offset}: expected {expected}")


class UnknownIdentifier(PolyhamError):
    """A variable reference that is not among the declared coordinates."""

    def __init__(self, name: str, offset: int = -1):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r}")


class DomainError(PolyhamError):
    """Evaluation left the domain of an operation (log of a negative
    number, division by zero, ...). Carries the offending AST node."""

    def __init__(self, message: str, node=None):
        self.node = node
        super().__init__(message)


class SingularMetric(PolyhamError):
    """Metric determinant below the singularity threshold."""


class AsymmetricInput(PolyhamError):
    """A matrix that must be symmetric is not."""


class SlotMismatch(PolyhamError):
    """Tensor slots incompatible with the requested index operation."""


class ConsistencyFailure(PolyhamError):
    """Two independent computation routes disagree beyond tolerance.

    Signals a convention drift between the covariant-derivative pipeline
    and a closed-form expression."""


class ZeroEinsteinConstant(PolyhamError):
    """The Einstein constant must be nonzero to solve for stress-energy."""


class ConfigError(PolyhamError):
    """Base class for model-configuration failures."""


class ParseError(ConfigError):
    """An expression string in a config file failed to parse."""

    def __init__(self, where: str, message: str, offset: int = -1):
        self.where = where
        self.offset = offset
        super().__init__(f"{where}: {message}")


class SchemaError(ConfigError):
    """Missing, extra or mistyped keys in a config file."""


class ValidationError(ConfigError):
    """Config parsed but violates a model invariant."""
