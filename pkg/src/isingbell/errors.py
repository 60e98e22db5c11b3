"""Exception types shared across the package.

The CLI maps these onto stable exit codes: input problems (SpecError and
subclasses) exit 2, resource caps exit 3, numerical failures exit 4.
"""


class SpecError(ValueError):
    """Invalid lattice specification, role assignment, or query."""


class SpecFileError(SpecError):
    """Spec file cannot be parsed; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class CapExceededError(RuntimeError):
    """Lattice too large for the exact engine's configured cap."""


class NumericalError(RuntimeError):
    """Floating-point failure: underflow to zero weight, non-convergence."""
