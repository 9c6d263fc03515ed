"""Exception taxonomy shared by the library, the service layer, and the CLI.

The split matters downstream: the service maps these onto HTTP statuses and
the CLI maps those onto exit codes, so raising the right class here is part
of the public contract.
"""

from __future__ import annotations


class ParameterError(ValueError):
    """A caller-supplied value is outside its documented domain."""


class ShapeError(ParameterError):
    """Array dimensions disagree with each other or with the domain."""


class MomentError(ParameterError):
    """A requested population moment does not exist for the model."""


class UnsupportedModelError(ParameterError):
    """An analytic oracle was asked about a model it cannot describe."""


class ParseError(ValueError):
    """A data file could not be parsed; carries the offending location."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where = f"{where}line {line}: "
        super().__init__(f"{where}{message}")


class CapacityError(RuntimeError):
    """A net would exceed the configured cardinality cap.

    ``required_cap`` is the cap that would admit the requested net and
    ``suggested_zeta`` is a coarser radius that fits under the current cap.
    """

    def __init__(self, message: str, required_cap: int, suggested_zeta: float):
        self.required_cap = required_cap
        self.suggested_zeta = suggested_zeta
        super().__init__(message)
