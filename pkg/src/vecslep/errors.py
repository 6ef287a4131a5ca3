"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a special function or operation."""


class PoleSingularityError(DomainError):
    """Tangential harmonic with |m| = 1 requested exactly at a pole."""


class ResolutionError(ValueError):
    """Quadrature rule too coarse for the requested bandlimit."""


class ContractViolation(ArithmeticError):
    """A numerical post-condition (eigenvalue range, symmetry, ...) failed."""


class FormatError(ValueError):
    """Malformed input file; message carries the offending line number."""

    def __init__(self, message, path=None, lineno=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.lineno = lineno
