"""Exception hierarchy shared by every module."""


class DiskSpecError(Exception):
    """Base class for all errors raised by diskspec."""


class DomainError(DiskSpecError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RefinementError(DiskSpecError, ArithmeticError):
    """Root refinement failed; usually means J1 evaluation is broken."""


class EmptyTableError(DomainError):
    pass


class RangeError(DomainError):
    """A distance exceeds the range covered by a zero table."""


class DegenerateInputError(DomainError):
    pass


class ClassificationDomainError(DomainError):
    pass


class NotCertifiedError(DomainError):
    """An operation that needs an orthogonal configuration got an uncertified one."""


class SchemaError(DiskSpecError):
    pass


class VersionMismatchError(SchemaError):
    pass
