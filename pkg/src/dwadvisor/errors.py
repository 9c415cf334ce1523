"""Exception hierarchy shared by the advisor modules."""


class AdvisorError(Exception):
    """Base class for every error raised by dwadvisor."""


class ParseError(AdvisorError):
    """A catalog document could not be decoded."""


class ValidationError(AdvisorError):
    """A catalog or workload violates an invariant."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class SQLSyntaxError(AdvisorError):
    """A workload statement falls outside the supported SQL subset."""

    def __init__(self, statement_index, token, message="unexpected token"):
        super().__init__(f"statement {statement_index}: {message} near {token!r}")
        self.statement_index = statement_index
        self.token = token


class UnknownAttributeError(AdvisorError):
    """A workload references a table or column missing from the catalog."""


class DomainError(AdvisorError):
    """A cost formula received arguments outside its domain."""


class InapplicablePlan(AdvisorError):
    """An access plan cannot serve the query it was asked to price."""


class CapExceeded(AdvisorError):
    """A brute-force oracle was called on an instance above its size cap."""
