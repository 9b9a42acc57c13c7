"""Exception hierarchy shared by all speclab modules."""


class SpeclabError(Exception):
    """Base class for all speclab errors."""


class ContractError(SpeclabError):
    """An argument violates a documented precondition (shape, domain, range)."""


class DegenerateInputError(SpeclabError):
    """Numerically rank-deficient input where a generic full-rank matrix is required."""


class NumericalFailureError(SpeclabError):
    """A numerical routine failed to converge or produced an inconsistent result."""


class SizeGuardError(ContractError):
    """Input exceeds the size limit of an intentionally small exact algorithm."""
