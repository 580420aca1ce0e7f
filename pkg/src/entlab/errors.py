"""Exception types shared across the package."""


class EntlabError(Exception):
    """Base class for all package errors."""


class ContractViolation(EntlabError, ValueError):
    """An input broke an operation's precondition."""


class NumericalFailure(EntlabError, ArithmeticError):
    """A numerical routine failed or produced an out-of-tolerance result."""


class PatternViolation(ContractViolation):
    """A matrix does not have the sparsity pattern a closed form requires."""


class CutoffInsufficient(NumericalFailure):
    """A truncated Fock space leaked too much population into its top level."""
