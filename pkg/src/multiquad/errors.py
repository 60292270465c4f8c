"""Exception hierarchy.

Input problems derive from :class:`InputError`, failed internal consistency
checks from :class:`VerificationError`.  The CLI maps the two families to
exit codes 1 and 2.
"""


class MultiquadError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MultiquadError):
    pass


class VerificationError(MultiquadError):
    pass


class ConfigError(InputError):
    pass


class OutOfTable(InputError):
    pass


class UnknownFormula(InputError):
    pass


class NotNormal(InputError):
    """The multi-index is not normal: the moment matrix is rank deficient."""

    def __init__(self, n, rank=None):
        self.n = n
        self.rank = rank
        msg = f"multi-index of size n={n} is not normal"
        if rank is not None:
            msg += f" (moment matrix rank {rank} < {n})"
        super().__init__(msg)


class SingularSystem(VerificationError):
    pass


class SingularTriangular(InputError):
    pass


class ZeroPivot(VerificationError):
    pass


class FormulaMismatch(VerificationError):
    pass


class ResidualTooLarge(VerificationError):
    pass


class NoValidIndex(VerificationError):
    pass


class QRNoConvergence(VerificationError):
    pass


class NonSimpleZeros(VerificationError):
    pass


class DuplicateNodes(VerificationError):
    pass


class DegenerateInnerProduct(VerificationError):
    pass


class WeightMismatch(VerificationError):
    pass


class ComplexNodes(VerificationError):
    pass
