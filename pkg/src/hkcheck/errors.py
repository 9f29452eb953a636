"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`HKError`,
so callers (the CLI in particular) can map families of failures to exit codes.
"""

import numpy as np


class HKError(Exception):
    pass


class SingularMatrix(HKError, np.linalg.LinAlgError):
    pass


class NonDiagonalizable(HKError, np.linalg.LinAlgError):
    def __init__(self, cond, cond_max):
        super().__init__(
            f"eigenvector condition {cond:.3e} exceeds {cond_max:.1e}")
        self.cond = cond


class ResolventSingular(HKError):
    def __init__(self, s):
        super().__init__(f"resolvent singular at s = {s!r}")
        self.s = s


class PreconditionError(HKError):
    """A routine was called outside its domain of validity."""


class InvalidExponent(PreconditionError):
    pass


class ExponentNotNegative(PreconditionError):
    pass


class AlphaOutOfRange(PreconditionError):
    pass


class SpectrumOnCut(PreconditionError):
    pass


class RegularizerOrderTooLow(PreconditionError):
    pass


class StructureUnknown(HKError):
    pass


class EmptySamples(HKError):
    pass
