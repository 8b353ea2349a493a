"""Shared exception types.

Exit-code mapping lives in the CLI: input/format problems exit 2,
violated mathematical invariants exit 3.
"""


class RelfanError(Exception):
    pass


class SpecFormatError(RelfanError):
    """Malformed input data (JSON schema, unparsable scalars, shape mismatch)."""


class InvariantViolation(RelfanError):
    """A mathematical invariant the library relies on failed to hold."""


class PreconditionViolated(InvariantViolation):
    pass


class NotUnipotent(InvariantViolation):
    pass


class NotNilpotent(InvariantViolation):
    pass


class NotCommutative(InvariantViolation):
    pass


class NotSharp(InvariantViolation):
    pass


class NotInG(InvariantViolation):
    """Endomorphism does not preserve the weight filtration / graded pairings."""


class MixedAmbient(InvariantViolation):
    """Operands live over different frames or ambient dimensions."""


class NotInGroup(InvariantViolation):
    """Matrix is not an integral automorphism compatible with the extension."""


class NotSquareZeroPure(InvariantViolation):
    """The square-zero + type-(0,0) hypothesis needed for unit-cube fans fails."""


class MissingHodgeData(InvariantViolation):
    """Declared graded Hodge numbers are required but absent."""


class GriffithsViolated(InvariantViolation):
    pass


class NotInCompactDual(InvariantViolation):
    pass
