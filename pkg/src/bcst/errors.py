"""Exception types shared across the package."""


class BcstError(Exception):
    """Base class for every package-specific error."""


class CapacityExceeded(BcstError):
    """Register would exceed the 8-qubit simulation limit."""


class InvalidPermutation(BcstError):
    """Qubit permutation is not a bijection on 0..n-1."""


class NonUnitary(BcstError):
    """Gate matrix fails the unitarity check."""


class IndexOutOfRange(BcstError):
    """Qubit index outside the register, or duplicate indices."""


class DegenerateBranch(BcstError):
    """A measurement branch with probability below 1e-14 was selected."""


class NoUniqueCorrection(BcstError):
    """Correction-table derivation found zero or several candidate Paulis."""


class ConditionViolated(BcstError):
    """Channel quadruple fails psi1 != psi3 and psi2 != psi4."""


class IndeterminateControl(BcstError):
    """Pair purity is neither 1/2 nor 1; state is outside the analyzed class."""


class InvalidRatio(BcstError):
    """Conversion unitary needs 0 < b <= a."""


class EmptySample(BcstError):
    """A Monte Carlo estimate was requested with zero trials."""


class ParseError(BcstError):
    """Malformed channel-spec, basis, or table text."""
