"""Error types shared across the package."""


class LfpcertError(Exception):
    """Base class for all package-specific failures."""


class NonPolynomialTerm(LfpcertError):
    """A coefficient or call argument is not a polynomial."""


class NonLinearGuard(LfpcertError):
    """A guard atom is not linear in the state variables."""


class NonLinearPullback(LfpcertError):
    """A witness guard composed with a call argument became nonlinear."""


class MissingAssignment(LfpcertError):
    """A called predicate has no value and no default during evaluation."""


class ScoreNotAllowed(LfpcertError):
    """score/observe occurred outside the conditional-wp translation."""


class NotOneBounded(LfpcertError):
    """The equation system is not 1-bounded where it must be."""


class PolicyRequired(LfpcertError):
    """A grid call left the truncation window and no policy was set."""


class NotPrefixed(LfpcertError):
    """The supplied u fails the prefixed-point check on the grid."""


class CertificateFormatError(LfpcertError):
    """A certificate file or object violates its schema."""


class DivergentNormalization(LfpcertError):
    """The verified upper bound on the lost conditioning mass reaches 1, so
    the conditional value l1/(1-l2) has no finite guarantee."""


class InputError(LfpcertError):
    """Malformed input file or flags (CLI exit code 2)."""
