"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class AffinityDimError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(AffinityDimError, ValueError):
    """Matrices, cones or indices have incompatible sizes."""


class DominanceUnverified(AffinityDimError):
    """No single simple real eigenvalue of maximal modulus could be certified.

    ``word`` carries the offending word (0-based letters) when the failure
    happened inside a trace computation.
    """

    def __init__(self, message: str, word: tuple[int, ...] | None = None):
        if word is not None:
            message = f"{message} (word {_format_word(word)})"
        super().__init__(message)
        self.word = word


class DegenerateProduct(DominanceUnverified):
    """The leading eigenvalue enclosure contains zero."""


class NoPositiveSignPattern(AffinityDimError):
    """No choice of signs makes the exterior powers entrywise nonnegative."""


class PrecisionInsufficient(AffinityDimError):
    """Precision escalation hit the configured cap."""


class NoRootFound(AffinityDimError):
    """The truncated determinant (or the truncated pressure equation) has no root.

    Small truncation orders commonly end here; this mirrors the rows that the
    published tables omit.
    """


class BracketFailed(NoRootFound):
    """The approximate pressure does not cross 1 inside the search interval."""


class SecantDiverged(AffinityDimError):
    """Secant iteration and its bisection safeguard both failed to converge."""


class SingularMatrix(AffinityDimError, ValueError):
    """A matrix that must be invertible has zero determinant."""


class PowerIterationStalled(AffinityDimError):
    """Power iteration reached its iteration cap without converging."""


def _format_word(word: tuple[int, ...]) -> str:
    return "(" + ",".join(str(i + 1) for i in word) + ")"
