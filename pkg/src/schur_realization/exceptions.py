"""
Exceptions

Every failure raised by the library derives from RealizationError so the CLI
can turn domain errors into failed checks instead of crashes.
"""

from __future__ import annotations

from collections.abc import Sequence


class RealizationError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, *, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NonFiniteEntries(RealizationError):
    """A matrix contains NaN or Inf."""


class NotHermitian(RealizationError):
    """A matrix expected to be Hermitian is not, within eq_tol."""


class NotPSD(RealizationError):
    """A Hermitian matrix has an eigenvalue below -psd_tol."""


class NormExceedsOne(RealizationError):
    """An operator expected to be a contraction has norm above 1 + eq_tol."""


class DimensionMismatch(RealizationError):
    """Block dimensions are inconsistent."""

    def __init__(self, message: str, *, blocks: Sequence[str] = ()):
        super().__init__(message)
        self.blocks = tuple(blocks)


class OutsideBall(RealizationError):
    """A point does not lie in the (closed) unit ball."""


class SingularResolvent(RealizationError):
    """I - Z(lambda)A is numerically singular."""


class SingularDenominator(RealizationError):
    """1 - <lambda, zeta> vanishes."""


class NotContractive(RealizationError):
    """A colligation is not a contraction."""


class NotContractivePair(RealizationError):
    """An output pair is not contractive."""


class DuplicatePoints(RealizationError):
    """A sample contains repeated points."""


class RankInstability(RealizationError):
    """Two rank computations that must agree do not."""

    def __init__(self, message: str, *, expected: int, actual: int):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class LeastSquaresInconsistent(RealizationError):
    """Generator equations cannot be met: the two kernels differ."""


class NecessaryConditionsFail(RealizationError):
    """The contractive completion problem is infeasible."""


class ParameterShapeMismatch(RealizationError):
    """A completion parameter or isometry has the wrong shape."""


class KernelMismatch(RealizationError):
    """K_S and K_{C,A} differ on the sample."""


class DimUTooSmall(RealizationError):
    """The input space is too small for the requested construction."""

    def __init__(self, message: str, *, expected: int, actual: int):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class DegenerateGram(RealizationError):
    """A sampled Gram matrix has no usable range."""


class ConfigError(RealizationError):
    """Invalid configuration value."""


class ParseError(RealizationError):
    """An input file could not be parsed."""

    def __init__(self, message: str, *, path: str, line: int | None = None):
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {message}")
        self.path = path
        self.line = line
