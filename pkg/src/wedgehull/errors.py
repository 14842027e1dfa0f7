"""Shared exception types.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific type that applies and attach enough payload for a
diagnostic message (offending variable, determinant, sample point, ...).
"""

from __future__ import annotations


class WedgehullError(Exception):
    """Base class for all package errors."""


class ProblemFormatError(WedgehullError):
    """Malformed problem/config input.  `location` names the offending field."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class VariableMismatchError(WedgehullError):
    """Polynomial operation applied across incompatible variable lists."""


class SingularMapError(WedgehullError):
    """Polynomial map with non-invertible linear part."""

    def __init__(self, message: str, determinant=None):
        self.determinant = determinant
        super().__init__(message)


class DegenerateGraphError(WedgehullError):
    """Implicit solve impossible: the solve variable has no linear term."""


class PreconditionError(WedgehullError):
    """Input rejected before any certification was attempted."""


class MaximalRealityError(PreconditionError):
    """Edge tangent space fails T_pE + J(T_pE) = whole space."""


class CertificateError(WedgehullError):
    """A certification run found a violated inequality.  Carries the sample."""

    def __init__(self, message: str, sample=None, margin=None):
        self.sample = sample
        self.margin = margin
        super().__init__(message)


class NonConvergenceError(WedgehullError):
    """Iterative solve failed; `trace` holds the iterates for diagnosis."""

    def __init__(self, message: str, trace=None):
        self.trace = trace or []
        super().__init__(message)
