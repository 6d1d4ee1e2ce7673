"""Exception hierarchy.

Every error carries a stable ``code`` string; the CLI prints it verbatim and
maps the class to an exit status.
"""

from __future__ import annotations


class ThetaDoublerError(Exception):
    code = "Error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def __str__(self):
        msg = super().__str__()
        return f"[{self.code}] {msg}"


class UsageError(ThetaDoublerError):
    code = "UsageError"


class PreconditionError(ThetaDoublerError):
    code = "PreconditionError"


# ff
class NotPrime(ThetaDoublerError):
    code = "NotPrime"


class UnsupportedCharacteristic(ThetaDoublerError):
    code = "UnsupportedCharacteristic"


class DegreeTooLarge(ThetaDoublerError):
    code = "DegreeTooLarge"


class DivisionByZero(ThetaDoublerError, ZeroDivisionError):
    code = "DivisionByZero"


class ContextMismatch(ThetaDoublerError):
    code = "ContextMismatch"


# qseries
class RationalContext(ThetaDoublerError):
    code = "RationalContext"


class InsufficientPrecision(ThetaDoublerError):
    code = "InsufficientPrecision"


# characters
class FieldTooSmall(ThetaDoublerError):
    code = "FieldTooSmall"

    def __init__(self, message: str = "", min_r: int | None = None, **details):
        super().__init__(message, min_r=min_r, **details)
        self.min_r = min_r


# eisbasis
class PDividesDenominator(ThetaDoublerError):
    code = "PDividesDenominator"


class ParityMismatch(ThetaDoublerError):
    code = "ParityMismatch"


class SpanDeficient(ThetaDoublerError):
    code = "SpanDeficient"

    def __init__(self, message: str = "", achieved: int = 0, expected: int = 0, **details):
        super().__init__(message, achieved=achieved, expected=expected, **details)
        self.achieved = achieved
        self.expected = expected


class WeightOneUnsupported(ThetaDoublerError):
    code = "WeightOneUnsupported"


class CacheFormatError(ThetaDoublerError):
    code = "CacheFormatError"


# hecke
class NotInSpan(ThetaDoublerError):
    code = "NotInSpan"


class AmbiguousSolve(ThetaDoublerError):
    code = "AmbiguousSolve"


class NotAnEigenvalue(ThetaDoublerError):
    code = "NotAnEigenvalue"


class NonOrdinary(ThetaDoublerError):
    code = "NonOrdinary"


# localalg
class NonCommuting(ThetaDoublerError):
    code = "NonCommuting"


class NotSubalgebra(ThetaDoublerError):
    code = "NotSubalgebra"


# weightone
class CandidateInconclusive(ThetaDoublerError):
    code = "CandidateInconclusive"


class CountIdentityViolation(ThetaDoublerError):
    code = "CountIdentityViolation"


class EisensteinComponent(ThetaDoublerError):
    code = "EisensteinComponent"


# dihedral
class NotFundamental(ThetaDoublerError):
    code = "NotFundamental"


class UnsupportedClassNumber(ThetaDoublerError):
    code = "UnsupportedClassNumber"


class UnknownDiscriminant(ThetaDoublerError):
    code = "UnknownDiscriminant"


# primesearch
class DiscriminantDivisible(ThetaDoublerError):
    code = "DiscriminantDivisible"
