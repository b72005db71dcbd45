from typing import Optional


class QGeoError(Exception):
    """Base error; ``code`` is the stable name reported by the CLI."""

    code = "QGeoError"

    def __init__(self, message: str = "", subject: Optional[str] = None):
        self.message = message
        self.subject = subject
        super().__init__(message)

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        cls.code = cls.__name__

    def __str__(self) -> str:
        text = self.message
        if self.subject is not None:
            text = f"{text} {self.subject!r}".strip()
        return f"{self.code}: {text}" if text else self.code


# ---------------- Input errors (exit 1) ----------------

class InputError(QGeoError):
    pass


class NotHermitian(InputError):
    pass


class NotAntiHermitian(InputError):
    pass


class BadDims(InputError):
    pass


class NotNormalized(InputError):
    pass


class NotDescending(InputError):
    pass


class NonPositive(InputError):
    pass


class SpectrumMismatch(InputError):
    pass


class NotGauge(InputError):
    pass


class NotTangent(InputError):
    pass


class BasepointMismatch(InputError):
    pass


class BadSpin(InputError):
    pass


class BadEnsemble(InputError):
    pass


class BadEpsilon(InputError):
    pass


class MalformedInput(InputError):
    pass


# ---------------- Verification errors (exit 2) ----------------

class VerificationError(QGeoError):
    pass


class NoConvergence(VerificationError):
    pass


class IdentityViolation(VerificationError):
    pass


class SpectrumDrift(VerificationError):
    pass


class WindowViolated(VerificationError):
    pass
