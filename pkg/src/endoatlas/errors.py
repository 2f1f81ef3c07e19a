"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class EndoAtlasError(Exception):
    exit_code = 4


class HypothesisError(EndoAtlasError):
    """Input violates a standing hypothesis (e.g. p divides q)."""

    exit_code = 1


class PCoprimeError(HypothesisError):
    """p does not divide the group order; there is no p-local structure."""


class NoClosedFormError(HypothesisError):
    """The classification has no closed form for this input."""


class SizeCapError(EndoAtlasError):
    """An enumeration would exceed the configured element cap."""

    exit_code = 2

    def __init__(self, what, size, cap):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


class VerificationError(EndoAtlasError):
    exit_code = 3


class InconsistencyError(EndoAtlasError):
    """Two independent computations disagree, or an internal check failed."""

    exit_code = 4


class FieldMismatchError(ValueError):
    pass
