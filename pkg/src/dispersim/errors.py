"""Exception hierarchy shared across the package."""


class DispersimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DispersimError):
    """Invalid or inconsistent scenario configuration."""


class InvalidMaterialError(DispersimError):
    """Material constants violate physical bounds (e.g. Poisson ratio)."""


class IllConditionedElementError(DispersimError):
    """Spectral element shape-function matrix is numerically singular.

    Usually means the element is too long for the requested frequency.
    """


class NoPropagationError(DispersimError):
    """Requested wave mode is evanescent over the whole frequency grid."""


class IllConditionedFitError(DispersimError):
    """Least-squares system of a vector-fitting step is rank deficient."""

    def __init__(self, message, band=None):
        super().__init__(message)
        self.band = band


class UnstableModelError(DispersimError):
    """Fitted model has right-half-plane poles after finalization."""

    def __init__(self, message, poles=()):
        super().__init__(message)
        self.poles = list(poles)


class AliasingError(DispersimError):
    """Tone-burst sample rate too low for its center frequency."""


class PaddingError(DispersimError):
    """FFT wraparound detected in a transient simulation.

    ``suggested_duration`` is a record length expected to be long enough.
    """

    def __init__(self, message, suggested_duration=None):
        super().__init__(message)
        self.suggested_duration = suggested_duration


class NoArrivalError(DispersimError):
    """No envelope peak above threshold in a simulated response channel."""


class UnreliablePairError(DispersimError):
    """Sensor-pair spectra too inconsistent for a wavenumber estimate."""


class BranchAmbiguityError(DispersimError):
    """2-pi wavenumber branch cannot be resolved for a sensor pair."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
