"""Exception hierarchy shared by all modules."""


class AugGarchError(Exception):
    """Base class for package errors."""


class ModelError(AugGarchError, ValueError):
    """Invalid model family, parameters or coefficient configuration."""


class DomainError(AugGarchError, ValueError):
    """A value left the admissible domain of the link function."""


class PreconditionError(AugGarchError):
    """A moment or stationarity gate refused to run an experiment.

    ``reports`` holds the condition reports that caused the refusal.
    """

    def __init__(self, message, reports=()):
        super().__init__(message)
        self.reports = list(reports)


class NoCertificateError(AugGarchError):
    """No geometric contraction certificate exists for the model."""


class ConfigError(AugGarchError, ValueError):
    """Invalid experiment configuration."""
