"""Exception types shared across the toolkit."""


class XlqgError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(XlqgError):
    """A dataset file could not be parsed in the requested format."""

    def __init__(self, message, path=None, record=None):
        self.path = path
        self.record = record
        super().__init__(message)


class CorpusValidationError(XlqgError):
    """One or more records violate the QA example invariants."""

    def __init__(self, message, bad_ids=()):
        self.bad_ids = list(bad_ids)
        super().__init__(message)


class ExemplarPoolError(XlqgError):
    """Not enough typed questions to sample the requested exemplar set."""

    def __init__(self, message, qtype=None):
        self.qtype = qtype
        super().__init__(message)


class BankKeyError(XlqgError, KeyError):
    """Requested (language, type, size, seed) combination is not in the bank."""

    def __init__(self, message, available=()):
        self.available = list(available)
        XlqgError.__init__(self, message)


class ConfigError(XlqgError):
    """Run configuration failed validation."""
