"""Exception hierarchy shared across the pipeline."""


class HynerError(Exception):
    """Base class for all errors raised by this package."""


class InputDataError(HynerError):
    """Bad input supplied by the user (malformed dump, corpus, config...)."""


class DumpFormatError(InputDataError):
    """A dump stream could not be parsed."""


class InvariantError(HynerError):
    """An internal invariant was violated; indicates a pipeline bug."""
