"""Exception types shared across the toolkit."""


class StyleMTError(Exception):
    """Base class for all toolkit errors."""


class DataError(StyleMTError):
    """Bad or inconsistent input data (corpora, model files, alignments)."""


class FormatError(DataError):
    """A model or report file does not parse."""


class ConfigError(StyleMTError):
    """An invalid configuration value or combination."""


class DecodeError(StyleMTError):
    """The decoder cannot produce a translation for a segment."""
