"""Exceptions raised by ftnoise"""


class FtNoiseException(Exception):
    pass


class InputError(FtNoiseException, ValueError):
    """An argument is outside the domain of the operation"""


class ResourceError(FtNoiseException):
    """An enumeration or simulation would exceed a configured cap"""


class DivergenceError(FtNoiseException, ArithmeticError):
    """A series in the bound is undefined or diverges (e.g. 2 alpha >= 1)"""


class ConfigError(FtNoiseException):
    """A configuration file could not be parsed or violates the schema.

    Args:
      field (str): dotted path of the offending field
      message (str): what is wrong with it
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
