"""Exception hierarchy shared by the library and the command-line runner."""


class SamError(Exception):
    """Base class for all errors raised by samap."""


class ConfigError(SamError):
    """Invalid user input: bad parameters, unreadable files, dimension mismatch."""


class MatrixMarketError(ConfigError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class DenseCapError(ConfigError):
    """Refusal to materialise a dense array (or closure) above the configured cap."""


class NumericalError(SamError):
    """A numerical procedure could not complete."""


class SingularMatrixError(NumericalError):
    pass


class LineSearchError(NumericalError):
    pass
