"""Exception types shared across the toolkit."""


class FormatError(ValueError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class LatticeError(ValueError):
    pass


class NestedAlternativeError(ValueError):
    pass
