"""Exception hierarchy shared across the package."""


class QecspError(Exception):
    """Base class for all errors raised by this package."""


class FormulaError(QecspError):
    """Malformed formula, constraint, or assignment."""


class SchemeError(QecspError):
    """A fingerprint scheme was misused or does not fit the language."""


class ContractViolation(QecspError):
    """An internal contract guaranteed by theory was observed broken."""


class ReductionError(QecspError):
    """A transformation was applied to input outside its precondition."""


class ParseError(QecspError):
    """Syntax or semantic error in a text input, with position info."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", col {column}"
            where = f" ({where})"
        super().__init__(f"{message}{where}")
