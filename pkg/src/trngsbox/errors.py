"""Exception hierarchy shared by all modules.

Each error carries the process exit code the CLI uses when it escapes a
subcommand.
"""


class TrngSboxError(Exception):
    exit_code = 1


class MalformedLine(TrngSboxError, ValueError):
    exit_code = 4

    def __init__(self, line_no: int, reason: str, text: str = ""):
        self.line_no = line_no
        self.reason = reason
        self.text = text
        super().__init__(f"line {line_no}: {reason}")


class InsufficientRecords(TrngSboxError, ValueError):
    exit_code = 5


class InsufficientBits(TrngSboxError, ValueError):
    exit_code = 6


class UnknownTest(TrngSboxError, KeyError):
    exit_code = 2

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown test"


class SBoxError(TrngSboxError, ValueError):
    exit_code = 7


class WrongLength(SBoxError):
    pass


class NotBijective(SBoxError):
    def __init__(self, value: int, first: int, second: int):
        self.value = value
        self.first = first
        self.second = second
        super().__init__(
            f"value {value} appears at index {first} and again at index {second}"
        )


class ParseError(SBoxError):
    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        self.row = row
        self.col = col
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {col})" if col is not None else ")")
        super().__init__(message + where)


class WalkError(TrngSboxError, RuntimeError):
    exit_code = 6


class ExhaustedDirections(WalkError):
    pass


class StepBudgetExceeded(WalkError):
    pass


class InvalidTotal(TrngSboxError, ValueError):
    exit_code = 2


class EmptyAfterFilter(TrngSboxError, ValueError):
    exit_code = 8


class LengthMismatch(TrngSboxError, ValueError):
    exit_code = 9


class DimensionMismatch(TrngSboxError, ValueError):
    exit_code = 9
