from typing import Any

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class LexAlignError(Exception):
    exit_code: int = 1


class ConfigError(LexAlignError, ValueError):
    exit_code = EXIT_CONFIG


class DataError(LexAlignError):
    exit_code = EXIT_DATA


class VecFormatError(DataError):
    pass


class VecRowError(DataError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyTableError(DataError):
    pass


class DictionaryLineError(DataError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class PersistenceError(DataError):
    pass


class NumericError(LexAlignError, ArithmeticError):
    exit_code = EXIT_NUMERIC


class DegenerateVectorError(NumericError):
    def __init__(self, message: str, word: str | None = None):
        super().__init__(message if word is None else f"{message} (word {word!r})")
        self.word = word


class NonFiniteLossError(NumericError):
    def __init__(self, message: str, dump: dict[str, Any]):
        super().__init__(message)
        self.dump = dump
