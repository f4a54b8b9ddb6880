import math
from collections.abc import Callable, Collection
from typing import Any

type ValueValidator = Callable[[Any], bool]


def is_integer(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def is_number(value: Any) -> bool:
    if isinstance(value, bool):
        return False
    return isinstance(value, int | float) and math.isfinite(value)


def is_bool(value: Any) -> bool:
    return isinstance(value, bool)


def is_positive_integer(value: Any) -> bool:
    return is_integer(value) and value > 0


def is_non_negative_integer(value: Any) -> bool:
    return is_integer(value) and value >= 0


def is_non_negative(value: Any) -> bool:
    return is_number(value) and value >= 0


def is_positive(value: Any) -> bool:
    return is_number(value) and value > 0


def is_open_unit(value: Any) -> bool:
    return is_number(value) and 0 < value < 1


def is_fraction(value: Any) -> bool:
    """Half-open [0, 1): a share of items that leaves at least something behind."""
    return is_number(value) and 0 <= value < 1


def is_optional(validator: ValueValidator) -> ValueValidator:
    def check(value: Any) -> bool:
        return value is None or validator(value)

    return check


def is_one_of(options: Collection[Any]) -> ValueValidator:
    def check(value: Any) -> bool:
        return value in options

    return check


def is_between(low: float, high: float) -> ValueValidator:
    def check(value: Any) -> bool:
        return is_number(value) and low <= value <= high

    return check
