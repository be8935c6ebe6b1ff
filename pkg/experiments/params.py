"""
Parameter schemas shared by the experiment handlers.

Every experiment declares a pydantic model derived from ExperimentParams.
Unknown keys are rejected, and literal strings from flags or config files
are parsed by the annotated types below:

    Real      "0.25", "1/2" (exact), "golden", "sqrt2-1", "sqrt3-1/2", "pi"
    Count     "4096", "2^14", "1e6"
    CountList "1e2..1e6" (decades), "2^6..2^12" (powers of two), "64,128,256"
    Skeleton  "n^2", "2n^3+n", "1,0"
    System    "rotation:golden", "skew:0.5", "doubling"
    Expression Hardy expressions, see hardy_weights
"""

import math
import re
from typing import Annotated, Any, List, Tuple

from pydantic import AfterValidator, BaseModel, BeforeValidator, ConfigDict

from dynamics import SystemSpec
from hardy_weights import parse_expr
from phase_sums import parse_skeleton
from utils import parse_real


_POWER = re.compile(r"^(\d+)\^(\d+)$")


def parse_count(value: Any) -> int:
    """Parse a positive integer literal ("4096", "2^14", "1e6")."""
    if isinstance(value, bool):
        raise ValueError("expected an integer, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value != int(value):
            raise ValueError(f"expected an integer, got {value}")
        return int(value)
    raw = str(value).strip()
    match = _POWER.match(raw)
    if match:
        return int(match.group(1)) ** int(match.group(2))
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        number = float(raw)
    except ValueError:
        raise ValueError(f"invalid integer literal: {value!r}") from None
    if not math.isfinite(number) or number != int(number):
        raise ValueError(f"invalid integer literal: {value!r}")
    return int(number)


def parse_count_list(value: Any) -> List[int]:
    """
    Parse an index list.

    "a..b" steps by powers of ten when both ends are written in e-notation
    or as powers of 10, by powers of two otherwise; the endpoints must lie
    on the progression.
    """
    if isinstance(value, (list, tuple)):
        return [parse_count(v) for v in value]
    if isinstance(value, int) and not isinstance(value, bool):
        return [value]
    raw = str(value).strip()
    if '..' in raw:
        lo_text, _, hi_text = raw.partition('..')
        lo, hi = parse_count(lo_text), parse_count(hi_text)
        if lo < 1 or hi < lo:
            raise ValueError(f"invalid range {value!r}")
        decades = all('e' in t.lower() or t.strip().startswith('10^') for t in (lo_text, hi_text))
        base = 10 if decades else 2
        values = []
        n = lo
        while n <= hi:
            values.append(n)
            n *= base
        if values[-1] != hi:
            raise ValueError(f"range {value!r} endpoints are not on a base-{base} progression")
        return values
    return [parse_count(part) for part in raw.split(',') if part.strip()]


def parse_system(value: Any) -> SystemSpec:
    if isinstance(value, SystemSpec):
        return value
    return SystemSpec.parse(str(value))


def parse_skeleton_literal(value: Any) -> Tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        return parse_skeleton(','.join(str(int(v)) for v in value))
    return parse_skeleton(str(value))


def check_expression(value: str) -> str:
    parse_expr(value)
    return value


def parse_digits(value: Any) -> Tuple[int, ...]:
    """Digit sets such as "1,2" or [1, 2]."""
    items = value if isinstance(value, (list, tuple)) else str(value).split(',')
    digits = tuple(sorted({int(str(d).strip()) for d in items}))
    if not digits or digits[0] < 1:
        raise ValueError("digits must be integers >= 1")
    return digits


Real = Annotated[Any, BeforeValidator(parse_real)]
Count = Annotated[int, BeforeValidator(parse_count)]
CountList = Annotated[List[int], BeforeValidator(parse_count_list)]
Skeleton = Annotated[Tuple[int, ...], BeforeValidator(parse_skeleton_literal)]
System = Annotated[SystemSpec, BeforeValidator(parse_system)]
Digits = Annotated[Tuple[int, ...], BeforeValidator(parse_digits)]
Expression = Annotated[str, AfterValidator(check_expression)]


class ExperimentParams(BaseModel):
    """Base schema: unknown keys are errors, values are frozen after validation."""
    model_config = ConfigDict(extra='forbid', frozen=True, validate_default=True,
                              arbitrary_types_allowed=True)

    def provenance(self) -> dict:
        """The resolved parameters as plain data."""
        data = {}
        for name, value in self:
            if isinstance(value, SystemSpec):
                value = value.model_dump()
            data[name] = value
        return data
