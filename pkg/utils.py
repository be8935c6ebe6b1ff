"""
Shared Numerical Utilities
==========================
Helpers used by every numerical module of the lab: logging setup, the
exception hierarchy mapped onto CLI exit codes, the check-mode switch for
run-time inequality assertions, Q0.64 fixed-point torus arithmetic and
compensated averaging.

Features:
- One logger per module with a single stderr handler
- Exceptions carrying exit codes and guard witnesses
- Exact wrapping uint64 phases (x mod 1 stored as round(x * 2^64))
- Correctly rounded complex means via math.fsum
- Log-log least squares fits
"""

import math
import os
import logging
import contextlib
from fractions import Fraction
from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np
from scipy import stats


TWO64 = 1 << 64
MASK64 = TWO64 - 1
Q64_SCALE = 2.0 ** -64

# Per-term error of e(phi) from a uint64 phase: phase rounding plus cos/sin.
TERM_ERROR = 2 * math.pi * 2.0 ** -53 + 2.0 ** -52
# fsum is correctly rounded, so the mean adds one more rounding.
MEAN_ERROR = TERM_ERROR + 2.0 ** -53

FSUM_CHUNK = 1 << 18


LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

_OWN_HANDLERS: Dict[str, logging.Handler] = {}
_ROUTED = [False]


def setup_logger(name: str) -> logging.Logger:
    """Setup a module logger writing to stderr."""
    logger = logging.getLogger(name)

    if not _ROUTED[0] and name not in _OWN_HANDLERS:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.setLevel(logging.INFO)
        logger.propagate = False
        _OWN_HANDLERS[name] = handler

    return logger


def route_logging_to_root(level: int) -> None:
    """Drop module handlers so records propagate to the root configuration."""
    _ROUTED[0] = True
    for name, handler in _OWN_HANDLERS.items():
        logger = logging.getLogger(name)
        logger.removeHandler(handler)
        logger.propagate = True
        logger.setLevel(level)


class WWLabError(Exception):
    """Base class for errors surfaced by the lab."""

    exit_code = 1


class ConfigError(WWLabError):
    """Invalid configuration or parameter map."""

    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class BudgetExceededError(WWLabError):
    """A numeric budget guard refused the requested computation."""

    exit_code = 3

    def __init__(self, guard: str, message: str, minimal: Optional[float] = None):
        super().__init__(f"[{guard}] {message}")
        self.guard = guard
        self.minimal = minimal


class PropertyViolation(WWLabError):
    """A checked inequality or property failed."""

    exit_code = 4

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = witness or {}


class QuadratureError(PropertyViolation):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message, {'achieved_tolerance': achieved})
        self.achieved = achieved


_CHECK_MODE = [os.environ.get('WWLAB_CHECK', '') not in ('', '0')]


def is_check_mode() -> bool:
    """Return True when run-time inequality assertions are enabled."""
    return _CHECK_MODE[-1]


@contextlib.contextmanager
def check_mode(enabled: bool = True) -> Iterator[None]:
    """Enable (or disable) check-mode assertions inside a block."""
    _CHECK_MODE.append(enabled)
    try:
        yield
    finally:
        _CHECK_MODE.pop()


def require(condition: bool, message: str, **witness: Any) -> None:
    """Raise PropertyViolation with a witness when check mode is on and condition fails."""
    if is_check_mode() and not condition:
        raise PropertyViolation(message, witness)


def to_q64(x: Any) -> int:
    """
    Convert a real (float, int or Fraction) to its Q0.64 representative of x mod 1.

    Args:
        x: Real number; floats are taken at their exact binary value

    Returns:
        Integer in [0, 2^64)
    """
    fr = Fraction(x)
    return round(fr * TWO64) % TWO64


def q64_to_unit(phases: np.ndarray) -> np.ndarray:
    """Map uint64 fixed-point phases to e(phase) as complex128."""
    theta = phases.astype(np.float64) * (2.0 * math.pi * Q64_SCALE)
    return np.cos(theta) + 1j * np.sin(theta)


def e(t: Any) -> complex:
    """The unit exponential e(t) = exp(2 pi i t), reduced mod 1 first."""
    frac = float(Fraction(t) % 1) if isinstance(t, (int, Fraction)) else math.fmod(t, 1.0)
    return complex(math.cos(2 * math.pi * frac), math.sin(2 * math.pi * frac))


def uint64_scalar(value: int) -> np.uint64:
    """Wrap a Python integer (possibly negative) into a numpy uint64."""
    return np.uint64(value % TWO64)


def compensated_sum(values: np.ndarray) -> complex:
    """Correctly rounded sum of a complex array (fsum over chunks, then over partials)."""
    re_parts = []
    im_parts = []
    for start in range(0, len(values), FSUM_CHUNK):
        chunk = values[start:start + FSUM_CHUNK]
        re_parts.append(math.fsum(chunk.real.tolist()))
        im_parts.append(math.fsum(chunk.imag.tolist()))
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def compensated_mean(values: np.ndarray) -> complex:
    """Correctly rounded mean of a complex array."""
    if len(values) == 0:
        raise ValueError("mean of an empty sequence")
    return compensated_sum(values) / len(values)


def loglog_fit(x: Any, y: Any) -> Tuple[float, float, float]:
    """
    Least-squares fit of log y against log x.

    Args:
        x: Positive abscissae
        y: Positive ordinates

    Returns:
        Tuple of (slope, intercept, rms residual); degenerate inputs give (0, log y, 0)
    """
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    if len(lx) < 2 or np.ptp(lx) == 0.0:
        return 0.0, float(ly[0]) if len(ly) else 0.0, 0.0
    if np.ptp(ly) == 0.0:
        return 0.0, float(ly[0]), 0.0
    fit = stats.linregress(lx, ly)
    residual = ly - (fit.intercept + fit.slope * lx)
    return float(fit.slope), float(fit.intercept), float(np.sqrt(np.mean(residual ** 2)))


def format_rational(value: Fraction) -> str:
    """Serialize an exact rational as "num/den"."""
    return f"{value.numerator}/{value.denominator}"


def next_power_of_two(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    return 1 << max(0, (int(n) - 1).bit_length())


def lacunary_set(rho: float, n_max: int) -> list:
    """
    The lacunary index set I_rho = {floor(rho^k)} up to n_max, deduplicated ascending.

    Args:
        rho: Lacunary constant, rho > 1
        n_max: Largest admissible index

    Returns:
        Sorted list of distinct integers in [1, n_max]
    """
    if rho <= 1:
        raise ValueError(f"lacunary constant must exceed 1, got {rho}")
    values = []
    k = 0
    while True:
        n = math.floor(rho ** k)
        if n > n_max:
            break
        if not values or n != values[-1]:
            values.append(n)
        k += 1
    return values


NAMED_CONSTANTS = {
    'golden': (math.sqrt(5.0) - 1.0) / 2.0,
    'sqrt2-1': math.sqrt(2.0) - 1.0,
    'sqrt3-1/2': (math.sqrt(3.0) - 1.0) / 2.0,
    'pi': math.pi,
}


def parse_real(text: Any) -> Any:
    """
    Parse a real-number literal: a float, "p/q" (kept exact) or a named constant.

    Args:
        text: Literal such as "0.25", "1/2", "golden", "sqrt2-1"

    Returns:
        Fraction for "p/q" literals, float otherwise
    """
    if isinstance(text, (int, float, Fraction)):
        return text
    raw = str(text).strip().lower()
    if raw in NAMED_CONSTANTS:
        return NAMED_CONSTANTS[raw]
    if '/' in raw:
        num, _, den = raw.partition('/')
        try:
            return Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"invalid rational literal: {text!r}") from None
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"invalid real literal: {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"non-finite literal: {text!r}")
    return value
