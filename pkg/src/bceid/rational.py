"""Exact rational parsing, formatting and conversion helpers.

Public values are :class:`fractions.Fraction`.  Hot inner loops (the simplex
tableau, vertex enumeration) run on ``gmpy2.mpq`` when it is importable and
fall back to ``Fraction`` otherwise; both are exact.
"""

from __future__ import annotations

import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Iterable, Sequence

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _mpq

    def fast(x: Any) -> Any:
        """Convert an exact number to the fast internal rational type."""
        if isinstance(x, Fraction):
            return _mpq(x.numerator, x.denominator)
        return _mpq(x)

    FAST_ZERO = _mpq(0)
    FAST_ONE = _mpq(1)
except ImportError:  # pragma: no cover
    def fast(x: Any) -> Any:
        return Fraction(x)

    FAST_ZERO = Fraction(0)
    FAST_ONE = Fraction(1)

Rational = Fraction

#: Sentinel for the supremum over an empty set.
NEG_INF = -math.inf

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*([+-]?\d+)\s*$")
_INT_RE = re.compile(r"^\s*[+-]?\d+\s*$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")


class RationalParseError(ValueError):
    """Raised for malformed rational literals."""


def parse_rational(value: Any) -> Fraction:
    """Parse an integer, a ``"p/q"`` string or a finite decimal exactly.

    Decimal strings are converted digit for digit, so ``"0.1"`` is ``1/10``.
    Booleans and binary floats are rejected unless the float came from a JSON
    number, in which case callers should pass the original text.
    """
    if isinstance(value, bool):
        raise RationalParseError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise RationalParseError(f"non-finite number: {value!r}")
        # repr() gives the shortest decimal that round-trips, which is what
        # the author of the document typed.
        return Fraction(Decimal(repr(value)))
    if not isinstance(value, str):
        try:
            return Fraction(int(value.numerator), int(value.denominator))
        except AttributeError:
            raise RationalParseError(f"not a rational: {value!r}") from None
    m = _RATIONAL_RE.match(value)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if den <= 0:
            raise RationalParseError(f"nonpositive denominator in {value!r}")
        return Fraction(num, den)
    if _INT_RE.match(value):
        return Fraction(int(value))
    if _DECIMAL_RE.match(value):
        return Fraction(Decimal(value.strip()))
    raise RationalParseError(f"malformed rational: {value!r}")


def to_fraction(x: Any) -> Fraction:
    """Convert an exact internal number (int, Fraction, mpq) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(int(x.numerator), int(x.denominator))


def fractions(xs: Iterable[Any]) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in xs)


def fmt(x: Any) -> str:
    """Canonical string form: ``"n"`` for integers, ``"p/q"`` otherwise."""
    if x == NEG_INF:
        return "-inf"
    return str(to_fraction(x))


def fmt_decimal(x: Any, digits: int = 12) -> str:
    """Approximate decimal rendering with ``digits`` significant digits."""
    if x == NEG_INF:
        return "-inf"
    f = to_fraction(x)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(f.numerator) / Decimal(f.denominator)
    return format(d, f".{digits}g")


def dot(a: Sequence[Any], b: Sequence[Any]) -> Any:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def primitive(v: Sequence[Any]) -> tuple[int, ...]:
    """Scale a rational vector by a positive factor to a primitive integer vector."""
    fs = [to_fraction(x) for x in v]
    lcm = 1
    for f in fs:
        lcm = lcm * f.denominator // math.gcd(lcm, f.denominator)
    ints = [int(f * lcm) for f in fs]
    g = 0
    for i in ints:
        g = math.gcd(g, i)
    if g == 0:
        return tuple(ints)
    return tuple(i // g for i in ints)


def normalize_direction(p: Sequence[Any]) -> tuple[int, ...]:
    """Canonical representative of ``{αp + c𝟙 : α > 0, c ∈ ℚ}``.

    Translates so the minimum coordinate is zero and scales to a primitive
    integer vector.  Constant vectors map to the zero vector.
    """
    fs = [to_fraction(x) for x in p]
    lo = min(fs)
    return primitive([f - lo for f in fs])


def canonical_halfspace(p: Sequence[Any], height: Any, anchor: int = 0) -> tuple[tuple[int, ...], Fraction]:
    """Canonical form of the inequality ``p·μ ≤ height`` on the simplex.

    On the simplex ``(p, h)`` and ``(αp + c𝟙, αh + c)`` describe the same
    halfspace for ``α > 0``.  The form shifts so ``p[anchor] = 0`` and
    scales the result to a primitive integer vector.
    """
    fs = [to_fraction(x) for x in p]
    h = to_fraction(height)
    c = fs[anchor]
    shifted = [f - c for f in fs]
    h = h - c
    prim = primitive(shifted)
    nz = next((i for i, x in enumerate(shifted) if x != 0), None)
    if nz is None:
        return prim, (Fraction(0) if h >= 0 else Fraction(-1))
    scale = Fraction(prim[nz]) / shifted[nz]
    return prim, h * scale
