"""Extended non-negative rational arithmetic.

Values are either exact ``fractions.Fraction`` (finite, >= 0) or the sentinel
``INF``.  The conventions are the usual ones for expectation transformers:

    inf + x = x + inf = inf
    0 * inf = 0          r * inf = inf   (r != 0)
    x - y  is truncated subtraction ("monus"): the least z with x <= y + z,
           so inf - inf = 0 and inf - z = inf for finite z.

Only products of a *finite* scalar with an extended value occur; the product
of two infinities is deliberately not defined.
"""

from __future__ import annotations

from fractions import Fraction


class _Infinity:
    """Singleton for +infinity. Compares above every finite value."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "inf"

    def __eq__(self, other: object) -> bool:
        return other is self or other == float("inf")

    def __hash__(self) -> int:
        return hash(float("inf"))


INF = _Infinity()

#: anything accepted as an extended value
XR = "Fraction | _Infinity"


def is_inf(x) -> bool:
    return x is INF or isinstance(x, _Infinity)


def as_xr(x):
    """Coerce ints/Fractions to a canonical extended value."""
    if is_inf(x):
        return INF
    f = Fraction(x)
    if f < 0:
        raise ValueError(f"extended non-negative value expected, got {f}")
    return f


def xadd(a, b):
    if is_inf(a) or is_inf(b):
        return INF
    return a + b


def xmul(r, x):
    """r * x with finite non-negative scalar r."""
    if is_inf(r):
        raise ValueError("left factor of xmul must be finite")
    if r < 0:
        raise ValueError(f"scalar must be non-negative, got {r}")
    if is_inf(x):
        return Fraction(0) if r == 0 else INF
    return r * x


def xsub(a, b):
    """Monus: least z with a <= b + z (0 when a <= b)."""
    if is_inf(a):
        return Fraction(0) if is_inf(b) else INF
    if is_inf(b):
        return Fraction(0)
    return a - b if a > b else Fraction(0)


def xle(a, b) -> bool:
    if is_inf(b):
        return True
    if is_inf(a):
        return False
    return a <= b


def xmin(a, b):
    return a if xle(a, b) else b


def xmax(a, b):
    return b if xle(a, b) else a
