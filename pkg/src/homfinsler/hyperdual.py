"""Hyper-dual numbers ``a + b e1 + c e2 + d e1e2`` with ``e1**2 = e2**2 = 0``.

Pushing ``x + e1 + e2`` through a scalar function leaves ``f''(x)`` in the
``e1e2`` slot, exactly up to rounding.  Only the operations the metric
pipeline needs are implemented.
"""

from __future__ import annotations

import math


class HyperDual:
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: float, b: float = 0.0, c: float = 0.0, d: float = 0.0):
        self.a = float(a)
        self.b = float(b)
        self.c = float(c)
        self.d = float(d)

    def __repr__(self) -> str:
        return f"HyperDual({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    def __eq__(self, other):
        other = _coerce(other)
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    __hash__ = None

    def __neg__(self):
        return HyperDual(-self.a, -self.b, -self.c, -self.d)

    def __add__(self, other):
        other = _coerce(other)
        return HyperDual(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return HyperDual(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return HyperDual(
            self.a * other.a,
            self.a * other.b + self.b * other.a,
            self.a * other.c + self.c * other.a,
            self.a * other.d + self.b * other.c + self.c * other.b + self.d * other.a,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "HyperDual":
        if self.a == 0.0:
            raise ZeroDivisionError("hyper-dual division by a number with zero real part")
        inv = 1.0 / self.a
        return lift(self, inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        return self * _coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return _coerce(other) * self.reciprocal()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (self ** (-n)).reciprocal()
        out = HyperDual(1.0)
        for _ in range(n):
            out = out * self
        return out


def _coerce(x) -> HyperDual:
    if isinstance(x, HyperDual):
        return x
    return HyperDual(float(x))


def lift(x: HyperDual, f0: float, f1: float, f2: float) -> HyperDual:
    """Apply a scalar function given its value and first two derivatives at ``x.a``."""
    return HyperDual(f0, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c)


def real(x) -> float:
    return x.a if isinstance(x, HyperDual) else float(x)


def exp(x):
    if isinstance(x, HyperDual):
        e = math.exp(x.a)
        return lift(x, e, e, e)
    return math.exp(x)


def sqrt(x):
    if isinstance(x, HyperDual):
        if x.a <= 0.0:
            raise ValueError("hyper-dual sqrt needs a positive real part")
        r = math.sqrt(x.a)
        return lift(x, r, 0.5 / r, -0.25 / (r * x.a))
    return math.sqrt(x)
