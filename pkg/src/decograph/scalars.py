"""Exact scalar arithmetic: rationals and truncated hbar-series.

Every coefficient in the engine is either a ``fractions.Fraction`` or an
:class:`HbarSeries` (a polynomial in the formal parameter hbar truncated at a
fixed order, with Fraction coefficients).  No floating point anywhere.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_scalar(text: str) -> Fraction:
    """Parse "p/q" or "p" into an exact rational."""
    return Fraction(text.strip())


def format_scalar(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def inv(value: Fraction) -> Fraction:
    if value == 0:
        raise ZeroDivisionError("inverse of zero")
    return 1 / value


class HbarSeries:
    """Truncated polynomial sum_{k=0}^{T} c_k hbar^k with exact coefficients.

    Operations truncate consistently at the order of the result; mixing two
    series re-truncates to the smaller order.  Fractions and ints mix freely
    (they are treated as order-preserving constants).
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Iterable[Union[Fraction, int, str]], order: int | None = None):
        cs = [Fraction(c) for c in coeffs]
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise ValueError("truncation order must be >= 0")
        cs = cs[: order + 1]
        cs += [ZERO] * (order + 1 - len(cs))
        self.coeffs = tuple(cs)
        self.order = order

    @classmethod
    def constant(cls, value, order: int) -> "HbarSeries":
        return cls([Fraction(value)], order)

    @classmethod
    def hbar(cls, order: int) -> "HbarSeries":
        return cls([ZERO, ONE], order)

    def truncate(self, order: int) -> "HbarSeries":
        return HbarSeries(self.coeffs[: order + 1], order)

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if k <= self.order else ZERO

    def at_hbar_zero(self) -> Fraction:
        return self.coeffs[0]

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, HbarSeries):
            m = max(self.order, other.order)
            return all(self.coefficient(k) == other.coefficient(k) for k in range(m + 1))
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        return NotImplemented

    def __hash__(self):
        return hash((self.coeffs, self.order))

    def _coerce(self, other) -> "HbarSeries | None":
        if isinstance(other, HbarSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return HbarSeries.constant(other, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        return HbarSeries([self.coeffs[k] + o.coeffs[k] for k in range(order + 1)], order)

    __radd__ = __add__

    def __neg__(self):
        return HbarSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        out = [ZERO] * (order + 1)
        for i, a in enumerate(self.coeffs):
            if i > order or a == 0:
                continue
            for j in range(order + 1 - i):
                b = o.coeffs[j] if j <= o.order else ZERO
                if b:
                    out[i + j] += a * b
        return HbarSeries(out, order)

    __rmul__ = __mul__

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(format_scalar(c))
            else:
                h = "h" if k == 1 else f"h^{k}"
                terms.append(h if c == 1 else f"{format_scalar(c)}*{h}")
        body = " + ".join(terms) if terms else "0"
        return f"HbarSeries({body}; T={self.order})"

    def to_json(self):
        return {"order": self.order, "coefficients": [format_scalar(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data) -> "HbarSeries":
        return cls([parse_scalar(c) for c in data["coefficients"]], data["order"])


Coefficient = Union[Fraction, HbarSeries]


def is_zero(c: Coefficient) -> bool:
    return not c


def coeff_at_hbar_zero(c: Coefficient) -> Fraction:
    return c.at_hbar_zero() if isinstance(c, HbarSeries) else c
