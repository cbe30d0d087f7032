"""Formal Laurent series in ``h`` with finite principal part, truncated at ``h^N``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable


@dataclass(frozen=True)
class FormalSeries:
    """``sum_{j} coeffs[j] h^(leading + j)`` keeping powers up to ``truncation``.

    Coefficients may be scalars or jets; anything supporting ``+`` and ``*``.
    """

    leading: int
    coeffs: tuple
    truncation: int

    def __post_init__(self):
        keep = max(0, self.truncation - self.leading + 1)
        object.__setattr__(self, "coeffs", tuple(self.coeffs)[:keep])

    @classmethod
    def from_dict(cls, terms: dict[int, Any], truncation: int, zero=0) -> "FormalSeries":
        if not terms:
            return cls(0, (), truncation)
        lo = min(terms)
        hi = min(max(terms), truncation)
        return cls(lo, tuple(terms.get(j, zero) for j in range(lo, hi + 1)), truncation)

    @classmethod
    def constant(cls, value, truncation: int) -> "FormalSeries":
        return cls(0, (value,), truncation)

    @property
    def orders(self) -> range:
        return range(self.leading, self.leading + len(self.coeffs))

    def __getitem__(self, order: int):
        j = order - self.leading
        if 0 <= j < len(self.coeffs):
            return self.coeffs[j]
        return 0

    def items(self):
        return zip(self.orders, self.coeffs)

    def truncate(self, order: int) -> "FormalSeries":
        return FormalSeries(self.leading, self.coeffs, min(order, self.truncation))

    def map(self, fn: Callable) -> "FormalSeries":
        return FormalSeries(self.leading, tuple(fn(c) for c in self.coeffs), self.truncation)

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            other = FormalSeries.constant(other, self.truncation)
        n = min(self.truncation, other.truncation)
        terms: dict[int, Any] = {}
        for series in (self, other):
            for j, c in series.items():
                if j <= n:
                    terms[j] = terms[j] + c if j in terms else c
        return FormalSeries.from_dict(terms, n)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            return self.map(lambda c: c * other)
        return cauchy_product(self, other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self.map(lambda c: other * c)

    def shift(self, k: int) -> "FormalSeries":
        """Multiply by ``h^k``."""
        return FormalSeries(self.leading + k, self.coeffs, self.truncation)


def cauchy_product(a: FormalSeries, b: FormalSeries, mul: Callable) -> FormalSeries:
    """Cauchy product with a custom coefficient product, truncated at the lower order.

    The truncation of the result is ``min(a.truncation, b.truncation)`` shifted
    by the other factor's leading order when that is negative, so that a
    principal part never produces coefficients beyond what both inputs know.
    """
    n = min(a.truncation + min(b.leading, 0), b.truncation + min(a.leading, 0))
    terms: dict[int, Any] = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j > n:
                continue
            term = mul(x, y)
            terms[i + j] = terms[i + j] + term if i + j in terms else term
    return FormalSeries.from_dict(terms, n)


def series_add(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    return a + b


def series_mul(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    return a * b


def series_truncate(a: FormalSeries, order: int) -> FormalSeries:
    return a.truncate(order)
