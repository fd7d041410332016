"""Truncated Laurent series with exact rational coefficients.

Used to evaluate ratios of Bessel functions at large argument, where the
leading terms of numerators and denominators cancel exactly.  Working with
:class:`fractions.Fraction` coefficients makes those cancellations exact, so
the evaluated series carry full double precision.
"""

from fractions import Fraction

import numpy as np

__all__ = ["Laurent", "evaluate"]


class Laurent:
    """Series ``sum_k coef[k] * x**(val + k)`` known up to ``x**prec``.

    Terms of order ``prec`` and higher are unknown.
    """

    __slots__ = ("val", "coef", "prec")

    def __init__(self, coef, val=0, prec=None):
        coef = [Fraction(c) for c in coef]
        if prec is None:
            prec = val + len(coef)
        coef = coef[: max(prec - val, 0)]
        # strip exact leading zeros
        while coef and coef[0] == 0:
            coef.pop(0)
            val += 1
        self.val = val
        self.coef = coef
        self.prec = prec

    @classmethod
    def x(cls, prec):
        return cls([1], 1, prec)

    @classmethod
    def const(cls, a, prec):
        return cls([a], 0, prec)

    def _lift(self, other):
        if isinstance(other, Laurent):
            return other
        return Laurent([other], 0, 10**9)

    def _dense(self, lo, hi):
        out = [Fraction(0)] * (hi - lo)
        for k, c in enumerate(self.coef):
            i = self.val + k - lo
            if 0 <= i < hi - lo:
                out[i] = c
        return out

    def __add__(self, other):
        other = self._lift(other)
        prec = min(self.prec, other.prec)
        lo = min(self.val, other.val)
        a = self._dense(lo, prec)
        b = other._dense(lo, prec)
        return Laurent([x + y for x, y in zip(a, b)], lo, prec)

    __radd__ = __add__

    def __neg__(self):
        return Laurent([-c for c in self.coef], self.val, self.prec)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if not self.coef or not other.coef:
            prec = min(self.prec + other.val, other.prec + self.val)
            return Laurent([], self.val + other.val, prec)
        prec = min(self.val + other.prec, other.val + self.prec)
        val = self.val + other.val
        n = max(prec - val, 0)
        out = [Fraction(0)] * n
        for i, a in enumerate(self.coef[:n]):
            if a == 0:
                continue
            for j, b in enumerate(other.coef[: n - i]):
                out[i + j] += a * b
        return Laurent(out, val, prec)

    __rmul__ = __mul__

    def inverse(self):
        if not self.coef:
            raise ZeroDivisionError("series vanishes to the known order")
        n = self.prec - self.val
        b = self.coef + [Fraction(0)] * (n - len(self.coef))
        inv = [Fraction(0)] * n
        inv[0] = 1 / b[0]
        for k in range(1, n):
            s = sum(b[i] * inv[k - i] for i in range(1, k + 1))
            inv[k] = -s / b[0]
        return Laurent(inv, -self.val, n - self.val)

    def __truediv__(self, other):
        if not isinstance(other, Laurent):
            return self * Laurent([1 / Fraction(other)], 0, 10**9)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k):
        out = Laurent([1], 0, 10**9)
        for _ in range(k):
            out = out * self
        return out

    def derivative(self):
        """Term-by-term derivative with respect to x."""
        out = [c * (self.val + k) for k, c in enumerate(self.coef)]
        return Laurent(out, self.val - 1, self.prec - 1)

    def to_float(self):
        """Return ``(val, coefficients)`` as floats for evaluation."""
        return self.val, np.array([float(c) for c in self.coef])

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coef[:4])
        return f"Laurent(val={self.val}, prec={self.prec}, coef=[{head}, ...])"


def evaluate(val, coef, x):
    """Evaluate ``sum coef[k] x**(val+k)`` with Horner's scheme."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for c in coef[::-1]:
        acc = acc * x + c
    return acc * x**val
