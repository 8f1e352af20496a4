"""Truncated formal power series in one perturbation variable.

A :class:`TruncatedSeries` holds the coefficients ``c_0 .. c_N`` of the
finite sum ``c_0 + c_1*eps + ... + c_N*eps**N``.  The truncation order ``N``
is part of the value: trailing zeros are stored explicitly, and every
operation is performed modulo ``eps**(N+1)``.  Arithmetic between series of
different orders returns the minimum order (the information actually
available), never an error.

Coefficients live in exactly one of two modes:

* ``"rational"`` -- exact :class:`fractions.Fraction` values (arbitrary
  precision, always reduced, positive denominator);
* ``"float"`` -- double-precision :class:`complex` values.

Mixing modes in one operation raises :class:`ModeMismatchError`; there is
deliberately no silent promotion.  Use :meth:`TruncatedSeries.to_float` for
an explicit conversion.

Series are immutable after construction, so values can be shared freely
between threads or tasks.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import factorial
from typing import Iterable, Union

RATIONAL = "rational"
FLOAT = "float"

#: Magnitudes at or below this count as zero in float mode (overridable
#: per call).  Below the accumulated rounding of the built-in demo
#: problems, above double-precision noise.
DEFAULT_ZERO_TOL = 1e-12

Coefficient = Union[Fraction, complex]


class SeriesError(Exception):
    """Base class for series arithmetic errors."""


class ModeMismatchError(SeriesError):
    """Raised when rational and float series meet in one operation."""


class ZeroConstantTermError(SeriesError):
    """Raised by :meth:`TruncatedSeries.invert` when ``c_0`` is zero."""


class NonzeroInnerConstantError(SeriesError):
    """Raised by :meth:`TruncatedSeries.compose` when the inner series
    has a nonzero constant term."""


def _as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise ModeMismatchError(
        "rational mode needs int or Fraction coefficients, got %r" % (value,)
    )


def _as_complex(value) -> complex:
    if isinstance(value, (int, float, complex)):
        return complex(value)
    raise ModeMismatchError(
        "float mode needs int, float or complex coefficients, got %r" % (value,)
    )


class TruncatedSeries:
    """Coefficients ``c_0 .. c_N`` of a formal power series, order ``N`` fixed.

    Use the :meth:`rational` / :meth:`floating` constructors in new code;
    the raw constructor validates coefficients against ``mode``.
    """

    __slots__ = ("coeffs", "order", "mode", "var")

    def __init__(self, coeffs: Iterable, mode: str = RATIONAL, var: str = "eps",
                 order: int | None = None):
        if mode not in (RATIONAL, FLOAT):
            raise ValueError("unknown mode %r" % (mode,))
        norm = _as_rational if mode == RATIONAL else _as_complex
        cs = [norm(c) for c in coeffs]
        if order is not None:
            if order < 0:
                raise ValueError("order must be >= 0")
            if len(cs) > order + 1:
                cs = cs[: order + 1]
            else:
                zero = Fraction(0) if mode == RATIONAL else 0j
                cs.extend([zero] * (order + 1 - len(cs)))
        if not cs:
            raise ValueError("a series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "order", len(cs) - 1)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "var", var)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def rational(cls, coeffs: Iterable, order: int | None = None,
                 var: str = "eps") -> "TruncatedSeries":
        """Exact-rational series from ints or Fractions."""
        return cls(coeffs, mode=RATIONAL, var=var, order=order)

    @classmethod
    def floating(cls, coeffs: Iterable, order: int | None = None,
                 var: str = "eps") -> "TruncatedSeries":
        """Complex-double series from numbers."""
        return cls(coeffs, mode=FLOAT, var=var, order=order)

    @classmethod
    def zero(cls, order: int, mode: str = RATIONAL, var: str = "eps") -> "TruncatedSeries":
        return cls([0], mode=mode, var=var, order=order)

    @classmethod
    def one(cls, order: int, mode: str = RATIONAL, var: str = "eps") -> "TruncatedSeries":
        return cls([1], mode=mode, var=var, order=order)

    @classmethod
    def constant(cls, value, order: int, mode: str = RATIONAL,
                 var: str = "eps") -> "TruncatedSeries":
        return cls([value], mode=mode, var=var, order=order)

    @classmethod
    def variable(cls, order: int, mode: str = RATIONAL, var: str = "eps") -> "TruncatedSeries":
        """The series ``eps`` itself (requires order >= 1)."""
        if order < 1:
            raise ValueError("variable series needs order >= 1")
        return cls([0, 1], mode=mode, var=var, order=order)

    # -- bookkeeping ---------------------------------------------------

    def _zero_coeff(self):
        return Fraction(0) if self.mode == RATIONAL else 0j

    def _one_coeff(self):
        return Fraction(1) if self.mode == RATIONAL else 1 + 0j

    def _check_compatible(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected TruncatedSeries, got %r" % (other,))
        if self.mode != other.mode:
            raise ModeMismatchError(
                "cannot combine %s-mode and %s-mode series" % (self.mode, other.mode)
            )
        if self.var != other.var:
            raise SeriesError(
                "cannot combine series in %r with series in %r" % (self.var, other.var)
            )

    def truncate(self, order: int) -> "TruncatedSeries":
        """Drop coefficients above ``order`` (or zero-extend up to it)."""
        if order == self.order:
            return self
        return TruncatedSeries(self.coeffs, mode=self.mode, var=self.var, order=order)

    def to_float(self) -> "TruncatedSeries":
        """Explicit rational -> complex-float conversion."""
        if self.mode == FLOAT:
            return self
        return TruncatedSeries([complex(float(c), 0.0) for c in self.coeffs],
                               mode=FLOAT, var=self.var)

    # -- ring operations ----------------------------------------------

    def add(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Coefficient-wise sum, truncated to the smaller order."""
        self._check_compatible(other)
        n = min(self.order, other.order)
        cs = [self.coeffs[k] + other.coeffs[k] for k in range(n + 1)]
        return TruncatedSeries(cs, mode=self.mode, var=self.var)

    def neg(self) -> "TruncatedSeries":
        return TruncatedSeries([-c for c in self.coeffs], mode=self.mode, var=self.var)

    def sub(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self.add(other.neg())

    def scale(self, scalar) -> "TruncatedSeries":
        """Multiply every coefficient by a same-mode scalar."""
        s = _as_rational(scalar) if self.mode == RATIONAL else _as_complex(scalar)
        return TruncatedSeries([s * c for c in self.coeffs], mode=self.mode, var=self.var)

    def mul(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Cauchy product modulo ``eps**(N+1)``, N = min of the orders."""
        self._check_compatible(other)
        n = min(self.order, other.order)
        zero = self._zero_coeff()
        cs = [zero] * (n + 1)
        for i in range(n + 1):
            a = self.coeffs[i]
            if a == zero:
                continue
            for j in range(n + 1 - i):
                cs[i + j] += a * other.coeffs[j]
        return TruncatedSeries(cs, mode=self.mode, var=self.var)

    def power(self, k: int) -> "TruncatedSeries":
        """``self**k`` for integer ``k >= 0`` by binary exponentiation."""
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = TruncatedSeries.one(self.order, mode=self.mode, var=self.var)
        base = self
        while k:
            if k & 1:
                result = result.mul(base)
            base = base.mul(base)
            k >>= 1
        return result

    def invert(self, zero_tol: float | None = None) -> "TruncatedSeries":
        """Multiplicative inverse ``b`` with ``self*b = 1 mod eps**(N+1)``.

        Requires a nonzero constant term (exact in rational mode, above
        ``zero_tol`` in float mode).
        """
        c0 = self.coeffs[0]
        if self._coeff_is_zero(c0, zero_tol):
            raise ZeroConstantTermError("cannot invert a series with zero constant term")
        n = self.order
        inv0 = Fraction(1) / c0 if self.mode == RATIONAL else 1 / c0
        out = [inv0]
        for m in range(1, n + 1):
            acc = self._zero_coeff()
            for k in range(1, m + 1):
                acc += self.coeffs[k] * out[m - k]
            out.append(-acc * inv0)
        return TruncatedSeries(out, mode=self.mode, var=self.var)

    def compose(self, inner: "TruncatedSeries",
                zero_tol: float | None = None) -> "TruncatedSeries":
        """Substitute ``inner`` (zero constant term) into ``self``."""
        self._check_mode_only(inner)
        if not inner._coeff_is_zero(inner.coeffs[0], zero_tol):
            raise NonzeroInnerConstantError(
                "inner series must have zero constant term, got %r" % (inner.coeffs[0],)
            )
        n = min(self.order, inner.order)
        acc = TruncatedSeries.constant(self.coeffs[n], n, mode=self.mode, var=inner.var)
        for k in range(n - 1, -1, -1):
            acc = acc.mul(inner.truncate(n))
            acc = acc.add(TruncatedSeries.constant(self.coeffs[k], n,
                                                   mode=self.mode, var=inner.var))
        return acc

    def _check_mode_only(self, other: "TruncatedSeries"):
        # compose allows differing variable tags (outer is a formal shape)
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected TruncatedSeries, got %r" % (other,))
        if self.mode != other.mode:
            raise ModeMismatchError(
                "cannot combine %s-mode and %s-mode series" % (self.mode, other.mode)
            )

    def differentiate(self) -> "TruncatedSeries":
        """Formal derivative; output order is ``N - 1``."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-zero series")
        cs = [(k + 1) * self.coeffs[k + 1] for k in range(self.order)]
        return TruncatedSeries(cs, mode=self.mode, var=self.var)

    def evaluate(self, eps):
        """Horner evaluation of the truncated polynomial at ``eps``.

        Exact when the series is rational and ``eps`` is an int or
        Fraction; otherwise ordinary float/complex arithmetic.
        """
        acc = self.coeffs[self.order]
        for k in range(self.order - 1, -1, -1):
            acc = acc * eps + self.coeffs[k]
        return acc

    # -- predicates ----------------------------------------------------

    def _coeff_is_zero(self, c, zero_tol: float | None) -> bool:
        if self.mode == RATIONAL:
            return c == 0
        tol = DEFAULT_ZERO_TOL if zero_tol is None else zero_tol
        return abs(c) <= tol

    def is_zero(self, zero_tol: float | None = None) -> bool:
        """True iff every retained coefficient vanishes (exact or within tol)."""
        return all(self._coeff_is_zero(c, zero_tol) for c in self.coeffs)

    def leading_index(self, zero_tol: float | None = None) -> int | None:
        """Index of the first nonzero coefficient, or None for the zero series."""
        for k, c in enumerate(self.coeffs):
            if not self._coeff_is_zero(c, zero_tol):
                return k
        return None

    # -- operator sugar -------------------------------------------------

    __add__ = add
    __sub__ = sub
    __mul__ = mul
    __neg__ = neg
    __pow__ = power

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.mode == other.mode and self.var == other.var
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.mode, self.var, self.coeffs))

    def __repr__(self):
        return "TruncatedSeries(%r, mode=%r, var=%r)" % (
            list(self.coeffs), self.mode, self.var)

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0 and len(self.coeffs) > 1:
                continue
            if k == 0:
                parts.append(_format_coeff(c))
            elif k == 1:
                parts.append("%s*%s" % (_format_coeff(c), self.var))
            else:
                parts.append("%s*%s^%d" % (_format_coeff(c), self.var, k))
        if not parts:
            parts = ["0"]
        return " + ".join(parts).replace("+ -", "- ")

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        """Schema: {"var", "order", "mode", "coeffs"} with rational
        coefficients as {"num": str, "den": str} and float ones as
        {"re": float, "im": float}."""
        if self.mode == RATIONAL:
            coeffs = [{"num": str(c.numerator), "den": str(c.denominator)}
                      for c in self.coeffs]
        else:
            coeffs = [{"re": c.real, "im": c.imag} for c in self.coeffs]
        return {"var": self.var, "order": self.order, "mode": self.mode,
                "coeffs": coeffs}

    @classmethod
    def from_json_dict(cls, data: dict) -> "TruncatedSeries":
        mode = data["mode"]
        if mode == RATIONAL:
            cs = [Fraction(int(c["num"]), int(c["den"])) for c in data["coeffs"]]
        elif mode == FLOAT:
            cs = [complex(c["re"], c["im"]) for c in data["coeffs"]]
        else:
            raise ValueError("unknown mode %r" % (mode,))
        out = cls(cs, mode=mode, var=data.get("var", "eps"))
        if out.order != data["order"]:
            raise ValueError("coefficient count does not match declared order")
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "TruncatedSeries":
        return cls.from_json_dict(json.loads(text))


def _format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if c.imag == 0:
        return repr(c.real)
    return str(c)


def standard_series(name: str, order: int, var: str = "eps") -> TruncatedSeries:
    """Exact Maclaurin coefficients of a named function through ``order``.

    Supported names: ``exp``, ``sin``, ``cos`` and ``geometric``
    (``1/(1+eps)``).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if name == "exp":
        cs = [Fraction(1, factorial(k)) for k in range(order + 1)]
    elif name == "sin":
        cs = [Fraction((-1) ** ((k - 1) // 2), factorial(k)) if k % 2 == 1 else Fraction(0)
              for k in range(order + 1)]
    elif name == "cos":
        cs = [Fraction((-1) ** (k // 2), factorial(k)) if k % 2 == 0 else Fraction(0)
              for k in range(order + 1)]
    elif name == "geometric":
        cs = [Fraction((-1) ** k) for k in range(order + 1)]
    else:
        raise ValueError("unknown standard series %r" % (name,))
    return TruncatedSeries(cs, mode=RATIONAL, var=var)
