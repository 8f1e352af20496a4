"""Parser and formatter for perturbed-polynomial problems.

Problems are expressions in the unknown ``x`` and the perturbation
parameter ``eps``, such as ``x^5 + eps*x - 1``.  The grammar (normative,
whitespace insignificant, explicit ``*`` required):

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := 'x' | 'eps' | number | '(' expr ')' | '-' base
    number := uint ('.' digits)? | uint '/' uint

Only ``x`` and ``eps`` are accepted as identifiers ("e" in particular is
reserved against ambiguity).  Decimal literals become exact rationals
(``0.25`` is ``1/4``), so every parsed problem is exact.  An optional
``= 0`` suffix is accepted and stripped.

The parsed form is a :class:`PerturbedPolynomial`: a map from x-degree to
an exact-rational polynomial in ``eps``, stored as a
:class:`~perturbkit.series.TruncatedSeries` whose order is the maximum
eps-power appearing in the problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .series import RATIONAL, TruncatedSeries


class ParseError(Exception):
    """Syntax error with a 0-based offset into the source text."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__("%s (at offset %d)" % (message, position))
        self.message = message
        self.position = position
        self.text = text


class UnknownIdentifierError(ParseError):
    """Identifier other than ``x`` or ``eps``."""


class NegativeExponentError(ParseError):
    """``^`` followed by a negative number."""


class NonIntegerExponentError(ParseError):
    """``^`` followed by a non-integer number."""


# ---------------------------------------------------------------------------
# tokens

_OPS = set("+-*^()/=")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num', 'name', one of _OPS, or 'end'
    pos: int
    text: str = ""
    value: Fraction = Fraction(0)
    is_int: bool = False


def _tokenize(text: str) -> list[_Token]:
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                if i >= n or not text[i].isdigit():
                    raise ParseError("expected digits after decimal point", i, text)
                while i < n and text[i].isdigit():
                    i += 1
                frag = text[start:i]
                out.append(_Token("num", start, frag, Fraction(frag), False))
            else:
                frag = text[start:i]
                out.append(_Token("num", start, frag, Fraction(int(frag)), True))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            out.append(_Token("name", start, text[start:i]))
            continue
        if ch in _OPS:
            out.append(_Token(ch, i, ch))
            i += 1
            continue
        raise ParseError("unexpected character %r" % ch, i, text)
    out.append(_Token("end", n))
    return out


# ---------------------------------------------------------------------------
# bivariate monomial accumulator used while parsing

_Terms = dict  # {(x_degree, eps_power): Fraction}


def _t_const(c: Fraction) -> _Terms:
    return {(0, 0): c} if c else {}


def _t_add(a: _Terms, b: _Terms) -> _Terms:
    out = dict(a)
    for key, c in b.items():
        s = out.get(key, Fraction(0)) + c
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return out


def _t_neg(a: _Terms) -> _Terms:
    return {key: -c for key, c in a.items()}


def _t_mul(a: _Terms, b: _Terms) -> _Terms:
    out: _Terms = {}
    for (xa, ea), ca in a.items():
        for (xb, eb), cb in b.items():
            key = (xa + xb, ea + eb)
            s = out.get(key, Fraction(0)) + ca * cb
            if s:
                out[key] = s
            else:
                out.pop(key, None)
    return out


def _t_pow(a: _Terms, k: int) -> _Terms:
    out = _t_const(Fraction(1))
    for _ in range(k):
        out = _t_mul(out, a)
    return out


# ---------------------------------------------------------------------------
# the problem representation


@dataclass(frozen=True)
class PerturbedPolynomial:
    """Map from x-degree to an exact-rational eps-polynomial.

    Every stored series is rational mode and has the same order (the
    maximum eps-power with a nonzero coefficient anywhere in the
    problem).  X-degrees whose eps-polynomial is identically zero are
    not stored.
    """

    coeff_map: dict[int, TruncatedSeries]
    x_degree: int
    source: str | None = field(default=None, compare=False)

    @classmethod
    def from_terms(cls, terms: _Terms, source: str | None = None) -> "PerturbedPolynomial":
        terms = {key: c for key, c in terms.items() if c}
        if not terms:
            return cls({}, 0, source)
        eps_order = max(e for (_, e) in terms)
        by_degree: dict[int, list[Fraction]] = {}
        for (k, e), c in terms.items():
            by_degree.setdefault(k, [Fraction(0)] * (eps_order + 1))[e] = c
        coeff_map = {k: TruncatedSeries.rational(cs)
                     for k, cs in sorted(by_degree.items())}
        return cls(coeff_map, max(coeff_map), source)

    @property
    def is_zero(self) -> bool:
        return not self.coeff_map

    @property
    def eps_order(self) -> int:
        if not self.coeff_map:
            return 0
        return next(iter(self.coeff_map.values())).order

    def terms(self):
        """Monomials as ``(x_degree, eps_power, coefficient)``, canonical order."""
        for k in sorted(self.coeff_map, reverse=True):
            for e, c in enumerate(self.coeff_map[k].coeffs):
                if c:
                    yield k, e, c

    def coefficient(self, x_degree: int) -> TruncatedSeries:
        """The eps-polynomial attached to ``x_degree`` (zero series if absent)."""
        if x_degree in self.coeff_map:
            return self.coeff_map[x_degree]
        return TruncatedSeries.zero(self.eps_order, mode=RATIONAL)

    def at_eps_zero(self) -> list[Fraction]:
        """Dense x-coefficients of the unperturbed polynomial Phi(x, 0)."""
        out = [Fraction(0)] * (self.x_degree + 1)
        for k, series in self.coeff_map.items():
            out[k] = series.coeffs[0]
        return out

    def derivative_x(self) -> "PerturbedPolynomial":
        """Partial derivative with respect to the unknown."""
        terms: _Terms = {}
        for k, e, c in self.terms():
            if k >= 1:
                terms[(k - 1, e)] = terms.get((k - 1, e), Fraction(0)) + k * c
        return PerturbedPolynomial.from_terms(terms)

    def evaluate_at(self, x, eps):
        """Numeric value at ``(x, eps)``; Horner in x over Horner in eps.

        Accepts int/float/complex/Fraction arguments and follows ordinary
        numeric promotion (exact when both arguments are rational).
        """
        if self.is_zero:
            return 0 * x
        acc = None
        for k in range(self.x_degree, -1, -1):
            ck = self.coeff_map.get(k)
            cval = ck.evaluate(eps) if ck is not None else 0
            acc = cval if acc is None else acc * x + cval
        return acc

    def substitute_series(self, z: TruncatedSeries, order: int) -> TruncatedSeries:
        """The residual engine: Phi(z(eps), eps) modulo ``eps**(order+1)``.

        ``z`` is zero-extended to ``order``; the problem's exact
        coefficients are converted to float mode when ``z`` is float.
        """
        zx = z.truncate(order) if z.order != order else z
        acc = TruncatedSeries.zero(order, mode=zx.mode, var=zx.var)
        for k in range(self.x_degree, -1, -1):
            acc = acc.mul(zx)
            ck = self.coeff_map.get(k)
            if ck is not None:
                ck = ck.truncate(order)
                if zx.mode != RATIONAL:
                    ck = ck.to_float()
                acc = acc.add(ck)
        return acc


# ---------------------------------------------------------------------------
# recursive-descent parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError("expected %r" % kind, tok.pos, self.text)
        return self.take()

    def parse(self) -> _Terms:
        terms = self.expr()
        if self.peek().kind == "=":
            eq = self.take()
            rhs = self.peek()
            if rhs.kind != "num" or rhs.value != 0:
                raise ParseError("only '= 0' is accepted after an equation",
                                 eq.pos, self.text)
            self.take()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError("unexpected %r" % (tok.text or tok.kind),
                             tok.pos, self.text)
        return terms

    def expr(self) -> _Terms:
        out = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.take()
            rhs = self.term()
            out = _t_add(out, rhs if op.kind == "+" else _t_neg(rhs))
        return out

    def term(self) -> _Terms:
        out = self.factor()
        while self.peek().kind == "*":
            self.take()
            out = _t_mul(out, self.factor())
        return out

    def factor(self) -> _Terms:
        base = self.base()
        if self.peek().kind == "^":
            self.take()
            tok = self.peek()
            if tok.kind == "-":
                raise NegativeExponentError("exponents must be nonnegative",
                                            tok.pos, self.text)
            if tok.kind != "num":
                raise ParseError("expected integer exponent", tok.pos, self.text)
            if not tok.is_int:
                raise NonIntegerExponentError("exponents must be integers",
                                              tok.pos, self.text)
            self.take()
            if self.peek().kind == "/":
                raise NonIntegerExponentError("exponents must be integers",
                                              self.peek().pos, self.text)
            return _t_pow(base, int(tok.value))
        return base

    def base(self) -> _Terms:
        tok = self.peek()
        if tok.kind == "name":
            self.take()
            if tok.text == "x":
                return {(1, 0): Fraction(1)}
            if tok.text == "eps":
                return {(0, 1): Fraction(1)}
            raise UnknownIdentifierError(
                "unknown identifier %r (only 'x' and 'eps' are allowed)" % tok.text,
                tok.pos, self.text)
        if tok.kind == "num":
            self.take()
            value = tok.value
            if self.peek().kind == "/":
                if not tok.is_int:
                    raise ParseError("rational literals need integer parts",
                                     self.peek().pos, self.text)
                self.take()
                den = self.peek()
                if den.kind != "num" or not den.is_int:
                    raise ParseError("expected integer denominator",
                                     den.pos, self.text)
                if den.value == 0:
                    raise ParseError("zero denominator", den.pos, self.text)
                self.take()
                value = value / den.value
            return _t_const(value)
        if tok.kind == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "-":
            self.take()
            return _t_neg(self.base())
        raise ParseError("expected 'x', 'eps', a number, '(' or '-'",
                         tok.pos, self.text)


def parse(text: str) -> PerturbedPolynomial:
    """Parse an expression (optionally ending in ``= 0``) into a problem."""
    return PerturbedPolynomial.from_terms(_Parser(text).parse(), source=text)


def evaluate_text(text: str, x, eps):
    """Independent arithmetic evaluation of an expression, bypassing the
    polynomial representation (used as an oracle in tests)."""

    class _Eval(_Parser):
        def base(self):
            tok = self.peek()
            if tok.kind == "name":
                self.take()
                if tok.text == "x":
                    return x
                if tok.text == "eps":
                    return eps
                raise UnknownIdentifierError("unknown identifier %r" % tok.text,
                                             tok.pos, self.text)
            if tok.kind == "num":
                self.take()
                value = tok.value
                if self.peek().kind == "/":
                    self.take()
                    den = self.take()
                    value = value / den.value
                return value
            if tok.kind == "(":
                self.take()
                inner = self.expr()
                self.expect(")")
                return inner
            if tok.kind == "-":
                self.take()
                return -self.base()
            raise ParseError("expected 'x', 'eps', a number, '(' or '-'",
                             tok.pos, self.text)

        def factor(self):
            b = self.base()
            if self.peek().kind == "^":
                self.take()
                tok = self.take()
                return b ** int(tok.value)
            return b

        def term(self):
            out = self.factor()
            while self.peek().kind == "*":
                self.take()
                out = out * self.factor()
            return out

        def expr(self):
            out = self.term()
            while self.peek().kind in ("+", "-"):
                op = self.take()
                rhs = self.term()
                out = out + rhs if op.kind == "+" else out - rhs
            return out

    return _Eval(text).parse()


# ---------------------------------------------------------------------------
# formatting


def _format_monomial(k: int, e: int, c: Fraction, lead: bool) -> str:
    mag = abs(c)
    parts = []
    if mag != 1 or (k == 0 and e == 0):
        parts.append(str(mag))
    if e == 1:
        parts.append("eps")
    elif e > 1:
        parts.append("eps^%d" % e)
    if k == 1:
        parts.append("x")
    elif k > 1:
        parts.append("x^%d" % k)
    body = "*".join(parts)
    if lead:
        # a leading negative coefficient is rendered explicitly ("-1*x^2")
        # so that reparsing never binds the sign inside a power
        if c < 0:
            if mag == 1 and parts and parts[0] != str(mag):
                return "-1*" + body
            return "-" + body
        return body
    return body


def format(p: PerturbedPolynomial) -> str:
    """Canonical text: descending x-degree, ascending eps-power, explicit
    ``*`` and ``^``.  ``parse(format(p))`` reproduces ``p`` exactly."""
    items = list(p.terms())
    if not items:
        return "0"
    pieces = []
    for idx, (k, e, c) in enumerate(items):
        if idx == 0:
            pieces.append(_format_monomial(k, e, c, lead=True))
        else:
            pieces.append("+" if c > 0 else "-")
            pieces.append(_format_monomial(k, e, c, lead=False))
    return " ".join(pieces)
