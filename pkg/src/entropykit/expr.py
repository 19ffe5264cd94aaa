"""Exact symbolic scalar expressions over a fixed coordinate chart.

Expressions are kept in a canonical expanded form: a sum of terms, each a
rational coefficient times a product of base factors raised to rational
exponents.  A base factor is a coordinate, a named positive parameter, an
ln/exp atom, or an opaque power of a multi-term expression.  All arithmetic
is exact (fractions.Fraction); nothing is ever evaluated in floating point
except on explicit request.
"""

from __future__ import annotations

import hashlib
import math
import random
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union


class ExprError(Exception):
    """Base error for expression construction and evaluation."""


class ParseError(ExprError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UnknownSymbolError(ParseError):
    def __init__(self, name: str, line: int, col: int):
        super().__init__(f"unknown identifier '{name}'", line, col)
        self.name = name


class DomainError(ExprError):
    """Numeric evaluation left the real domain (ln of non-positive, 0^-n, ...)."""


class SamplingError(ExprError):
    """Random sampling kept hitting domain errors; zero test is unresolved."""


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RESERVED = ("ln", "exp")

Number = Union[int, Fraction]


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate names plus named positive parameters.

    Coordinate order is significant: it fixes the canonical sort of
    monomials and the basis orientation of differential forms.
    """

    coords: tuple[str, ...]
    params: tuple[str, ...] = ()

    def __post_init__(self):
        coords = tuple(self.coords)
        params = tuple(self.params)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "params", params)
        seen = set()
        for name in coords + params:
            if not _IDENT_RE.match(name):
                raise ExprError(f"bad identifier {name!r}")
            if name in _RESERVED:
                raise ExprError(f"{name!r} is reserved for the function syntax")
            if name in seen:
                raise ExprError(f"duplicate name {name!r}")
            seen.add(name)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        return self.coords.index(name)

    def __contains__(self, name: str) -> bool:
        return name in self.coords or name in self.params

    # Convenience constructors for hand-built expressions.
    def var(self, name: str) -> "Expr":
        if name not in self:
            raise ExprError(f"{name!r} is not declared on this chart")
        return Expr(self, (_Term(Fraction(1), ((name, Fraction(1)),)),))

    def const(self, value) -> "Expr":
        value = Fraction(value)
        if value == 0:
            return Expr(self, ())
        return Expr(self, (_Term(value, ()),))

    def zero(self) -> "Expr":
        return Expr(self, ())

    def one(self) -> "Expr":
        return self.const(1)


@dataclass(frozen=True)
class _Ln:
    arg: "Expr"


@dataclass(frozen=True)
class _Exp:
    arg: "Expr"


@dataclass(frozen=True)
class _Pow:
    """Opaque power base: a multi-term (or irreducible constant) expression.

    The exponent lives in the factor pair, not here, so equal bases merge
    by exponent addition.
    """

    base: "Expr"


_Base = Union[str, _Ln, _Exp, _Pow]


@dataclass(frozen=True)
class _Term:
    coeff: Fraction
    factors: tuple[tuple[_Base, Fraction], ...]


def _base_key(base: _Base, chart: Chart):
    if isinstance(base, str):
        if base in chart.coords:
            return (0, chart.index(base))
        return (1, base)
    if isinstance(base, _Ln):
        return (2, 0, _expr_key(base.arg))
    if isinstance(base, _Exp):
        return (2, 1, _expr_key(base.arg))
    return (3, _expr_key(base.base))


def _expr_key(e: "Expr"):
    return tuple(
        (
            tuple(
                (_base_key(b, e.chart), (x.numerator, x.denominator))
                for b, x in t.factors
            ),
            (t.coeff.numerator, t.coeff.denominator),
        )
        for t in e.terms
    )


def _term_sort_key(t: _Term, chart: Chart):
    entries = tuple((0, _base_key(b, chart), -x) for b, x in t.factors)
    return entries + ((1,),)


def _nth_root(n: int, k: int) -> Optional[int]:
    """Exact k-th root of a non-negative integer, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    try:
        r = round(n ** (1.0 / k))
    except OverflowError:
        r = 1 << -(-n.bit_length() // k)  # integer Newton from an upper bound
        while True:
            step = ((k - 1) * r + n // r ** (k - 1)) // k
            if step >= r:
                break
            r = step
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _const_pow(c: Fraction, q: Fraction) -> tuple[Fraction, Optional[Fraction]]:
    """c**q split into (exact rational part, leftover base or None)."""
    if c == 0:
        if q <= 0:
            raise ExprError("zero raised to a non-positive power")
        return Fraction(0), None
    if q.denominator == 1:
        return c ** int(q), None
    if c < 0:
        raise ExprError("negative constant under a fractional power")
    pn = _nth_root(c.numerator, q.denominator)
    pd = _nth_root(c.denominator, q.denominator)
    if pn is not None and pd is not None:
        return Fraction(pn, pd) ** q.numerator, None
    return Fraction(1), c


class Expr:
    """Canonical immutable symbolic expression; construct via Chart helpers,
    parse(), or arithmetic on existing expressions."""

    __slots__ = ("chart", "terms", "_key", "_str")

    def __init__(self, chart: Chart, terms: tuple[_Term, ...]):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_key", None)
        object.__setattr__(self, "_str", None)

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    # -- canonical identity ------------------------------------------------

    def key(self):
        if self._key is None:
            object.__setattr__(self, "_key", (_expr_key(self)))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return self.chart == other.chart and self.key() == other.key()

    def __hash__(self):
        return hash((self.chart, self.key()))

    # -- queries -----------------------------------------------------------

    def is_zero_expr(self) -> bool:
        return not self.terms

    def as_constant(self) -> Optional[Fraction]:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and not self.terms[0].factors:
            return self.terms[0].coeff
        return None

    def free_symbols(self) -> frozenset[str]:
        out: set[str] = set()

        def walk(e: "Expr"):
            for t in e.terms:
                for b, _ in t.factors:
                    if isinstance(b, str):
                        out.add(b)
                    elif isinstance(b, (_Ln, _Exp)):
                        walk(b.arg)
                    else:
                        walk(b.base)

        walk(self)
        return frozenset(out)

    # -- construction core ---------------------------------------------------

    @staticmethod
    def _build(chart: Chart, terms: Iterable[_Term]) -> "Expr":
        merged: dict = {}
        for t in terms:
            if t.coeff == 0:
                continue
            k = tuple((_base_key(b, chart), x) for b, x in t.factors)
            if k in merged:
                old = merged[k]
                merged[k] = _Term(old.coeff + t.coeff, old.factors)
            else:
                merged[k] = t
        final = tuple(
            sorted(
                (t for t in merged.values() if t.coeff != 0),
                key=lambda t: _term_sort_key(t, chart),
            )
        )
        return Expr(chart, final)

    @staticmethod
    def _monomial(chart: Chart, coeff: Fraction, pairs) -> "Expr":
        """One coeff * product-of-powers term, normalized (may expand)."""
        if coeff == 0:
            return Expr(chart, ())
        fmap: dict = {}
        keyed: dict = {}
        for b, x in pairs:
            k = _base_key(b, chart)
            keyed[k] = b
            fmap[k] = fmap.get(k, Fraction(0)) + x
        factors = []
        expansions = []
        for k in sorted(fmap):
            b, x = keyed[k], fmap[k]
            if x == 0:
                continue
            if isinstance(b, _Pow):
                inner = b.base.as_constant()
                if inner is not None:
                    part, left = _const_pow(inner, x)
                    coeff *= part
                    if left is not None:
                        factors.append((_Pow(b.base.chart.const(left)), x))
                    continue
                if x.denominator == 1 and x >= 0:
                    expansions.append(b.base ** int(x))
                    continue
            factors.append((b, x))
        out = Expr(chart, (_Term(coeff, tuple(factors)),))
        for ex in expansions:
            out = out * ex
        return out

    def _lift(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.chart != self.chart:
                raise ExprError("chart mismatch between expressions")
            return other
        return self.chart.const(other)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        return Expr._build(self.chart, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr(
            self.chart, tuple(_Term(-t.coeff, t.factors) for t in self.terms)
        )

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        chart = self.chart
        out = chart.zero()
        for t1 in self.terms:
            for t2 in other.terms:
                out = out + Expr._monomial(
                    chart, t1.coeff * t2.coeff, t1.factors + t2.factors
                )
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        c = other.as_constant()
        if c is not None:
            if c == 0:
                raise ExprError("division by zero constant")
            return self * self.chart.const(Fraction(1) / c)
        return self * other ** Fraction(-1)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, exponent):
        q = Fraction(exponent)
        chart = self.chart
        if q == 0:
            return chart.one()
        if q == 1:
            return self
        if not self.terms:
            if q < 0:
                raise ExprError("zero raised to a negative power")
            return chart.zero()
        if len(self.terms) == 1:
            t = self.terms[0]
            part, left = _const_pow(t.coeff, q)
            pairs = [(b, x * q) for b, x in t.factors]
            if left is not None:
                pairs.append((_Pow(chart.const(left)), q))
            return Expr._monomial(chart, part, pairs)
        if q.denominator == 1 and q > 0:
            half = self ** (int(q) // 2)
            out = half * half
            if int(q) % 2:
                out = out * self
            return out
        return Expr._monomial(chart, Fraction(1), [(_Pow(self), q)])

    # -- calculus ------------------------------------------------------------

    def diff(self, name: str) -> "Expr":
        """Exact partial derivative with respect to a chart coordinate."""
        if name not in self.chart.coords:
            raise ExprError(f"{name!r} is not a coordinate of this chart")
        chart = self.chart
        out = chart.zero()
        for t in self.terms:
            for i, (b, x) in enumerate(t.factors):
                db = self._base_diff(b, name)
                if db.is_zero_expr():
                    continue
                rest = Expr._monomial(
                    chart,
                    t.coeff * x,
                    [p for j, p in enumerate(t.factors) if j != i]
                    + [(b, x - 1)],
                )
                out = out + rest * db
        return out

    def _base_diff(self, b: _Base, name: str) -> "Expr":
        chart = self.chart
        if isinstance(b, str):
            return chart.one() if b == name else chart.zero()
        if isinstance(b, _Ln):
            return b.arg.diff(name) * b.arg ** Fraction(-1)
        if isinstance(b, _Exp):
            return b.arg.diff(name) * Expr._monomial(
                chart, Fraction(1), [(b, Fraction(1))]
            )
        return b.base.diff(name)

    # -- substitution and evaluation ------------------------------------------

    def subs(self, mapping: Mapping[str, "Expr"], chart: Optional[Chart] = None) -> "Expr":
        """Substitute expressions for symbols, optionally landing on a new chart.

        Unmapped symbols must exist on the output chart (parameters usually
        pass through by name).
        """
        out_chart = chart if chart is not None else self.chart
        result = out_chart.zero()
        for t in self.terms:
            val = out_chart.const(t.coeff)
            for b, x in t.factors:
                val = val * self._base_subs(b, mapping, out_chart) ** x
            result = result + val
        return result

    def _base_subs(self, b: _Base, mapping, out_chart: Chart) -> "Expr":
        if isinstance(b, str):
            if b in mapping:
                e = mapping[b]
                if e.chart != out_chart:
                    raise ExprError("substituted expression is on the wrong chart")
                return e
            return out_chart.var(b)
        if isinstance(b, _Ln):
            return ln(b.arg.subs(mapping, out_chart))
        if isinstance(b, _Exp):
            return exp(b.arg.subs(mapping, out_chart))
        return b.base.subs(mapping, out_chart)

    def evaluate(self, env: Mapping[str, Union[Fraction, float, int]]):
        """Numeric value at a point; exact Fraction when the tree allows it."""
        total = Fraction(0)
        for t in self.terms:
            val = t.coeff
            for b, x in t.factors:
                val = val * _pow_value(self._base_value(b, env), x)
            total = total + val
        return total

    def _base_value(self, b: _Base, env):
        if isinstance(b, str):
            try:
                return env[b]
            except KeyError:
                raise ExprError(f"no value bound for symbol {b!r}") from None
        if isinstance(b, _Ln):
            v = b.arg.evaluate(env)
            if v <= 0:
                raise DomainError("ln of a non-positive value")
            return math.log(v)
        if isinstance(b, _Exp):
            try:
                return math.exp(b.arg.evaluate(env))
            except OverflowError:
                raise DomainError("exp overflow") from None
        return b.base.evaluate(env)

    # -- printing --------------------------------------------------------------

    def __str__(self):
        if self._str is None:
            object.__setattr__(self, "_str", self._render())
        return self._str

    __repr__ = __str__

    def _render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, t in enumerate(self.terms):
            body = self._render_term(t)
            if i == 0:
                parts.append(body if t.coeff > 0 else "-" + body)
            else:
                parts.append((" + " if t.coeff > 0 else " - ") + body)
        return "".join(parts)

    def _render_term(self, t: _Term) -> str:
        mag = abs(t.coeff)
        pieces = [self._render_factor(b, x) for b, x in t.factors]
        if not pieces:
            return str(mag)
        if mag != 1:
            pieces.insert(0, str(mag))
        return "*".join(pieces)

    def _render_factor(self, b: _Base, x: Fraction) -> str:
        if isinstance(b, str):
            base = b
        elif isinstance(b, _Ln):
            base = f"ln({b.arg})"
        elif isinstance(b, _Exp):
            base = f"exp({b.arg})"
        else:
            base = f"({b.base})"
        if x == 1:
            return base
        if x.denominator == 1 and x > 0:
            return f"{base}^{x}"
        return f"{base}^({x})"


def _pow_value(base, q: Fraction):
    if isinstance(base, (int, Fraction)) and q.denominator == 1:
        if base == 0 and q < 0:
            raise DomainError("zero base with negative exponent")
        return Fraction(base) ** int(q)
    fb = float(base)
    if fb == 0.0:
        if q < 0:
            raise DomainError("zero base with negative exponent")
        return 0.0 if q > 0 else 1.0
    try:
        if fb < 0.0:
            if q.denominator == 1:
                return fb ** int(q)
            raise DomainError("negative base with fractional exponent")
        return fb ** float(q)
    except OverflowError:
        raise DomainError("power overflow") from None


def ln(e: Expr) -> Expr:
    if e == e.chart.one():
        return e.chart.zero()
    return Expr._monomial(e.chart, Fraction(1), [(_Ln(e), Fraction(1))])


def exp(e: Expr) -> Expr:
    if e.is_zero_expr():
        return e.chart.one()
    return Expr._monomial(e.chart, Fraction(1), [(_Exp(e), Fraction(1))])


def differentiate(e: Expr, name: str) -> Expr:
    return e.diff(name)


# ---------------------------------------------------------------------------
# Zero testing
# ---------------------------------------------------------------------------


class ZeroVerdict(Enum):
    CERTAIN_ZERO = "certain-zero"
    CERTAIN_NONZERO = "certain-nonzero"
    PROBABLY_ZERO = "probably-zero"

    @property
    def zero(self) -> bool:
        return self is not ZeroVerdict.CERTAIN_NONZERO

    @property
    def certain(self) -> bool:
        return self is not ZeroVerdict.PROBABLY_ZERO


@dataclass(frozen=True)
class ZeroTestConfig:
    samples: int = 16
    tol: float = 1e-9
    seed: int = 0
    max_retries: int = 100
    max_numerator: int = 1000
    max_denominator: int = 1000
    high: int = 10  # sample values lie in (0, high]


DEFAULT_ZERO_CONFIG = ZeroTestConfig()


@dataclass(frozen=True)
class ZeroResult:
    verdict: ZeroVerdict
    witness: Optional[dict] = None
    value: Optional[float] = None

    @property
    def zero(self) -> bool:
        return self.verdict.zero

    @property
    def certain(self) -> bool:
        return self.verdict.certain


def _purely_rational(e: Expr) -> bool:
    return all(
        isinstance(b, str) for t in e.terms for b, _ in t.factors
    )


def stable_rng(e: Expr, seed: int) -> random.Random:
    """RNG seeded from the canonical form, stable across runs and processes."""
    digest = hashlib.sha256(
        f"{seed}|{e.chart.coords}|{e.chart.params}|{e}".encode()
    ).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def sample_point(rng: random.Random, names, cfg: ZeroTestConfig) -> dict:
    """Uniform positive rational sample point with bounded numerator and
    denominator (rejection keeps values inside (0, high])."""
    point = {}
    for name in sorted(names):
        while True:
            num = rng.randint(1, cfg.max_numerator)
            den = rng.randint(1, cfg.max_denominator)
            if num <= cfg.high * den:
                break
        point[name] = Fraction(num, den)
    return point


def is_zero(e: Expr, config: ZeroTestConfig = DEFAULT_ZERO_CONFIG) -> ZeroResult:
    """Decide whether an expression is identically zero on the positive domain.

    Canonically empty expressions are certainly zero; a nonzero canonical
    form built purely from symbol powers is certainly nonzero (distinct
    monomials are independent).  Anything involving ln/exp or opaque powers
    falls back to sampling at random rational points.
    """
    if not e.terms:
        return ZeroResult(ZeroVerdict.CERTAIN_ZERO)
    if _purely_rational(e):
        return ZeroResult(ZeroVerdict.CERTAIN_NONZERO)
    names = e.free_symbols()
    rng = stable_rng(e, config.seed)
    good = 0
    retries = 0
    while good < config.samples:
        point = sample_point(rng, names, config)
        try:
            value = e.evaluate(point)
        except DomainError:
            retries += 1
            if retries > config.max_retries:
                raise SamplingError(
                    f"zero test on {e} failed: {retries} domain errors"
                ) from None
            continue
        if abs(float(value)) > config.tol:
            return ZeroResult(ZeroVerdict.CERTAIN_NONZERO, point, float(value))
        good += 1
    return ZeroResult(ZeroVerdict.PROBABLY_ZERO)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<num>[0-9]+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()])"
)


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        if not m.lastgroup == "ws":
            tokens.append((m.lastgroup, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.chart = chart

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str):
        _, _, line, col = self.peek()
        raise ParseError(message, line, col)

    def accept_op(self, *ops) -> Optional[str]:
        kind, lexeme, _, _ = self.peek()
        if kind == "op" and lexeme in ops:
            self.advance()
            return lexeme
        return None

    def expect_op(self, op: str):
        if not self.accept_op(op):
            self.error(f"expected {op!r}")

    def parse(self) -> Expr:
        e = self.expr()
        kind, lexeme, line, col = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {lexeme!r} after expression", line, col)
        return e

    def expr(self) -> Expr:
        negate = bool(self.accept_op("-"))
        e = self.term()
        if negate:
            e = -e
        while True:
            op = self.accept_op("+", "-")
            if not op:
                return e
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs

    def term(self) -> Expr:
        e = self.factor()
        while True:
            op = self.accept_op("*", "/")
            if not op:
                return e
            _, _, line, col = self.peek()
            rhs = self.factor()
            if op == "*":
                e = e * rhs
            else:
                if rhs.as_constant() == 0:
                    raise ParseError("division by zero", line, col)
                e = e / rhs

    def factor(self) -> Expr:
        e = self.base()
        if self.accept_op("^"):
            return e ** self.exponent()
        return e

    def exponent(self) -> Fraction:
        parens = bool(self.accept_op("("))
        sign = -1 if self.accept_op("-") else 1
        kind, lexeme, _, _ = self.peek()
        if kind != "num":
            self.error("expected a rational exponent")
        self.advance()
        num = int(lexeme)
        den = 1
        if self.accept_op("/"):
            kind, lexeme, line, col = self.peek()
            if kind != "num":
                self.error("expected an integer denominator")
            self.advance()
            den = int(lexeme)
            if den == 0:
                raise ParseError("zero denominator in exponent", line, col)
        if parens:
            self.expect_op(")")
        return Fraction(sign * num, den)

    def base(self) -> Expr:
        kind, lexeme, line, col = self.advance()
        if kind == "num":
            return self.chart.const(int(lexeme))
        if kind == "ident":
            if lexeme in _RESERVED:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return ln(arg) if lexeme == "ln" else exp(arg)
            if lexeme not in self.chart:
                raise UnknownSymbolError(lexeme, line, col)
            return self.chart.var(lexeme)
        if kind == "op" and lexeme == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected {lexeme!r}", line, col)


def parse(text: str, chart: Chart, params=None) -> Expr:
    """Parse an expression string over the chart's coordinates and parameters.

    Extra parameter names may be supplied ad hoc; they extend the chart's
    own parameter list for this expression.
    """
    if params:
        merged = tuple(dict.fromkeys(tuple(chart.params) + tuple(params)))
        chart = Chart(chart.coords, merged)
    return _Parser(text, chart).parse()
