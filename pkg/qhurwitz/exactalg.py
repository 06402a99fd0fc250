"""Exact arithmetic kernel: rationals, polynomials and rational functions in q,
and truncated power series in beta over that field.

Polynomials use sympy's dense univariate representation internally (highest
degree first, coefficients in ZZ); the public ``PolyQ`` keeps coefficients
ascending by power of q.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache, reduce

import mpmath
import sympy
from sympy.polys.densearith import dup_add, dup_sub, dup_mul, dup_neg
from sympy.polys.densebasic import dup_strip
from sympy.polys.densetools import dup_eval
from sympy.polys.domains import QQ, ZZ
from sympy.polys.euclidtools import dup_inner_gcd

from constants import LOGGER_NAME
from qhurwitz.errors import DivisionByZero, NonInvertibleSeries, UsageError

logger = logging.getLogger(LOGGER_NAME)

Q_SYMBOL = sympy.Symbol("q")


def _is_rational(value):
    return isinstance(value, int) or QQ.of_type(value)


@dataclass(frozen=True)
class PolyQ:
    """Polynomial in q with rational coefficients, ascending powers."""
    coeffs: tuple = ()

    def __post_init__(self):
        coeffs = tuple(QQ(c) if isinstance(c, int) else c for c in self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def to_dup(self):
        """Dense ZZ form (descending); requires integer coefficients."""
        fractional = [c for c in self.coeffs if c.denominator != 1]
        if fractional:
            raise UsageError(f"{self.to_str()} has non-integer coefficient {fractional[0]}; clear denominators first")
        return dup_strip([ZZ(int(c.numerator)) for c in reversed(self.coeffs)])

    @classmethod
    def from_dup(cls, f):
        return cls(tuple(QQ(int(c)) for c in reversed(f)))

    def evaluate(self, q_value):
        """Numeric value at an mpmath (or float) q."""
        if not self.coeffs:
            return mpmath.mpf(0)
        return mpmath.polyval([mpmath.mpf(int(c.numerator)) / int(c.denominator) for c in reversed(self.coeffs)],
                              q_value)

    def to_str(self):
        terms = [(power, c) for power, c in enumerate(self.coeffs) if c != 0]
        if not terms:
            return "0"
        pieces = []
        for index, (power, c) in enumerate(terms):
            magnitude = abs(c)
            if magnitude.denominator == 1:
                number = str(magnitude.numerator)
            else:
                number = f"{magnitude.numerator}/{magnitude.denominator}"
            if power == 0:
                body = number
            else:
                monomial = "q" if power == 1 else f"q**{power}"
                body = monomial if magnitude == 1 else f"{number}*{monomial}"
            if index == 0:
                pieces.append(f"-{body}" if c < 0 else body)
            else:
                pieces.append(f" - {body}" if c < 0 else f" + {body}")
        return "".join(pieces)

    def __str__(self):
        return self.to_str()


def _canonical(f, g):
    """Reduce num f / den g (ZZ dups) to canonical form."""
    f = dup_strip(f)
    g = dup_strip(g)
    if not g:
        raise DivisionByZero("rational function with zero denominator")
    if not f:
        return [], [ZZ(1)]
    _, f, g = dup_inner_gcd(f, g, ZZ)
    # lowest-degree nonzero coefficient of the denominator is positive
    lowest = next(c for c in reversed(g) if c != 0)
    if lowest < 0:
        f = dup_neg(f, ZZ)
        g = dup_neg(g, ZZ)
    return f, g


@dataclass(frozen=True)
class RatFuncQ:
    """Rational function num/den in q, kept in canonical form.

    Canonical form: integer coefficients, gcd(num, den) = 1 including the
    integer content, and the lowest-degree nonzero coefficient of den positive.
    Equality is therefore structural.
    """
    num: PolyQ
    den: PolyQ

    @classmethod
    def _from_dups(cls, f, g):
        f, g = _canonical(f, g)
        return cls(PolyQ.from_dup(f), PolyQ.from_dup(g))

    @classmethod
    def from_polys(cls, num, den):
        """Canonicalize an arbitrary pair of rational-coefficient polynomials."""
        denominators = [c.denominator for c in num.coeffs + den.coeffs]
        scale = reduce(math.lcm, (int(d) for d in denominators), 1)
        f = [ZZ(int(c.numerator * (scale // int(c.denominator)))) for c in reversed(num.coeffs)]
        g = [ZZ(int(c.numerator * (scale // int(c.denominator)))) for c in reversed(den.coeffs)]
        return cls._from_dups(f, g)

    @classmethod
    def constant(cls, value):
        value = QQ(value) if isinstance(value, int) else value
        if value == 0:
            return cls.zero()
        return cls(PolyQ((QQ(int(value.numerator)),)), PolyQ((QQ(int(value.denominator)),)))

    @classmethod
    def zero(cls):
        return cls(PolyQ(()), PolyQ((QQ(1),)))

    @classmethod
    def one(cls):
        return cls(PolyQ((QQ(1),)), PolyQ((QQ(1),)))

    @classmethod
    def parse(cls, text):
        """Inverse of ``str``: accepts any rational expression in q."""
        try:
            expr = sympy.sympify(text, locals={"q": Q_SYMBOL})
        except (sympy.SympifyError, SyntaxError, TypeError) as e:
            raise UsageError(f"Cannot parse rational function '{text}': {e}")
        num, den = sympy.fraction(sympy.together(expr))
        try:
            num_poly = sympy.Poly(num, Q_SYMBOL, domain="QQ")
            den_poly = sympy.Poly(den, Q_SYMBOL, domain="QQ")
        except sympy.PolynomialError as e:
            raise UsageError(f"'{text}' is not a rational function of q: {e}")

        def ascending(poly):
            return PolyQ(tuple(QQ(int(sympy.Rational(c).p), int(sympy.Rational(c).q))
                               for c in reversed(poly.all_coeffs())))

        return cls.from_polys(ascending(num_poly), ascending(den_poly))

    def is_zero(self):
        return self.num.is_zero()

    def evaluate(self, q_value):
        return self.num.evaluate(q_value) / self.den.evaluate(q_value)

    def evaluate_exact(self, q_value):
        """Exact value at a rational q."""
        f = [QQ(c) for c in reversed(self.num.coeffs)]
        g = [QQ(c) for c in reversed(self.den.coeffs)]
        denominator = dup_eval(g, q_value, QQ)
        if denominator == 0:
            raise DivisionByZero(f"denominator vanishes at q = {q_value}")
        return dup_eval(f, q_value, QQ) / denominator

    def __str__(self):
        num = self.num.to_str()
        if self.den.coeffs == (QQ(1),):
            return num

        def wrap(poly, text):
            terms = sum(1 for c in poly.coeffs if c != 0)
            return f"({text})" if terms > 1 or "*" in text else text

        return f"{wrap(self.num, num)}/{wrap(self.den, self.den.to_str())}"

    def __repr__(self):
        return f"RatFuncQ({self})"

    def _coerce(self, other):
        if isinstance(other, RatFuncQ):
            return other
        if _is_rational(other):
            return RatFuncQ.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_arith(self, other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_arith(self, other, "sub")

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_arith(other, self, "sub")

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_arith(self, other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_arith(self, other, "div")

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_arith(other, self, "div")

    def __neg__(self):
        return RatFuncQ(PolyQ(tuple(-c for c in self.num.coeffs)), self.den)

    def __pow__(self, exponent):
        if exponent < 0:
            return RatFuncQ.one() / (self ** -exponent)
        result = RatFuncQ.one()
        for _ in range(exponent):
            result = result * self
        return result


def rf_arith(a, b, op):
    """Field operations on canonical rational functions."""
    fa, ga = a.num.to_dup(), a.den.to_dup()
    fb, gb = b.num.to_dup(), b.den.to_dup()
    if op in ("add", "sub"):
        combine = dup_add if op == "add" else dup_sub
        if ga == gb:
            return RatFuncQ._from_dups(combine(fa, fb, ZZ), ga)
        return RatFuncQ._from_dups(combine(dup_mul(fa, gb, ZZ), dup_mul(fb, ga, ZZ), ZZ), dup_mul(ga, gb, ZZ))
    if op == "mul":
        if not fa or not fb:
            return RatFuncQ.zero()
        return RatFuncQ._from_dups(dup_mul(fa, fb, ZZ), dup_mul(ga, gb, ZZ))
    if op == "div":
        if not fb:
            logger.error(f"Division of {a} by the zero rational function")
            raise DivisionByZero(f"division of {a} by zero")
        return RatFuncQ._from_dups(dup_mul(fa, gb, ZZ), dup_mul(ga, fb, ZZ))
    raise UsageError(f"Unknown rational function operation '{op}'")


def q_pochhammer_poly(n, start=1):
    """The polynomial (1 - q^start)(1 - q^(start+1)) ... (1 - q^(start+n-1)) as a ZZ dup."""
    result = [ZZ(1)]
    for j in range(start, start + n):
        factor = [ZZ(-1)] + [ZZ(0)] * (j - 1) + [ZZ(1)]
        result = dup_mul(result, factor, ZZ)
    return result


@dataclass(frozen=True)
class BetaSeries:
    """Truncated power series sum_{n<=order} coeffs[n] beta^n."""
    order: int
    coeffs: tuple

    def __post_init__(self):
        if self.order < 0:
            raise UsageError("series order must be non-negative")
        if len(self.coeffs) != self.order + 1:
            raise UsageError(f"series of order {self.order} needs {self.order + 1} coefficients, "
                             f"got {len(self.coeffs)}")

    @classmethod
    def constant(cls, value, order):
        value = value if isinstance(value, RatFuncQ) else RatFuncQ.constant(value)
        return cls(order, (value,) + (RatFuncQ.zero(),) * order)

    @classmethod
    def monomial(cls, power, value, order):
        value = value if isinstance(value, RatFuncQ) else RatFuncQ.constant(value)
        coeffs = [RatFuncQ.zero()] * (order + 1)
        if power <= order:
            coeffs[power] = value
        return cls(order, tuple(coeffs))

    @classmethod
    def from_json(cls, items):
        coeffs = tuple(RatFuncQ.parse(item) for item in items)
        return cls(len(coeffs) - 1, coeffs)

    def coefficient(self, n):
        return self.coeffs[n] if 0 <= n <= self.order else RatFuncQ.zero()

    def truncate(self, order):
        order = min(order, self.order)
        return BetaSeries(order, self.coeffs[:order + 1])

    def shift(self, power):
        """Multiply by beta^power keeping the order."""
        coeffs = [RatFuncQ.zero()] * power + list(self.coeffs)
        return BetaSeries(self.order, tuple(coeffs[:self.order + 1]))

    def scale(self, value):
        return BetaSeries(self.order, tuple(c * value for c in self.coeffs))

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def nonzero_powers(self):
        return [n for n, c in enumerate(self.coeffs) if not c.is_zero()]

    def to_json(self):
        return [str(c) for c in self.coeffs]

    def __add__(self, other):
        return bseries_arith(self, other, "add")

    def __sub__(self, other):
        return bseries_arith(self, other.scale(QQ(-1)), "add")

    def __mul__(self, other):
        return bseries_arith(self, other, "mul")

    def recip(self):
        return bseries_arith(self, None, "recip")


def bseries_arith(a, b, op):
    """Truncated ring arithmetic; results carry the smaller operand order."""
    if op == "recip":
        if a.coeffs[0].is_zero():
            logger.error("Reciprocal requested of a beta series with zero constant term")
            raise NonInvertibleSeries("constant term of the series is zero")
        inverse0 = RatFuncQ.one() / a.coeffs[0]
        result = [inverse0]
        for n in range(1, a.order + 1):
            acc = RatFuncQ.zero()
            for m in range(1, n + 1):
                if not a.coeffs[m].is_zero():
                    acc = acc + a.coeffs[m] * result[n - m]
            result.append(-(acc * inverse0))
        return BetaSeries(a.order, tuple(result))
    order = min(a.order, b.order)
    if op == "add":
        return BetaSeries(order, tuple(a.coeffs[n] + b.coeffs[n] for n in range(order + 1)))
    if op == "mul":
        coeffs = []
        for n in range(order + 1):
            acc = RatFuncQ.zero()
            for m in range(n + 1):
                if a.coeffs[m].is_zero() or b.coeffs[n - m].is_zero():
                    continue
                acc = acc + a.coeffs[m] * b.coeffs[n - m]
            coeffs.append(acc)
        return BetaSeries(order, tuple(coeffs))
    raise UsageError(f"Unknown series operation '{op}'")


@lru_cache(maxsize=None)
def hq_beta_series(i, order):
    """H_q(i*beta) = sum_n (i beta)^n / (q;q)_n truncated at beta^order."""
    if order < 0:
        raise UsageError("order must be non-negative")
    coeffs = []
    for n in range(order + 1):
        if i == 0 and n > 0:
            coeffs.append(RatFuncQ.zero())
            continue
        coeffs.append(RatFuncQ._from_dups([ZZ(i ** n)], q_pochhammer_poly(n)))
    return BetaSeries(order, tuple(coeffs))


def inverse_q_factors(exponents):
    """1 / prod_e (1 - q^e) for positive exponents e."""
    den = [ZZ(1)]
    for e in exponents:
        den = dup_mul(den, [ZZ(-1)] + [ZZ(0)] * (e - 1) + [ZZ(1)], ZZ)
    return RatFuncQ._from_dups([ZZ(1)], den)


def exact_str(value):
    """Canonical string of a RatFuncQ or an exact rational."""
    if isinstance(value, RatFuncQ):
        return str(value)
    value = QQ(value) if isinstance(value, int) else value
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
