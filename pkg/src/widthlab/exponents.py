"""
Extended exponents `p` in `[1, inf]`, stored by their reciprocal.

Every exponent expression we evaluate is affine in reciprocals,
so `p = inf` is simply `recip = 0` and nothing ever divides by infinity.
Exponents parsed from integers, fractions, or decimal strings keep an exact
`Fraction` reciprocal; only interpolation with a floating-point parameter
produces a float reciprocal.
"""

import dataclasses
import fractions
import functools
import math
import numbers
import typing as t

Fraction = fractions.Fraction
Real = t.Union[Fraction, float]

INFINITY_NAMES = frozenset(['inf', 'infinity', '∞', '+inf'])

class ExponentError(ValueError):
    pass

def _exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    # `str` of a float is its shortest round-trip decimal, e.g. 1.5 -> '1.5'.
    return Fraction(str(value))

@functools.total_ordering
@dataclasses.dataclass(frozen=True)
class Exponent:
    """An exponent `p`, represented by `recip = 1/p`.

    Exponents order by `p`, i.e. in reverse order of their reciprocals.
    """
    recip: Real

    def __post_init__(self):
        if not 0 <= self.recip <= 1:
            raise ExponentError(f'reciprocal out of [0, 1]: {self.recip}')

    @classmethod
    def of(cls, value) -> 'Exponent':
        """Parse an exponent.

        Accepts an `Exponent`, a number `p >= 1`, `math.inf`,
        or a string: `"inf"`, a decimal `"1.5"`, or a fraction `"3/2"`.
        """
        if isinstance(value, Exponent):
            return value
        if isinstance(value, bool):
            raise ExponentError(f'not an exponent: {value!r}')
        if isinstance(value, str):
            text = value.strip().lower()
            if text in INFINITY_NAMES:
                return INF
            try:
                value = Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise ExponentError(f'not an exponent: {value!r}') from None
        elif not isinstance(value, numbers.Real):
            raise ExponentError(f'not an exponent: {value!r}')
        elif math.isinf(value) and value > 0:
            return INF
        elif math.isnan(value):
            raise ExponentError('exponent is NaN')
        value = _exact(value)
        if value < 1:
            raise ExponentError(f'exponent must be at least 1: {value}')
        return cls(1 / value)

    @classmethod
    def from_recip(cls, recip) -> 'Exponent':
        return cls(recip)

    @property
    def value(self) -> float:
        """`p` as a float, `math.inf` for `recip = 0`."""
        if self.recip == 0:
            return math.inf
        return float(1 / self.recip)

    @property
    def dual(self) -> 'Exponent':
        return dual_exponent(self)

    @property
    def exact(self) -> bool:
        return isinstance(self.recip, Fraction)

    def is_infinite(self) -> bool:
        return self.recip == 0

    def __lt__(self, other):
        if not isinstance(other, Exponent):
            return NotImplemented
        return self.recip > other.recip

    def __str__(self):
        if self.recip == 0:
            return 'inf'
        if self.exact:
            p = 1 / self.recip
            return str(p.numerator) if p.denominator == 1 else f'{p.numerator}/{p.denominator}'
        return repr(self.value)

    def json(self):
        """Serializable form: a number, or the string "inf"."""
        if self.recip == 0:
            return 'inf'
        return self.value

INF = Exponent(Fraction(0))
ONE = Exponent(Fraction(1))
TWO = Exponent(Fraction(1, 2))

def dual_exponent(e: Exponent) -> Exponent:
    return Exponent(1 - e.recip)

def solve_lambda(p_i: Exponent, p_j: Exponent, q: Exponent) -> Real:
    """Solve `1/q = (1-λ)/p_i + λ/p_j` for `λ`.

    Requires `p_i <= q <= p_j` and `p_i != p_j`.
    """
    if p_i.recip == p_j.recip:
        raise ExponentError(f'cannot interpolate between equal exponents: {p_i}')
    if not p_j.recip <= q.recip <= p_i.recip:
        raise ExponentError(f'{q} is not between {p_i} and {p_j}')
    return (p_i.recip - q.recip) / (p_i.recip - p_j.recip)

def interpolate(p_i: Exponent, p_j: Exponent, lam: Real) -> Exponent:
    """The exponent `p` with `1/p = (1-λ)/p_i + λ/p_j`."""
    if not 0 <= lam <= 1:
        raise ExponentError(f'interpolation parameter out of [0, 1]: {lam}')
    recip = (1 - lam) * p_i.recip + lam * p_j.recip
    # Floating point can push the convex combination just outside [0, 1].
    if isinstance(recip, float):
        recip = min(max(recip, 0.0), 1.0)
    return Exponent(recip)
