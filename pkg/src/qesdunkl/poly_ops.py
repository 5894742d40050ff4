"""Exact polynomial and differential-operator algebra.

Everything here works over the rationals (``fractions.Fraction``) or over the
field of rational functions in a small fixed set of model parameters
(:class:`ParamExpr`).  Nothing is ever rounded.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence, Union

# Indeterminates available to ParamExpr.  The order fixes the term order
# (lex on exponent tuples) and therefore the canonical printed form.
SYMBOLS: tuple[str, ...] = (
    "alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "mu", "E", "a", "m0",
    "C_pp", "C_p0", "C_pm", "C_0m", "C_mm", "C_p", "C_0", "C_m", "C",
)
_INDEX = {name: i for i, name in enumerate(SYMBOLS)}
_NSYM = len(SYMBOLS)
_ZERO_EXP = (0,) * _NSYM


class OddCoefficient(ValueError):
    """Raised when an x-space operator cannot be rewritten in z = -x**2/a**2."""


class MPoly:
    """Sparse multivariate polynomial with Fraction coefficients.

    ``terms`` maps exponent tuples (one slot per entry of :data:`SYMBOLS`)
    to nonzero coefficients.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        self.terms = {} if terms is None else {
            k: Fraction(v) for k, v in terms.items() if v != 0}

    @classmethod
    def _raw(cls, terms: dict) -> "MPoly":
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def const(cls, c) -> "MPoly":
        c = Fraction(c)
        return cls._raw({_ZERO_EXP: c} if c else {})

    @classmethod
    def symbol(cls, name: str) -> "MPoly":
        if name not in _INDEX:
            raise KeyError(f"unknown symbol {name!r}; allowed: {SYMBOLS}")
        exp = [0] * _NSYM
        exp[_INDEX[name]] = 1
        return cls._raw({tuple(exp): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ZERO_EXP in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get(_ZERO_EXP, Fraction(0))

    def __add__(self, other: "MPoly") -> "MPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return MPoly._raw(out)

    def __neg__(self) -> "MPoly":
        return MPoly._raw({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (-other)

    def __mul__(self, other: "MPoly") -> "MPoly":
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                s = out.get(k, 0) + v1 * v2
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return MPoly._raw(out)

    def scale(self, c: Fraction) -> "MPoly":
        if not c:
            return MPoly()
        return MPoly._raw({k: v * c for k, v in self.terms.items()})

    def __pow__(self, e: int) -> "MPoly":
        result = MPoly.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, MPoly) and self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def leading(self) -> tuple[tuple, Fraction]:
        k = max(self.terms)
        return k, self.terms[k]

    def divide_exact(self, other: "MPoly") -> "MPoly | None":
        """Quotient if ``other`` divides ``self`` in Q[symbols], else None.

        A single divisor is a Groebner basis of its own ideal, so the lex
        division algorithm leaves a zero remainder exactly when it divides.
        """
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lk, lc = other.leading()
        rem = MPoly._raw(dict(self.terms))
        quot: dict = {}
        while rem.terms:
            k, c = rem.leading()
            shift = tuple(a - b for a, b in zip(k, lk))
            if min(shift) < 0:
                return None
            q = c / lc
            quot[shift] = quot.get(shift, 0) + q
            rem = rem - MPoly._raw({shift: q}) * other
        return MPoly._raw({k: v for k, v in quot.items() if v})

    def monomial_gcd(self) -> tuple:
        it = iter(self.terms)
        g = list(next(it))
        for k in it:
            g = [min(a, b) for a, b in zip(g, k)]
        return tuple(g)

    def shift_down(self, exp: tuple) -> "MPoly":
        return MPoly._raw({tuple(a - b for a, b in zip(k, exp)): v
                           for k, v in self.terms.items()})

    def degree_in(self, name: str) -> int:
        i = _INDEX[name]
        return max((k[i] for k in self.terms), default=0)

    def coefficients_in(self, name: str) -> list["MPoly"]:
        """Coefficients of self viewed as a polynomial in one symbol."""
        i = _INDEX[name]
        out: list[dict] = [{} for _ in range(self.degree_in(name) + 1)]
        for k, v in self.terms.items():
            kk = list(k)
            d = kk[i]
            kk[i] = 0
            out[d][tuple(kk)] = v
        return [MPoly._raw(t) for t in out]

    def free_symbols(self) -> set[str]:
        return {SYMBOLS[i] for k in self.terms for i, e in enumerate(k) if e}

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0])))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, v in self.sorted_terms():
            mono = "*".join(SYMBOLS[i] + (f"^{e}" if e > 1 else "")
                            for i, e in enumerate(k) if e)
            mag = abs(v)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append(("-" if v < 0 else "+", body))
        s = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    __repr__ = __str__


def _as_mpoly(x) -> MPoly:
    if isinstance(x, MPoly):
        return x
    return MPoly.const(x)


Scalar = Union[int, Fraction, "ParamExpr"]


class ParamExpr:
    """Rational function in the model parameters, kept in a normal form.

    The denominator has leading coefficient 1 and shares no monomial factor
    with the numerator; a numerator exactly divisible by the denominator is
    reduced to a polynomial.  Equality is decided by cross-multiplication,
    so ``e - e`` always normalizes to the zero expression.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_mpoly(num)
        den = MPoly.const(1) if den is None else _as_mpoly(den)
        if den.is_zero():
            raise ZeroDivisionError("ParamExpr with zero denominator")
        self.num, self.den = _normalize(num, den)

    @classmethod
    def symbol(cls, name: str) -> "ParamExpr":
        return cls(MPoly.symbol(name))

    @classmethod
    def const(cls, c) -> "ParamExpr":
        return cls(MPoly.const(c))

    @staticmethod
    def coerce(x) -> "ParamExpr":
        if isinstance(x, ParamExpr):
            return x
        if isinstance(x, (int, Fraction)):
            return ParamExpr(MPoly.const(x))
        raise TypeError(f"cannot use {type(x).__name__} in exact symbolic arithmetic")

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"expression {self} is not a constant")
        return self.num.constant_value() / self.den.constant_value()

    def free_symbols(self) -> set[str]:
        return self.num.free_symbols() | self.den.free_symbols()

    def __add__(self, other):
        try:
            o = ParamExpr.coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return ParamExpr(self.num + o.num, self.den)
        return ParamExpr(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        out = ParamExpr.__new__(ParamExpr)
        out.num, out.den = -self.num, self.den
        return out

    def __sub__(self, other):
        try:
            return self + (-ParamExpr.coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = ParamExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return ParamExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = ParamExpr.coerce(other)
        except TypeError:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError(f"division of {self} by zero")
        return ParamExpr(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return ParamExpr.coerce(other) / self

    def __pow__(self, e: int):
        if e < 0:
            return ParamExpr.const(1) / (self ** -e)
        return ParamExpr(self.num ** e, self.den ** e)

    def __eq__(self, other) -> bool:
        try:
            o = ParamExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def __float__(self) -> float:
        return float(self.to_fraction())

    def subs(self, values: Mapping[str, Scalar]) -> "ParamExpr":
        """Substitute exact values (or other expressions) for symbols."""
        return _eval_mpoly(self.num, values) / _eval_mpoly(self.den, values)

    def coefficients_in(self, name: str) -> list["ParamExpr"]:
        """Coefficients in ``name``; the denominator must not involve it."""
        if self.den.degree_in(name):
            raise ValueError(f"{name} occurs in the denominator of {self}")
        return [ParamExpr(c, self.den) for c in self.num.coefficients_in(name)]

    def solve_linear(self, name: str) -> "ParamExpr":
        """Root of ``self == 0`` in ``name``, which must enter linearly."""
        cs = self.coefficients_in(name)
        if len(cs) != 2 or cs[1].is_zero():
            raise ValueError(f"{self} is not linear in {name}")
        return -cs[0] / cs[1]

    def __str__(self) -> str:
        if self.den.is_constant():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"ParamExpr({self})"


def _eval_mpoly(p: MPoly, values: Mapping[str, Scalar]) -> ParamExpr:
    idx = {_INDEX[k]: ParamExpr.coerce(v) for k, v in values.items()}
    total = ParamExpr.const(0)
    for k, c in p.terms.items():
        kept = [0] * _NSYM
        term = ParamExpr.const(c)
        for i, e in enumerate(k):
            if not e:
                continue
            if i in idx:
                term = term * idx[i] ** e
            else:
                kept[i] = e
        total = total + term * ParamExpr(MPoly._raw({tuple(kept): Fraction(1)}))
    return total


def _normalize(num: MPoly, den: MPoly) -> tuple[MPoly, MPoly]:
    if num.is_zero():
        return num, MPoly.const(1)
    if den.is_constant():
        return num.scale(1 / den.constant_value()), MPoly.const(1)
    g = tuple(min(a, b) for a, b in zip(num.monomial_gcd(), den.monomial_gcd()))
    if any(g):
        num, den = num.shift_down(g), den.shift_down(g)
        if den.is_constant():
            return num.scale(1 / den.constant_value()), MPoly.const(1)
    q = num.divide_exact(den)
    if q is not None:
        return q, MPoly.const(1)
    q = den.divide_exact(num)
    if q is not None:
        return MPoly.const(1), q
    lc = den.leading()[1]
    return num.scale(1 / lc), den.scale(1 / lc)


def sym(name: str) -> ParamExpr:
    """Shorthand for :meth:`ParamExpr.symbol`."""
    return ParamExpr.symbol(name)


def exact(c):
    """Coerce ints to Fraction; leave Fractions and ParamExprs alone."""
    if isinstance(c, (Fraction, ParamExpr)):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"{c!r} is not an exact scalar")


def simplify_scalar(c):
    """Collapse a constant ParamExpr to a Fraction."""
    if isinstance(c, ParamExpr) and c.is_constant():
        return c.to_fraction()
    return c


class RationalPoly:
    """Dense univariate polynomial with exact coefficients.

    Coefficients are Fractions or ParamExprs (polynomials over Q(params)).
    ``coeffs[k]`` multiplies ``x**k``; trailing zeros are trimmed.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [simplify_scalar(exact(c)) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, k: int, c=1) -> "RationalPoly":
        return cls([0] * k + [c])

    @classmethod
    def x(cls) -> "RationalPoly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other):
        o = _as_poly(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return RationalPoly(self.coeff(k) + o.coeff(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        o = _as_poly(other)
        if self.is_zero() or o.is_zero():
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = RationalPoly([1])
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        try:
            o = _as_poly(other)
        except TypeError:
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def derivative(self) -> "RationalPoly":
        return RationalPoly(k * c for k, c in enumerate(self.coeffs) if k)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (float(c) if isinstance(x, float) else c)
        return acc

    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def is_odd(self) -> bool:
        return all(c == 0 for c in self.coeffs[0::2])

    def reflect(self) -> "RationalPoly":
        return RationalPoly(-c if k % 2 else c for k, c in enumerate(self.coeffs))

    def shift_down(self) -> "RationalPoly":
        """p(x)/x for p with zero constant term."""
        if self.coeff(0) != 0:
            raise ValueError("polynomial has a nonzero constant term")
        return RationalPoly(self.coeffs[1:])

    def divmod(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.coeffs[-1]
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            q = rem[k] / lead
            quot[k - dq] = q
            if q == 0:
                continue
            for j, c in enumerate(other.coeffs):
                rem[k - dq + j] = rem[k - dq + j] - q * c
        return RationalPoly(quot), RationalPoly(rem[:dq])

    def to_str(self, var: str = "x") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in reversed(list(enumerate(self.coeffs))):
            if c == 0:
                continue
            mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
            cs = str(c)
            if isinstance(c, ParamExpr) and len(c.num.terms) > 1:
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"RationalPoly({self.to_str()})"


def _as_poly(x) -> RationalPoly:
    if isinstance(x, RationalPoly):
        return x
    if isinstance(x, (int, Fraction, ParamExpr)):
        return RationalPoly([x])
    raise TypeError(f"cannot treat {type(x).__name__} as a polynomial")


@dataclass(frozen=True)
class DiffOperator2:
    """``p4 * d^2 + p3 * d + p2`` with polynomial coefficients."""

    p4: RationalPoly = RationalPoly()
    p3: RationalPoly = RationalPoly()
    p2: RationalPoly = RationalPoly()

    @classmethod
    def from_coeffs(cls, p4=(), p3=(), p2=()) -> "DiffOperator2":
        return cls(_poly_arg(p4), _poly_arg(p3), _poly_arg(p2))

    @property
    def order(self) -> int:
        if not self.p4.is_zero():
            return 2
        if not self.p3.is_zero():
            return 1
        return 0

    def is_zero(self) -> bool:
        return self.p4.is_zero() and self.p3.is_zero() and self.p2.is_zero()

    def __add__(self, other: "DiffOperator2") -> "DiffOperator2":
        return DiffOperator2(self.p4 + other.p4, self.p3 + other.p3, self.p2 + other.p2)

    def __sub__(self, other: "DiffOperator2") -> "DiffOperator2":
        return DiffOperator2(self.p4 - other.p4, self.p3 - other.p3, self.p2 - other.p2)

    def scale(self, c) -> "DiffOperator2":
        c = _as_poly(c)
        return DiffOperator2(self.p4 * c, self.p3 * c, self.p2 * c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOperator2):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def compose(self, other: "DiffOperator2") -> "DiffOperator2":
        """``self`` after ``other``; the product must stay of order <= 2."""
        left = [self.p2, self.p3, self.p4]
        right = [other.p2, other.p3, other.p4]
        out = [RationalPoly() for _ in range(5)]
        for i, a in enumerate(left):
            if a.is_zero():
                continue
            for j, b in enumerate(right):
                bl = b
                for l in range(i + 1):
                    if bl.is_zero():
                        break
                    out[i - l + j] = out[i - l + j] + a * bl * comb(i, l)
                    bl = bl.derivative()
        if not (out[3].is_zero() and out[4].is_zero()):
            raise ValueError("composition has order > 2")
        return DiffOperator2(out[2], out[1], out[0])

    def __str__(self) -> str:
        return f"[{self.p4}] d2 + [{self.p3}] d + [{self.p2}]"

    def to_str(self, var: str) -> str:
        return (f"({self.p4.to_str(var)}) d^2/d{var}^2 + ({self.p3.to_str(var)}) d/d{var}"
                f" + ({self.p2.to_str(var)})")


def _poly_arg(p) -> RationalPoly:
    if isinstance(p, RationalPoly):
        return p
    if isinstance(p, (int, Fraction, ParamExpr)):
        return RationalPoly([p])
    return RationalPoly(p)


ZERO_OPERATOR = DiffOperator2()


def op_apply(op: DiffOperator2, p: RationalPoly) -> RationalPoly:
    """Return ``p4*p'' + p3*p' + p2*p`` exactly."""
    d1 = p.derivative()
    return op.p4 * d1.derivative() + op.p3 * d1 + op.p2 * p


def even_to_z(p: RationalPoly, a) -> RationalPoly:
    """Rewrite an even p(x) as q(z) under x**2 = -a**2 z."""
    if not p.is_even():
        raise OddCoefficient(f"{p} has odd-degree terms")
    s = -exact(a) ** 2
    return RationalPoly(c * s ** (k // 2) for k, c in enumerate(p.coeffs) if k % 2 == 0)


def z_to_even(q: RationalPoly, a) -> RationalPoly:
    """Inverse of :func:`even_to_z`: q(z) -> q(-x**2/a**2) as a polynomial in x."""
    s = -1 / exact(a) ** 2
    out = [Fraction(0)] * (2 * len(q.coeffs))
    for k, c in enumerate(q.coeffs):
        out[2 * k] = c * s ** k
    return RationalPoly(out)


def op_substitute_quadratic(op_x: DiffOperator2, a) -> DiffOperator2:
    """Change variable x**2 = -a**2 z in a parity-preserving operator.

    Uses d/dx = (-2x/a^2) d/dz and d2/dx2 = (-4z/a^2) d2/dz2 - (2/a^2) d/dz.
    ``p4`` and ``p2`` must be even in x and ``p3`` odd; anything else would
    mix parities and has no expression in z.
    """
    a = exact(a)
    if not isinstance(a, ParamExpr) and a <= 0:
        raise ValueError("a must be positive")
    if not op_x.p4.is_even() or not op_x.p2.is_even():
        raise OddCoefficient("second- and zeroth-order coefficients must be even in x")
    if not op_x.p3.is_odd():
        raise OddCoefficient("first-order coefficient must be odd in x")
    a2 = a * a
    q4 = even_to_z(op_x.p4, a)
    q2 = even_to_z(op_x.p2, a)
    # p3(x) * (-2x/a^2) is even in x
    q3 = even_to_z(op_x.p3 * RationalPoly([0, -2 / a2]), a)
    z = RationalPoly.x()
    return DiffOperator2(
        p4=q4 * z * (-4 / a2),
        p3=q4 * (-2 / a2) + q3,
        p2=q2,
    )


@dataclass(frozen=True)
class FracOperator:
    """Operator ``op / den`` with polynomial coefficients over a common denominator."""

    op: DiffOperator2
    den: RationalPoly

    def __eq__(self, other) -> bool:
        if not isinstance(other, FracOperator):
            return NotImplemented
        return self.op.scale(other.den) == other.op.scale(self.den)

    __hash__ = None  # type: ignore[assignment]

    def reduce(self) -> "FracOperator":
        """Divide out the denominator when it divides every coefficient."""
        parts = []
        for p in (self.op.p4, self.op.p3, self.op.p2):
            q, r = p.divmod(self.den)
            if not r.is_zero():
                lead = self.den.coeffs[-1]
                return FracOperator(self.op.scale(RationalPoly([1 / lead])),
                                    self.den * RationalPoly([1 / lead]))
            parts.append(q)
        return FracOperator(DiffOperator2(*parts), RationalPoly([1]))


def gauge_similarity(op: DiffOperator2, logderiv_num: RationalPoly,
                     logderiv_den: RationalPoly | None = None) -> FracOperator:
    """Conjugate ``op`` by a gauge factor G with G'/G = num/den.

    Returns G^-1 op G over the common denominator den**2, using
    d -> d + L and d2 -> d2 + 2 L d + (L^2 + L').
    """
    n = _poly_arg(logderiv_num)
    d = RationalPoly([1]) if logderiv_den is None else _poly_arg(logderiv_den)
    if d.is_zero():
        raise ZeroDivisionError("log-derivative denominator is zero")
    d2 = d * d
    # L' * d^2 = n' d - n d'
    lprime = n.derivative() * d - n * d.derivative()
    new = DiffOperator2(
        p4=op.p4 * d2,
        p3=op.p3 * d2 + op.p4 * n * d * 2,
        p2=op.p2 * d2 + op.p3 * n * d + op.p4 * (n * n + lprime),
    )
    return FracOperator(new, d2).reduce()
