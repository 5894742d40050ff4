"""sl(2) generators, quadratic QES operators, and the finite matrix problem.

Generators in the degree-n representation on polynomials of degree <= n::

    J+ = z^2 d - n z,    J0 = z d - n/2,    J- = d

Operators are always obtained by composing these symbolically; the printed
coefficient formulas are only ever compared against, never used.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace
from fractions import Fraction

from .dunkl import ParitySector
from .linalg import det_bareiss, null_vector
from .poly_ops import DiffOperator2, ParamExpr, RationalPoly, op_apply, sym


class ConstraintViolated(ValueError):
    pass


class Generator(str, enum.Enum):
    PLUS = "plus"
    ZERO = "zero"
    MINUS = "minus"


def _level(n) -> int:
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise ValueError(f"QES level must be a nonnegative integer, got {n!r}")
    return n


def generator_matrix(kind, n: int) -> list[list[Fraction]]:
    """Matrix of J on the basis 1, x, ..., x^n; column k holds J(x^k)."""
    kind = Generator(kind)
    n = _level(n)
    m = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    for k in range(n + 1):
        if kind is Generator.MINUS and k:
            m[k - 1][k] = Fraction(k)
        elif kind is Generator.ZERO:
            m[k][k] = k - Fraction(n, 2)
        elif kind is Generator.PLUS and k < n:
            m[k + 1][k] = Fraction(k - n)
    return m


def generator_operator(kind, n: int) -> DiffOperator2:
    kind = Generator(kind)
    n = _level(n)
    if kind is Generator.PLUS:
        return DiffOperator2.from_coeffs(p3=[0, 0, 1], p2=[0, -n])
    if kind is Generator.ZERO:
        return DiffOperator2.from_coeffs(p3=[0, 1], p2=[Fraction(-n, 2)])
    return DiffOperator2.from_coeffs(p3=[1])


@dataclass(frozen=True)
class Sl2Coefficients:
    """Coefficients of sum C_ab J^a J^b + sum C_a J^a + C."""

    c_pp: object = Fraction(0)
    c_p0: object = Fraction(0)
    c_pm: object = Fraction(0)
    c_0m: object = Fraction(0)
    c_mm: object = Fraction(0)
    c_p: object = Fraction(0)
    c_0: object = Fraction(0)
    c_m: object = Fraction(0)
    c: object = Fraction(0)

    @classmethod
    def symbolic(cls) -> "Sl2Coefficients":
        names = {"c_pp": "C_pp", "c_p0": "C_p0", "c_pm": "C_pm", "c_0m": "C_0m",
                 "c_mm": "C_mm", "c_p": "C_p", "c_0": "C_0", "c_m": "C_m", "c": "C"}
        return cls(**{k: sym(v) for k, v in names.items()})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_QUADRATIC = {"c_pp": ("plus", "plus"), "c_p0": ("plus", "zero"), "c_pm": ("plus", "minus"),
              "c_0m": ("zero", "minus"), "c_mm": ("minus", "minus")}
_LINEAR = {"c_p": "plus", "c_0": "zero", "c_m": "minus"}


def build_qes_operator(c: Sl2Coefficients, n: int) -> DiffOperator2:
    """Expand the quadratic combination into P4 d^2 + P3 d + P2 by composition."""
    n = _level(n)
    gens = {k: generator_operator(k, n) for k in ("plus", "zero", "minus")}
    total = DiffOperator2()
    for name, (ga, gb) in _QUADRATIC.items():
        coef = getattr(c, name)
        if coef != 0:
            total = total + gens[ga].compose(gens[gb]).scale(coef)
    for name, g in _LINEAR.items():
        coef = getattr(c, name)
        if coef != 0:
            total = total + gens[g].scale(coef)
    if c.c != 0:
        total = total + DiffOperator2.from_coeffs(p2=[c.c])
    return total


def printed_qes_operator(c: Sl2Coefficients, n: int) -> DiffOperator2:
    """P4, P3, P2 transcribed from the published closed forms (audit input only)."""
    half = Fraction(1, 2)
    return DiffOperator2.from_coeffs(
        p4=[c.c_mm, c.c_0m, c.c_pm, c.c_p0, c.c_pp],
        p3=[c.c_m - n * half * c.c_0m, c.c_0 - n * c.c_pm,
            c.c_p + c.c_p0 * (1 - 3 * n * half), c.c_pp * (2 - 2 * n)],
        p2=[c.c - n * half * c.c_0, n * n * half * c.c_p0 - n * c.c_p,
            c.c_pp * n * (n - 1)],
    )


@dataclass(frozen=True)
class AlphaParams:
    """Parameters alpha_1..alpha_5 of the z-space model operator."""

    a1: object
    a2: object
    a3: object
    a4: object
    a5: object
    sector: ParitySector | None = None

    @classmethod
    def symbolic(cls, sector: ParitySector | None = None) -> "AlphaParams":
        return cls(*(sym(f"alpha{i}") for i in range(1, 6)), sector=sector)

    def values(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a5)


def model_operator(alpha: AlphaParams) -> DiffOperator2:
    """(z^2 - z^3) d^2 + [(a2 - a3) z^2 + (a1 + a3) z] d + (a4 z + a5)."""
    return DiffOperator2.from_coeffs(
        p4=[0, 0, 1, -1],
        p3=[0, alpha.a1 + alpha.a3, alpha.a2 - alpha.a3],
        p2=[alpha.a5, alpha.a4],
    )


def match_model_coefficients(alpha: AlphaParams, n: int):
    """sl(2) coefficients reproducing the model operator at level n.

    Returns ``(coefficients, constraint)``; the constraint
    ``-n^2/2 - n C+ - alpha4`` must vanish for the level to be quasi-exactly
    solvable.
    """
    n = _level(n)
    half = Fraction(1, 2)
    s13 = alpha.a1 + alpha.a3
    c_p = alpha.a2 - alpha.a3 + 1 - 3 * n * half
    coeffs = Sl2Coefficients(
        c_p0=Fraction(-1), c_pm=Fraction(1),
        c_p=c_p, c_0=n + s13, c=alpha.a5 + n * half * (n + s13),
    )
    constraint = -n * n * half - n * c_p - alpha.a4
    return coeffs, constraint


def constrained_alpha4(alpha: AlphaParams, n: int):
    """The alpha4 value that makes the level-n constraint vanish."""
    coeffs, _ = match_model_coefficients(alpha, n)
    return -Fraction(n * n, 2) - n * coeffs.c_p


def impose_constraint(alpha: AlphaParams, n: int) -> AlphaParams:
    return replace(alpha, a4=constrained_alpha4(alpha, n))


@dataclass(frozen=True)
class QesMatrix:
    """Action of the model operator on (b_0..b_n); ``overflow[k]`` is the z^(n+1) coefficient of column k."""

    n: int
    entries: list
    overflow: list

    def overflow_free(self) -> bool:
        return all(x == 0 for x in self.overflow)

    def apply(self, b) -> list:
        return [sum((self.entries[r][k] * b[k] for k in range(self.n + 1)), Fraction(0))
                for r in range(self.n + 1)]


def qes_matrix(alpha: AlphaParams, n: int, strict: bool = False) -> QesMatrix:
    """Collect the model operator on z^0..z^n into an (n+1)x(n+1) matrix."""
    n = _level(n)
    op = model_operator(alpha)
    entries = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    overflow = []
    for k in range(n + 1):
        col = op_apply(op, RationalPoly.monomial(k))
        if col.degree > n + 1:
            raise AssertionError(f"image of z^{k} has degree {col.degree}")
        for r in range(n + 1):
            entries[r][k] = col.coeff(r)
        overflow.append(col.coeff(n + 1))
    for r in range(n + 1):
        for k in range(n + 1):
            if r not in (k, k + 1) and entries[r][k] != 0:
                raise AssertionError(f"entry ({r},{k}) breaks the bidiagonal structure")
    m = QesMatrix(n, entries, overflow)
    if strict and not m.overflow_free():
        raise ConstraintViolated(
            f"level {n}: z^{n + 1} coefficient {m.overflow[-1]} does not vanish")
    return m


def determinant_condition(m):
    """Exact determinant of a QesMatrix (or plain square matrix)."""
    entries = m.entries if isinstance(m, QesMatrix) else m
    d = det_bareiss(entries)
    if isinstance(d, ParamExpr) and d.is_constant():
        return d.to_fraction()
    return d


def qes_null_vector(m: QesMatrix):
    """Null vector normalized so its first nonzero coordinate is 1."""
    return null_vector(m.entries)


def subspace_is_invariant(n: int) -> bool:
    """Every generator maps polynomials of degree <= n into themselves."""
    for kind in Generator:
        op = generator_operator(kind, n)
        for k in range(n + 1):
            if op_apply(op, RationalPoly.monomial(k)).degree > n:
                return False
    return True
