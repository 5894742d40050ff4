from fractions import Fraction

import pytest
import sympy as sp

from qesdunkl.poly_ops import ParamExpr, RationalPoly

X, Z = sp.symbols("x z")


def to_sympy(value):
    """Independent view of an exact scalar or polynomial as a sympy expression."""
    if isinstance(value, RationalPoly):
        return sp.expand(sum(to_sympy(c) * X ** k for k, c in enumerate(value.coeffs)))
    if isinstance(value, ParamExpr):
        return sp.sympify(str(value).replace("^", "**"))
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    return sp.sympify(value)


def sym_equal(a, b) -> bool:
    return sp.simplify(to_sympy(a) - to_sympy(b)) == 0


@pytest.fixture
def x():
    return X
