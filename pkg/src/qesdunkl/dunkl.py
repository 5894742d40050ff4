"""One-dimensional Dunkl calculus: reflection, parity, and the Dunkl derivative.

The Dunkl derivative is ``D f = f' + (mu/x) (f(x) - f(-x))``.  It acts exactly
on polynomials and by second-order finite differences on grids that are
symmetric about, and exclude, the origin.

The position-dependent-mass Hamiltonian ``H = -1/2 D w D w`` with
``w = 1/sqrt(m)`` is discretized here too (hbar = 1 throughout).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .poly_ops import ParamExpr, RationalPoly, exact


class InvalidGrid(ValueError):
    pass


@dataclass(frozen=True)
class DunklParam:
    """Dunkl deformation parameter, restricted to mu > -1/2."""

    mu: Fraction | float | ParamExpr = Fraction(0)

    def __post_init__(self):
        if isinstance(self.mu, ParamExpr):
            return
        if not self.mu > Fraction(-1, 2):
            raise ValueError(f"Dunkl parameter must satisfy mu > -1/2, got {self.mu}")


def _mu(mu) -> Fraction | float | ParamExpr:
    return mu.mu if isinstance(mu, DunklParam) else DunklParam(mu).mu


class ParitySector(enum.IntEnum):
    """Reflection eigenvalue s with R f = s f."""

    EVEN = 1
    ODD = -1

    @property
    def s(self) -> int:
        return int(self)

    @classmethod
    def parse(cls, value) -> "ParitySector":
        if isinstance(value, ParitySector):
            return value
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValueError(f"sector must be 'even' or 'odd', got {value!r}") from None
        return cls(int(value))

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on x_j = j*h, j = -N..-1, 1..N (ascending; x = 0 excluded)."""

    h: float
    values: np.ndarray
    low_accuracy: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.h <= 0:
            raise InvalidGrid(f"grid spacing must be positive, got {self.h}")
        if len(self.values) % 2 or len(self.values) < 8:
            raise InvalidGrid("a symmetric grid needs an even number (>= 8) of nodes")

    @property
    def n_half(self) -> int:
        return len(self.values) // 2

    @property
    def nodes(self) -> np.ndarray:
        return symmetric_nodes(self.h, self.n_half)

    @classmethod
    def sample(cls, f, h: float, n_half: int) -> "GridFunction":
        x = symmetric_nodes(h, n_half)
        if isinstance(f, RationalPoly):
            vals = np.array([f(float(xi)) for xi in x], dtype=float)
        else:
            vals = np.asarray(f(x), dtype=float)
        return cls(h, vals)


def symmetric_nodes(h: float, n_half: int) -> np.ndarray:
    j = np.concatenate([np.arange(-n_half, 0), np.arange(1, n_half + 1)])
    return j * h


def reflection_apply(f):
    """``x -> f(-x)`` for polynomials or symmetric grid functions."""
    if isinstance(f, RationalPoly):
        return f.reflect()
    if isinstance(f, GridFunction):
        return GridFunction(f.h, f.values[::-1].copy())
    raise TypeError(f"cannot reflect {type(f).__name__}")


def parity_decompose(f):
    """Split f into (even, odd) parts, (f + Rf)/2 and (f - Rf)/2."""
    rf = reflection_apply(f)
    if isinstance(f, RationalPoly):
        half = Fraction(1, 2)
        return (f + rf) * half, (f - rf) * half
    return (GridFunction(f.h, (f.values + rf.values) / 2),
            GridFunction(f.h, (f.values - rf.values) / 2))


def dunkl_apply_poly(p: RationalPoly, mu) -> RationalPoly:
    """Exact Dunkl derivative: x^k -> (k + 2 mu [k odd]) x^(k-1)."""
    mu = exact(_mu(mu))
    return RationalPoly((k + 2 * mu) * c if k % 2 else k * c
                        for k, c in enumerate(p.coeffs) if k)


def dunkl_apply_grid(f: GridFunction, mu) -> GridFunction:
    """Finite-difference Dunkl derivative on a symmetric grid.

    Central differences in the interior.  The nodes next to the excluded
    origin use the three-point stencil on (-h, h, 2h), which is also second
    order.  The two outermost nodes use one-sided second-order stencils and
    are flagged in ``low_accuracy``.
    """
    mu = float(_mu(mu))
    v = np.asarray(f.values, dtype=float)
    h = f.h
    n = f.n_half
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    # nodes -h (index n-1) and +h (index n): the neighbour across 0 is 2h away
    d[n] = (-v[n - 1] / 6 - v[n] / 2 + 2 * v[n + 1] / 3) / h
    d[n - 1] = (-2 * v[n - 2] / 3 + v[n - 1] / 2 + v[n] / 6) / h
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    x = f.nodes
    d += mu / x * (v - v[::-1])
    flags = np.zeros(len(v), dtype=bool)
    flags[[0, -1]] = True
    return GridFunction(h, d, flags)


def dunkl_apply_sector(values: np.ndarray, h: float, mu, sector) -> np.ndarray:
    """Dunkl derivative of a function of definite parity, from its samples at x = h..N*h.

    The reflected half is reconstructed from f(-x) = s f(x), so the result
    equals the full-grid derivative restricted to x > 0.
    """
    s = ParitySector.parse(sector).s
    values = np.asarray(values, dtype=float)
    full = GridFunction(h, np.concatenate([s * values[::-1], values]))
    return dunkl_apply_grid(full, mu).values[len(values):]


# --- position-dependent-mass Hamiltonian -------------------------------------

@dataclass(frozen=True)
class HalfGrid:
    """Cell-centred nodes x_j = (j - 1/2) h, j = 1..N, on (0, L).

    The wall x = L is the (excluded) node N+1, where the Dirichlet condition
    f = 0 is imposed; cell faces sit at j*h, the first one at the origin.
    """

    L: float
    N: int

    def __post_init__(self):
        if self.N < 8:
            raise InvalidGrid(f"need at least 8 nodes, got N={self.N}")
        if not self.L > 0:
            raise InvalidGrid(f"box half-width must be positive, got L={self.L}")

    @property
    def h(self) -> float:
        return self.L / (self.N + 0.5)

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(1, self.N + 1) - 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return np.arange(0, self.N + 1) * self.h


def inverse_mass(x, a, m0):
    """1/m(x) = (a^2 + x^2)/(a^2 m0); ``a=None`` (or inf) holds the mass at m0."""
    x = np.asarray(x, dtype=float)
    if a is None or math.isinf(float(a)):
        return np.full_like(x, 1.0 / float(m0))
    a = float(a)
    return (a * a + x * x) / (a * a * float(m0))


def _int_pow(lo, hi, c):
    """Integral of x**c over [lo, hi] (lo >= 0, c > -1)."""
    return (np.power(hi, c + 1) - np.power(lo, c + 1)) / (c + 1)


def hamiltonian_bands(a, m0, mu, sector, grid: HalfGrid):
    """Tridiagonal bands (lower, diag, upper) of the sector-reduced Hamiltonian.

    With g = w f, the Dunkl derivative on parity s is
    D g = x^-c (x^c g)', c = mu (1 - s), which is g' + mu (1 - s) g / x.
    The outer derivative acts on parity -s with exponent c' = mu (1 + s).
    Each derivative is discretized by assuming it is constant across a cell
    and integrating the power weight exactly, which keeps the scheme second
    order up to the origin and makes the off-diagonal products positive.
    """
    mu = float(_mu(mu))
    s = ParitySector.parse(sector).s
    c_in = mu * (1 - s)
    c_out = mu * (1 + s)
    h = grid.h
    x = grid.nodes
    faces = grid.faces
    xe = np.append(x, grid.L)  # includes the Dirichlet node
    w_node = np.sqrt(inverse_mass(xe, a, m0))
    w_face = np.sqrt(inverse_mass(faces, a, m0))
    phi_w = np.power(xe, c_in) * w_node  # phi_j = x_j^c w_j f_j

    R = _int_pow(xe[:-1], xe[1:], c_in)  # faces 1..N
    Q = _int_pow(faces[:-1], faces[1:], c_out)  # cells 1..N
    P = np.power(faces[1:], c_out)  # faces 1..N
    flux_out = P * w_face[1:] / R  # multiplies (phi_{j+1} - phi_j)

    upper = -0.5 * flux_out[:-1] * phi_w[1:-1] / Q[:-1]
    lower = -0.5 * flux_out[:-1] * phi_w[:-2] / Q[1:]
    diag = 0.5 * flux_out * phi_w[:-1] / Q
    diag[1:] += 0.5 * flux_out[:-1] * phi_w[1:-1] / Q[1:]
    if s == -1:
        # odd g: phi(-x_1) = -phi(x_1), P_0 = 1
        k0 = w_face[0] * (c_in + 1) * phi_w[0] / x[0] ** (c_in + 1)
        diag[0] += 0.5 * k0 / Q[0]
    return lower, diag, upper


def dunkl_hamiltonian_grid(a, m0, mu, sector, grid: HalfGrid) -> np.ndarray:
    """Dense matrix of H = -1/2 D(w D(w .)) on the chosen parity sector.

    ``a=None`` selects the constant-mass surrogate m = m0.
    """
    lower, diag, upper = hamiltonian_bands(a, m0, mu, sector, grid)
    return np.diag(diag) + np.diag(upper, 1) + np.diag(lower, -1)


def pdm_hamiltonian_apply_poly(p: RationalPoly, a, m0, mu) -> RationalPoly:
    """Exact H p for polynomial p, using w D(w p) = (1/m)'/2 p + (1/m) D p.

    ``a=None`` selects constant mass.  All arithmetic is rational.
    """
    m0 = exact(m0)
    if a is None:
        sigma = RationalPoly([1 / m0])
    else:
        a = exact(a)
        sigma = RationalPoly([1 / m0, 0, 1 / (a * a * m0)])
    half = Fraction(1, 2)
    inner = sigma.derivative() * p * half + sigma * dunkl_apply_poly(p, mu)
    return dunkl_apply_poly(inner, mu) * (-half)
