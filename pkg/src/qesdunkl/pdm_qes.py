"""The Dunkl position-dependent-mass model and its quasi-exact solutions.

Mass profile m(x) = a^2 m0 / (a^2 + x^2), hbar = 1.  In z = -x^2/a^2 the
problem becomes the sl(2) model operator of :mod:`qesdunkl.sl2_qes` with

    alpha1 = -(m0 + 1/a^2)/2,  alpha2 = 1,  alpha3 = -mu,
    alpha4 = (1 + 2 mu)/4 + E m0 a^2 / 2,  alpha5 = (mu/4)(1 - s).
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction

from .dunkl import DunklParam, ParitySector
from .poly_ops import ParamExpr, RationalPoly, exact, simplify_scalar, sym
from .sl2_qes import (AlphaParams, _level, determinant_condition, match_model_coefficients,
                      qes_matrix)

HBAR = 1


class SingularDenominator(ArithmeticError):
    def __init__(self, k: int, detail: str = ""):
        self.k = k
        super().__init__(f"recursion denominator vanishes at k={k}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class PdmModel:
    """Model parameters; each may be exact (Fraction) or symbolic (ParamExpr)."""

    a: object
    m0: object
    mu: object = Fraction(0)

    def __post_init__(self):
        for name in ("a", "m0", "mu"):
            object.__setattr__(self, name, exact(getattr(self, name)))
        DunklParam(self.mu)
        for name in ("a", "m0"):
            v = getattr(self, name)
            if not isinstance(v, ParamExpr) and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")

    @classmethod
    def symbolic(cls) -> "PdmModel":
        return cls(sym("a"), sym("m0"), sym("mu"))

    def as_dict(self) -> dict:
        return {"a": str(self.a), "m0": str(self.m0), "mu": str(self.mu), "hbar": str(HBAR)}


def mass_profile(x: float, model: PdmModel) -> float:
    a = float(model.a)
    return a * a * float(model.m0) / (a * a + x * x)


def alpha_from_model(model: PdmModel, E=None, sector=ParitySector.EVEN) -> AlphaParams:
    """alpha_1..alpha_5 for the model; ``E=None`` keeps the energy symbolic."""
    sector = ParitySector.parse(sector)
    E = sym("E") if E is None else exact(E)
    a, m0, mu = model.a, model.m0, model.mu
    return AlphaParams(
        a1=simplify_scalar(-(m0 + 1 / (a * a)) / 2),
        a2=Fraction(1),
        a3=simplify_scalar(-mu),
        a4=simplify_scalar((1 + 2 * mu) / 4 + E * m0 * a * a / (2 * HBAR)),
        a5=simplify_scalar(mu / 4 * (1 - sector.s)),
        sector=sector,
    )


def energy_level(n: int, model: PdmModel):
    """E_n = 2/(m0 a^2) (n^2 - n(2 + mu) - (1 + 2 mu)/4), hbar = 1."""
    n = _level(n)
    mu = model.mu
    return simplify_scalar(2 * HBAR / (model.m0 * model.a ** 2)
                           * (n * n - n * (2 + mu) - (1 + 2 * mu) / 4))


def energy_from_constraint(n: int, model: PdmModel, sector=ParitySector.EVEN):
    """Root in E of the level-n quantization constraint (independent of the closed form)."""
    alpha = alpha_from_model(model, None, sector)
    _, constraint = match_model_coefficients(alpha, n)
    return simplify_scalar(ParamExpr.coerce(constraint).solve_linear("E"))


def derived_recursion_numerator(alpha: AlphaParams, k: int):
    """-(alpha4 + k (alpha2 - alpha3 - k + 1)): minus the z^(k+1) coefficient from b_k."""
    return -(alpha.a4 + k * (alpha.a2 - alpha.a3 - k + 1))


def recursion_denominator(alpha: AlphaParams, k: int):
    """(k + 1)(k + alpha1 + alpha3) + alpha5: the z^(k+1) coefficient from b_(k+1)."""
    return (k + 1) * (k + alpha.a1 + alpha.a3) + alpha.a5


def printed_recursion_numerator(alpha: AlphaParams, k: int):
    """Numerator of the published coefficient recursion, transcribed for comparison."""
    half = Fraction(1, 2)
    return (k * (k - 1 - alpha.a2 + alpha.a3 + k * half)
            + (alpha.a2 - alpha.a3) - k * k * half)


@dataclass(frozen=True)
class WavefunctionPoly:
    """Coefficients b_0..b_n of the z-space polynomial sum b_k z^k.

    ``next_coefficient`` is b_(n+1) from one more recursion step; it is 0
    exactly when the level closes.  ``degenerate_steps`` lists the k where a
    vanishing denominator left b_(k+1) undetermined (set to 0), and
    ``restarts`` the k where the row for z^(k+1) forced b_0..b_k = 0.
    """

    b: tuple
    level: int
    energy: object = None
    sector: ParitySector = ParitySector.EVEN
    a: object = Fraction(1)
    next_coefficient: object = Fraction(0)
    degenerate_steps: tuple = ()
    restarts: tuple = ()
    printed_gap: tuple = field(default=(), repr=False)

    @property
    def z_poly(self) -> RationalPoly:
        return RationalPoly(self.b)


def coefficient_recursion(alpha: AlphaParams, n: int, *, energy=None, a=Fraction(1),
                          strict: bool = False) -> WavefunctionPoly:
    """Build b_0..b_n from the recursion obtained by collecting powers of z.

    ``b_(k+1) = -[alpha4 + k(alpha2 - alpha3 - k + 1)] / [(k+1)(k + alpha1 + alpha3) + alpha5] * b_k``
    with b_0 = 1 and b_(-1) = 0.

    When a denominator vanishes the row for z^(k+1) reads ``num * b_k = 0``.
    If that already holds, b_(k+1) is free and is set to 0.  Otherwise the row
    forces b_0 = ... = b_k = 0 and the recursion restarts from b_(k+1) = 1.
    ``strict=True`` raises :class:`SingularDenominator` on any vanishing
    denominator instead.
    """
    n = _level(n)
    b = [Fraction(1)]
    degenerate, restarts = [], []
    for k in range(n):
        num = derived_recursion_numerator(alpha, k)
        den = recursion_denominator(alpha, k)
        if den == 0:
            if strict:
                raise SingularDenominator(k, f"numerator*b_k = {num * b[k]}")
            if num * b[k] == 0:
                degenerate.append(k)
                b.append(Fraction(0))
            else:
                restarts.append(k)
                b = [Fraction(0)] * (k + 1) + [Fraction(1)]
            continue
        b.append(simplify_scalar(num / den * b[k]))
    num = derived_recursion_numerator(alpha, n)
    den = recursion_denominator(alpha, n)
    overflow = num * b[n]
    if overflow == 0:
        nxt = Fraction(0)
    elif den == 0:
        nxt = None
    else:
        nxt = simplify_scalar(overflow / den)
    gap = tuple(simplify_scalar(printed_recursion_numerator(alpha, k) - derived_recursion_numerator(alpha, k))
                for k in range(n))
    return WavefunctionPoly(
        b=tuple(simplify_scalar(x) for x in b), level=n, energy=energy,
        sector=alpha.sector or ParitySector.EVEN, a=a, next_coefficient=nxt,
        degenerate_steps=tuple(degenerate), restarts=tuple(restarts), printed_gap=gap,
    )


def solve_level(model: PdmModel, n: int, sector=ParitySector.EVEN, *,
                strict: bool = False) -> WavefunctionPoly:
    """Recursion-built state at E = E_n for a concrete model."""
    sector = ParitySector.parse(sector)
    E = energy_level(n, model)
    alpha = alpha_from_model(model, E, sector)
    return coefficient_recursion(alpha, n, energy=E, a=model.a, strict=strict)


def assemble_wavefunction(w: WavefunctionPoly, x: float, t: float = 0.0,
                          form: str = "substituted") -> complex:
    """psi(x, t) = exp(-i E t) psi~(x).

    ``form="substituted"``: psi~(x) = -(1/a^2) x^((1-s)/2) sum b_k (-x^2/a^2)^k,
    the z-space solution rewritten in x.
    ``form="printed"``: psi~(x) = -(1/a^2) x^((1-s)/2) sum b_k x^(2k), the
    published layout, kept for comparison.
    """
    a = float(w.a)
    if form == "substituted":
        z = -x * x / (a * a)
    elif form == "printed":
        z = x * x
    else:
        raise ValueError(f"unknown form {form!r}")
    poly = sum(float(c) * z ** k for k, c in enumerate(w.b))
    psi = -poly / (a * a)
    if w.sector is ParitySector.ODD:
        psi *= x
    E = 0.0 if w.energy is None else float(w.energy)
    return cmath.exp(-1j * E * t) * psi


def qes_solvability(n: int, model: PdmModel, sector=ParitySector.EVEN):
    """``(satisfied, residual)``: the determinant of the level-n matrix at E = E_n."""
    sector = ParitySector.parse(sector)
    alpha = alpha_from_model(model, energy_level(n, model), sector)
    m = qes_matrix(alpha, n)
    residual = determinant_condition(m)
    return residual == 0, residual


@dataclass(frozen=True)
class SpectrumLevel:
    n: int
    energy: object
    sector: ParitySector
    constraint_residual: object
    solvable: bool
    solvability_residual: object


@dataclass(frozen=True)
class SpectrumResult:
    model: PdmModel
    levels: tuple

    def rows(self) -> list[dict]:
        return [{"n": lv.n, "E_n": str(lv.energy), "sector": str(lv.sector),
                 "solvable": lv.solvable, "residual": str(lv.solvability_residual),
                 "constraint_residual": str(lv.constraint_residual)}
                for lv in self.levels]


def spectrum(model: PdmModel, n_max: int, sector=ParitySector.EVEN) -> SpectrumResult:
    """Levels n = 0..n_max; unsolvable levels are flagged, not dropped."""
    sector = ParitySector.parse(sector)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    levels = []
    for n in range(n_max + 1):
        E = energy_level(n, model)
        alpha = alpha_from_model(model, E, sector)
        _, constraint = match_model_coefficients(alpha, n)
        ok, res = qes_solvability(n, model, sector)
        levels.append(SpectrumLevel(n, E, sector, simplify_scalar(constraint), ok, res))
    return SpectrumResult(model, tuple(levels))

