import cmath
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import to_sympy
from qesdunkl.dunkl import ParitySector
from qesdunkl.pdm_qes import (PdmModel, SingularDenominator, WavefunctionPoly, alpha_from_model,
                              assemble_wavefunction, coefficient_recursion, energy_from_constraint,
                              energy_level, mass_profile, qes_solvability, solve_level, spectrum)
from qesdunkl.oracle_audit import symbolic_residual
from qesdunkl.poly_ops import ParamExpr

F = Fraction
Z, E, MU, A, M0 = sp.symbols("z E mu a m0")


def sympy_alpha(mu, a, m0, s, energy=E):
    return (-(m0 + 1 / a ** 2) / 2, 1, -mu, (1 + 2 * mu) / 4 + energy * m0 * a ** 2 / 2,
            mu / 4 * (1 - s))


def sympy_model(g, alpha):
    a1, a2, a3, a4, a5 = alpha
    return sp.expand((Z ** 2 - Z ** 3) * sp.diff(g, Z, 2)
                     + ((a2 - a3) * Z ** 2 + (a1 + a3) * Z) * sp.diff(g, Z) + (a4 * Z + a5) * g)


models = st.builds(PdmModel,
                   st.fractions(min_value=F(1, 4), max_value=3, max_denominator=4),
                   st.fractions(min_value=F(1, 4), max_value=3, max_denominator=4),
                   st.fractions(min_value=F(-2, 5), max_value=2, max_denominator=5))


class TestModel:
    def test_mass_profile(self):
        m = PdmModel(2, 3)
        assert mass_profile(0.0, m) == 3.0
        assert mass_profile(2.0, m) == pytest.approx(1.5)
        vals = [mass_profile(x, m) for x in (1, 10, 100, 1000)]
        assert vals == sorted(vals, reverse=True) and vals[-1] < 1e-4

    def test_validation(self):
        with pytest.raises(ValueError):
            PdmModel(0, 1)
        with pytest.raises(ValueError):
            PdmModel(1, -1)
        with pytest.raises(ValueError):
            PdmModel(1, 1, F(-1, 2))

    def test_alpha_examples(self):
        al = alpha_from_model(PdmModel(1, 1, 0), None, "even")
        assert al.values()[:3] == (-1, 1, 0) and al.a5 == 0
        assert al.a4 == F(1, 4) + ParamExpr.symbol("E") / 2
        assert alpha_from_model(PdmModel(1, 1, F(1, 2)), 0, "odd").a5 == F(1, 4)


class TestEnergies:
    def test_examples(self):
        assert energy_level(0, PdmModel(1, 1, 0)) == F(-1, 2)
        assert energy_level(1, PdmModel(1, 1, 0)) == F(-5, 2)
        assert [lv.energy for lv in spectrum(PdmModel(1, 1, 0), 2).levels] == [F(-1, 2), F(-5, 2), F(-1, 2)]
        assert [lv.energy for lv in spectrum(PdmModel(1, 1, 1), 1).levels] == [F(-3, 2), F(-11, 2)]

    @pytest.mark.parametrize("n", range(6))
    def test_against_sympy_overflow_root(self, n):
        # coefficient of z^(n+1) in L z^n must vanish
        lead = sp.Poly(sympy_model(Z ** n, sympy_alpha(MU, A, M0, 1)), Z).coeff_monomial(Z ** (n + 1))
        root = sp.solve(lead, E)[0]
        assert sp.simplify(root - to_sympy(energy_level(n, PdmModel.symbolic()))) == 0

    @pytest.mark.parametrize("n", range(11))
    def test_constraint_root_identical(self, n):
        m = PdmModel.symbolic()
        assert energy_level(n, m) == energy_from_constraint(n, m)

    def test_bad_level(self):
        with pytest.raises(ValueError):
            energy_level(-1, PdmModel(1, 1))


class TestRecursion:
    def test_first_excited(self):
        w = solve_level(PdmModel(1, 1, 0), 1)
        assert w.b == (1, -1) and w.next_coefficient == 0 and w.energy == F(-5, 2)

    def test_ground(self):
        w = solve_level(PdmModel(1, 1, 0), 0)
        assert w.b == (1,)
        assert symbolic_residual(alpha_from_model(PdmModel(1, 1, 0), w.energy), 0, w.b).is_zero()

    def test_wrong_vector_not_annihilated(self):
        al = alpha_from_model(PdmModel(1, 1, 0), F(-5, 2))
        assert not symbolic_residual(al, 1, (1, 0)).is_zero()

    @settings(max_examples=25, deadline=None)
    @given(models, st.integers(0, 5))
    def test_state_annihilated_by_sympy_operator(self, model, n):
        w = solve_level(model, n)
        al = sympy_alpha(*(to_sympy(v) for v in (model.mu, model.a, model.m0)), 1,
                         energy=to_sympy(w.energy))
        g = sum(to_sympy(c) * Z ** k for k, c in enumerate(w.b))
        assert sympy_model(g, al) == 0
        assert w.next_coefficient == 0

    def test_degenerate_free_step(self):
        w = solve_level(PdmModel(1, 1, 0), 2)
        assert w.degenerate_steps == (1,) and w.restarts == ()
        assert symbolic_residual(alpha_from_model(PdmModel(1, 1, 0), w.energy), 2, w.b).is_zero()

    def test_degenerate_restart(self):
        w = solve_level(PdmModel(1, 1, 0), 3)
        assert w.restarts == (1,) and w.b[:2] == (0, 0)
        assert symbolic_residual(alpha_from_model(PdmModel(1, 1, 0), w.energy), 3, w.b).is_zero()

    def test_strict_raises(self):
        with pytest.raises(SingularDenominator) as err:
            solve_level(PdmModel(1, 1, 0), 3, strict=True)
        assert err.value.k == 1

    def test_symbolic_recursion_ratio(self):
        from qesdunkl.sl2_qes import AlphaParams, impose_constraint
        al = impose_constraint(AlphaParams.symbolic(), 1)
        w = coefficient_recursion(al, 1)
        assert w.b[1] == (al.a2 - al.a3) / (al.a1 + al.a3 + al.a5)
        assert w.next_coefficient == 0

    def test_printed_gap_vanishes_only_at_level_one(self):
        from qesdunkl.sl2_qes import AlphaParams, impose_constraint
        assert all(g == 0 for g in coefficient_recursion(impose_constraint(AlphaParams.symbolic(), 1), 1).printed_gap)
        gap = coefficient_recursion(impose_constraint(AlphaParams.symbolic(), 2), 2).printed_gap
        assert all(g != 0 for g in gap)


class TestSolvability:
    @pytest.mark.parametrize("n", range(6))
    def test_even_always(self, n):
        assert qes_solvability(n, PdmModel(F(3, 2), 2, F(1, 3)), "even") == (True, 0)

    def test_odd_half(self):
        m = PdmModel(ParamExpr.symbol("a"), ParamExpr.symbol("m0"), F(1, 2))
        ok, res = qes_solvability(1, m, "odd")
        al = alpha_from_model(m, energy_level(1, m), "odd")
        assert not ok and res == F(1, 4) * (al.a1 + al.a3 + F(1, 4))

    def test_odd_mu_zero(self):
        assert qes_solvability(2, PdmModel(1, 1, 0), "odd")[0]

    def test_spectrum_flags(self):
        rows = spectrum(PdmModel(1, 1, F(1, 2)), 2, "odd").rows()
        assert [r["solvable"] for r in rows] == [False, False, False]


class TestAssembly:
    def test_constant(self):
        w = WavefunctionPoly((F(1),), 0, F(-1, 2))
        assert all(assemble_wavefunction(w, x) == -1 for x in (-3.0, 0.0, 2.5))

    def test_unimodular_time(self):
        w = solve_level(PdmModel(1, 1, 0), 1)
        for t in (0.3, 2.0, -7.1):
            assert abs(assemble_wavefunction(w, 1.3, t)) == pytest.approx(abs(assemble_wavefunction(w, 1.3)))
            assert assemble_wavefunction(w, 1.3, t) == pytest.approx(
                cmath.exp(-1j * float(w.energy) * t) * assemble_wavefunction(w, 1.3))

    def test_forms(self):
        w = solve_level(PdmModel(1, 1, 0), 1)
        assert assemble_wavefunction(w, 2.0, form="printed") == 3
        assert assemble_wavefunction(w, 2.0) == -5
        with pytest.raises(ValueError):
            assemble_wavefunction(w, 0.0, form="other")

    def test_odd_prefactor(self):
        w = WavefunctionPoly((F(1),), 0, F(0), ParitySector.ODD)
        assert assemble_wavefunction(w, 2.0) == -2
