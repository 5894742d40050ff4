"""Quasi-exactly solvable Dunkl-Schroedinger equation with position-dependent mass."""
from .dunkl import (DunklParam, GridFunction, HalfGrid, InvalidGrid, ParitySector,
                    dunkl_apply_grid, dunkl_apply_poly, dunkl_hamiltonian_grid,
                    parity_decompose, pdm_hamiltonian_apply_poly, reflection_apply)
from .oracle_audit import (AuditCheck, AuditReport, ConvergenceFailure, audit_report,
                           grid_eigen, grid_residual, rederive_z_operator, symbolic_residual)
from .pdm_qes import (PdmModel, SingularDenominator, WavefunctionPoly, alpha_from_model,
                      assemble_wavefunction, coefficient_recursion, energy_level,
                      qes_solvability, solve_level, spectrum)
from .poly_ops import (DiffOperator2, MPoly, OddCoefficient, ParamExpr, RationalPoly,
                       gauge_similarity, op_apply, op_substitute_quadratic, sym)
from .sl2_qes import (AlphaParams, ConstraintViolated, Sl2Coefficients, build_qes_operator,
                      determinant_condition, generator_matrix, match_model_coefficients,
                      model_operator, qes_matrix)

__version__ = "0.1.0"
