"""Quasi-derivative regularization toolkit for 1D Schrodinger expressions.

Numerical machinery for the expression -u'' + qu + i[(ru)' + ru'] with
distributional complex coefficients q = s + Q': piecewise-exact coefficient
algebra, first-order propagation in quasi-derivative coordinates, Lagrange
brackets and quadratic forms, constructive condition checkers, a shooting
eigensolver on finite intervals and a window-growth null-space probe.
"""

from .coeffs import (
    CoefficientField,
    PiecewisePoly,
    bump,
    derive_G,
    from_callable,
    pos_neg_parts,
    smoothstep,
)
from .conditions import (
    CutoffSequence,
    IntervalScheme,
    RhoMap,
    WeightFunction,
    build_cutoff,
    build_rho,
    check_growth,
    check_intervals,
    check_m,
    cutoff_invariants,
    verify_caccioppoli,
)
from .errors import (
    BadSchemeError,
    DiscontinuousQuasiDerivativeError,
    NonRealError,
    OverflowUnrecoverableError,
    QschroError,
    SideMismatchError,
    StepUnderflowError,
    UnsupportedTestFunctionError,
    ZeroNormError,
)
from .lagrange_forms import (
    BracketValue,
    FormValue,
    Sector,
    bracket,
    bracket_constancy_residual,
    form_vs_operator_check,
    lagrange_residual,
    numerical_range_sample,
    quadratic_form,
)
from .propagate import FundamentalSystem, Trajectory, fundamental, integrate, pair_integral
from .quasi import (
    ADJOINT,
    DIRECT,
    QuasiState,
    ShinZettlSystem,
    apply_l,
    apply_l_atoms,
    assemble,
    product_rule_check,
    quasi_derivatives,
)
from .reports import ConditionReport
from .spectral import (
    BoundaryCondition,
    CharValue,
    EigenResult,
    ProbeReport,
    characteristic,
    eigenfunction_residual,
    eigenvalues,
    null_probe,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # coefficients
    "PiecewisePoly",
    "CoefficientField",
    "bump",
    "smoothstep",
    "from_callable",
    "derive_G",
    "pos_neg_parts",
    # system / quasi-derivatives
    "DIRECT",
    "ADJOINT",
    "ShinZettlSystem",
    "QuasiState",
    "assemble",
    "quasi_derivatives",
    "apply_l",
    "apply_l_atoms",
    "product_rule_check",
    # propagation
    "Trajectory",
    "FundamentalSystem",
    "integrate",
    "fundamental",
    "pair_integral",
    # brackets and forms
    "BracketValue",
    "FormValue",
    "Sector",
    "bracket",
    "bracket_constancy_residual",
    "lagrange_residual",
    "quadratic_form",
    "form_vs_operator_check",
    "numerical_range_sample",
    # condition checkers
    "WeightFunction",
    "RhoMap",
    "CutoffSequence",
    "IntervalScheme",
    "ConditionReport",
    "check_m",
    "check_growth",
    "build_rho",
    "build_cutoff",
    "cutoff_invariants",
    "check_intervals",
    "verify_caccioppoli",
    # spectra and the probe
    "BoundaryCondition",
    "CharValue",
    "EigenResult",
    "ProbeReport",
    "characteristic",
    "eigenvalues",
    "eigenfunction_residual",
    "null_probe",
    # errors
    "QschroError",
    "NonRealError",
    "DiscontinuousQuasiDerivativeError",
    "StepUnderflowError",
    "SideMismatchError",
    "ZeroNormError",
    "UnsupportedTestFunctionError",
    "BadSchemeError",
    "OverflowUnrecoverableError",
]
