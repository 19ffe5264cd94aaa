"""Symbolic thermodynamics toolkit: exterior-calculus verification on
contact charts, axiomatic entropy from accessibility orders, and Galois
connections between entropy systems."""

from .expr import (
    Chart,
    DomainError,
    Expr,
    ExprError,
    ParseError,
    UnknownSymbolError,
    ZeroResult,
    ZeroTestConfig,
    ZeroVerdict,
    differentiate,
    exp,
    is_zero,
    ln,
    parse,
)
from .forms import (
    Confidence,
    ContactResult,
    ContactStatus,
    DarbouxShape,
    FactorStatus,
    Form,
    FrobeniusResult,
    FrobeniusStatus,
    IntegratingFactorResult,
    SmoothMap,
    SymmetryResult,
    SymmetryStatus,
    contact_check,
    contact_symmetry_check,
    darboux_shape,
    exterior_derivative,
    frobenius_check,
    pullback,
    verify_integrating_factor,
    wedge,
)
from .thermo import (
    AdiabaticStatus,
    EndpointPair,
    LegendreSpec,
    PathSegment,
    ProcessPath,
    QuadratureConfig,
    ThermoChart,
    ThermoError,
    adiabatic_entropy_check,
    check_legendre,
    cycle_audit,
    first_law_balance,
    first_law_form,
    heat_form,
    legendre_transform,
    maxwell_relations,
    path_integral,
    work_form,
)
from .access import (
    Accessibility,
    AccessError,
    AxiomConfig,
    AxiomReport,
    AxiomStatus,
    CompositeState,
    ConstructionImpossible,
    EdgeRelation,
    EntropyFn,
    EntropyOracle,
    MemoizedOracle,
    Relation,
    StateSpace,
    calibrate,
    check_axioms,
    comparison_hypothesis,
    construct_entropy,
    derived_relations,
    verify_entropy,
)
from .galois import (
    AdjointResult,
    GaloisError,
    GaloisPair,
    GaloisResult,
    MonotoneMap,
    Poset,
    check_galois,
    check_monotone,
    closure_report,
    landauer_check,
    left_adjoint,
    poset_from_entropy,
    right_adjoint,
)

__version__ = "0.1.0"
