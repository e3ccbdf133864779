"""Spin-s Bell cat states, their outcome correlations, and a three-direction Bell-type test."""

from .errors import (
    BellCatError,
    ConsistencyError,
    DegenerateSpectrumError,
    NumericalError,
    UnderflowError,
    UnsupportedModelError,
)
from .fullspace import CorrelationReport, extended_bi_check, full_correlation, full_correlation_via_eigenbasis
from .lhv import LhvModel, PhaseModel, SignModel, builtin_models, estimate, exhaustive_check
from .scs import (
    correlation_closed_form,
    scaled_subspace_correlation,
    scs_pair,
    subspace_correlation,
    subspace_elements,
)
from .spin import Direction, Spin, eigensystem, projection_operator, spin_operators
from .states import CatState, Polarization, density_decomposition, make_cat_state
from .ubi import SearchConfig, UbiReport, equatorial_ps, max_violation_search, ubi_local, ubi_quantum

__all__ = [
    "BellCatError", "CatState", "ConsistencyError", "CorrelationReport", "DegenerateSpectrumError",
    "Direction", "LhvModel", "NumericalError", "PhaseModel", "Polarization", "SearchConfig",
    "SignModel", "Spin", "UbiReport", "UnderflowError", "UnsupportedModelError", "builtin_models",
    "correlation_closed_form", "density_decomposition", "eigensystem", "equatorial_ps", "estimate",
    "exhaustive_check", "extended_bi_check", "full_correlation", "full_correlation_via_eigenbasis",
    "make_cat_state", "max_violation_search", "projection_operator", "scaled_subspace_correlation",
    "scs_pair", "spin_operators", "subspace_correlation", "subspace_elements", "ubi_local", "ubi_quantum",
]
