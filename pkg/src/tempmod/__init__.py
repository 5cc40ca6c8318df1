"""p-modulus of time-respecting path families on temporal graphs."""

from .tempgraph import (ContactParseError, EdgeRecord, StaticEdge, StaticGraph,
                        TemporalGraph, aggregate, largest_weakly_connected_component,
                        parse_contact_sequence, serialize_contact_sequence)
from .penalty import (InfeasibleObjectError, PenaltyConfig, PhiSpec, UsageRow,
                      phi_eval, psi, rho_length, search_length, usage_row)
from .paths import (EnumeratedFamily, PathStep, SearchContext, TemporalPath,
                    enumerate_trp, min_length_trp)
from .solver import (DegenerateDualsError, Density, EnumerationOverflowError,
                     FamilySpec, IterationBudgetError, ModulusError,
                     ModulusResult, RestrictedSolveError, brute_force_modulus,
                     conjugate_exponent, delta_p_metric, dual_recover, energy,
                     expected_overlap, lambda_sweep, modulus, p_sweep,
                     restricted_solve, sigma_derivative_check)
from ._search import active_backend

__version__ = "0.1.0"

__all__ = [
    "ContactParseError", "EdgeRecord", "StaticEdge", "StaticGraph",
    "TemporalGraph", "aggregate", "largest_weakly_connected_component",
    "parse_contact_sequence", "serialize_contact_sequence",
    "InfeasibleObjectError", "PenaltyConfig", "PhiSpec", "UsageRow",
    "phi_eval", "psi", "rho_length", "search_length", "usage_row",
    "EnumeratedFamily", "PathStep", "SearchContext", "TemporalPath",
    "enumerate_trp", "min_length_trp",
    "DegenerateDualsError", "Density", "EnumerationOverflowError",
    "FamilySpec", "IterationBudgetError", "ModulusError", "ModulusResult",
    "RestrictedSolveError", "brute_force_modulus", "conjugate_exponent",
    "delta_p_metric", "dual_recover", "energy", "expected_overlap",
    "lambda_sweep", "modulus", "p_sweep", "restricted_solve",
    "sigma_derivative_check", "active_backend",
]
