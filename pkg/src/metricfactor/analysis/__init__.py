from .certificates import (
    CERTIFIERS,
    AnalyticL2Modulus,
    CollapseCertificate,
    ConstantModulus,
    MidpointChoice,
    NumericalModulus,
    diamond_collapse_certificate,
    laakso_collapse_certificate,
    lower_bound_solve,
    midpoint_selector,
    provider_for,
    tree_collapse_certificate,
)
from .factorization import FactorizationReport, check_hypothesis, factorization_report, normalized
from .search import SearchBudget, distortion_search

__all__ = [
    "CERTIFIERS",
    "AnalyticL2Modulus",
    "CollapseCertificate",
    "ConstantModulus",
    "FactorizationReport",
    "MidpointChoice",
    "NumericalModulus",
    "SearchBudget",
    "check_hypothesis",
    "diamond_collapse_certificate",
    "distortion_search",
    "factorization_report",
    "laakso_collapse_certificate",
    "lower_bound_solve",
    "midpoint_selector",
    "normalized",
    "provider_for",
    "tree_collapse_certificate",
]
