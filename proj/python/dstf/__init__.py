"""Dempster-Shafer belief-function algebra and factorization testing."""

from dstf._core import (
    MassFunction,
    parse_model,
    vacuous,
    verify_decomposition,
    f_measure,
    check_noninfluence,
    check_cond_independence,
    ratio_obstruction,
    chi_square_pvalue,
    degrees_of_freedom,
    generate_records,
    empirical_mass,
    test_structure,
    test_stepwise,
)

__all__ = [
    "MassFunction",
    "parse_model",
    "vacuous",
    "verify_decomposition",
    "f_measure",
    "check_noninfluence",
    "check_cond_independence",
    "ratio_obstruction",
    "chi_square_pvalue",
    "degrees_of_freedom",
    "generate_records",
    "empirical_mass",
    "test_structure",
    "test_stepwise",
]
