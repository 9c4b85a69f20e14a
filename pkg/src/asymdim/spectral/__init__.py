"""Graph Laplacian spectra and the spectral invariants built on them."""

from .invariants import (
    DEFAULT_SPECTRAL, A0Report, BettiEstimate, DilatationResult, ExhaustionPlan, HeatVolumeReport, NSEstimate,
    SpectralConfig, betti0, counting, counting_interpolated, dilatation_equivalence,
    dirichlet_lambda1, dyadic_t, exhaustion_spectra, heat_trace, heat_trace0, heat_volume_bound_check,
    isoperimetric_constant, laplace_transform_check, ns_numbers, verify_a0_eq_dinf,
)
from .laplacian import (
    DENSE_BUDGET, ZERO_TOL, LaplacianOperator, WeightedSpectrum, cycle_eigenvalues, graph_laplacian,
    read_spectrum, spectrum, torus_spectrum, write_spectrum,
)

__all__ = [
    "DEFAULT_SPECTRAL", "dyadic_t", "cycle_eigenvalues", "A0Report", "BettiEstimate", "DilatationResult", "ExhaustionPlan", "HeatVolumeReport",
    "NSEstimate", "SpectralConfig", "betti0", "counting", "counting_interpolated",
    "dilatation_equivalence", "dirichlet_lambda1", "exhaustion_spectra", "heat_trace",
    "heat_trace0", "heat_volume_bound_check", "isoperimetric_constant",
    "laplace_transform_check", "ns_numbers", "verify_a0_eq_dinf", "DENSE_BUDGET", "ZERO_TOL",
    "LaplacianOperator", "WeightedSpectrum", "graph_laplacian", "read_spectrum", "spectrum",
    "torus_spectrum", "write_spectrum",
]
