"""Lyapunov exponents of monic centred polynomials against weighted Lyubich measures."""

from .analysis import (
    LyapunovEstimate,
    closed_form_complex,
    closed_form_real,
    comparison_report,
    derivative_report,
    expansion_terms,
    fixed_point_exponent,
    lyapunov_mc,
    lyapunov_tree,
    pressure_scan,
    verify_theorem2,
)
from .backward import branch_fixed_point, preimages
from .measure import (
    EmpiricalMeasure,
    ProbabilityVector,
    full_preimage_measure,
    integrate,
    sample_weighted_lyubich,
)
from .polynomial import PolynomialSpec, normalize_affine
from .render import Viewport, render_julia, write_image
from .series import SeriesTruncation, conjugacy_approx, conjugacy_residual, phi_r, phi_r2, phi_rs

__version__ = "0.1.0"

__all__ = [
    "EmpiricalMeasure",
    "LyapunovEstimate",
    "PolynomialSpec",
    "ProbabilityVector",
    "SeriesTruncation",
    "Viewport",
    "branch_fixed_point",
    "closed_form_complex",
    "closed_form_real",
    "comparison_report",
    "conjugacy_approx",
    "conjugacy_residual",
    "derivative_report",
    "expansion_terms",
    "fixed_point_exponent",
    "full_preimage_measure",
    "integrate",
    "lyapunov_mc",
    "lyapunov_tree",
    "normalize_affine",
    "phi_r",
    "phi_r2",
    "phi_rs",
    "preimages",
    "pressure_scan",
    "render_julia",
    "sample_weighted_lyubich",
    "verify_theorem2",
    "write_image",
]
