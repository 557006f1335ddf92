"""Lattice algebras of a Euclidean scalar field.

Thin Python layer over the C++ core: flat torus backgrounds, exact Green
kernels, parametrices with Hadamard-subtracted smooth remainders,
deformation (star) products, normal-ordered powers, singular-kernel
extension, and Monte Carlo / pairing-enumeration oracles.
"""

from _euwick import (  # noqa: F401
    AlmostHomogeneousFit,
    BackgroundGeometry,
    ContractionKernel,
    Functional,
    HadamardExpansion,
    Lattice,
    Parametrix,
    RadialKernel,
    build_lattice,
    change_of_parametrix,
    elliptic_operator,
    exact_green_kernel,
    extrapolated_pair,
    fit_almost_homogeneous,
    functional_distance,
    isserlis_moment,
    leibniz_residual,
    linear_field,
    local_monomial,
    make_torus,
    mc_expectation,
    pointwise_product,
    radial_quadrature,
    scale_background,
    scaled_wick_value,
    scaling_degree,
    star_product,
    unique_extension,
    wick_power,
)

__all__ = [
    "AlmostHomogeneousFit",
    "BackgroundGeometry",
    "ContractionKernel",
    "Functional",
    "HadamardExpansion",
    "Lattice",
    "Parametrix",
    "RadialKernel",
    "build_lattice",
    "change_of_parametrix",
    "elliptic_operator",
    "exact_green_kernel",
    "extrapolated_pair",
    "fit_almost_homogeneous",
    "functional_distance",
    "isserlis_moment",
    "leibniz_residual",
    "linear_field",
    "local_monomial",
    "make_torus",
    "mc_expectation",
    "pointwise_product",
    "radial_quadrature",
    "scale_background",
    "scaled_wick_value",
    "scaling_degree",
    "star_product",
    "unique_extension",
    "wick_power",
]

__version__ = "0.1.0"
