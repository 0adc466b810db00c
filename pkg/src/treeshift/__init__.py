"""Numerically verified toolkit for left-invertible weighted shifts on rooted trees."""

from .balanced import (
    BetaWeights,
    KomReport,
    RatioBoundsReport,
    WoldDecomposition,
    balanced_inner_product_check,
    beta_from_orbit,
    hinf_membership,
    kom_characterization_check,
    ratio_bounds_check,
    weighted_toeplitz_norm,
    wold_decompose,
)
from .harmonics import (
    ConvergenceReport,
    FejerSymbol,
    RotationDiagonal,
    cesaro_convergence_experiment,
    circle_integral_check,
    fejer_symbol,
    fejer_truncate,
    rotate_symbol,
    rotate_vector,
    rotation_diagonal,
)
from .model import (
    CoeffSeq,
    CoefficientSystem,
    EigenResidualReport,
    KernelEval,
    SpectralRadiusEstimate,
    analytic_coeffs,
    eigenvector_residual,
    expand_layers,
    kernel_matrix,
    reconstruct,
    spectral_radius_estimate,
)
from .multiplier import (
    BOUNDED,
    DIVERGENT,
    MembershipReport,
    OpSymbol,
    ScalarSymbol,
    VerificationReport,
    commutant_check,
    compressed_multiplication_norm,
    convolve,
    convolve_with_coeffs,
    extract_symbol,
    indicator_symbol,
    membership_diagnostic,
    product_law_check,
    scalar_equivalence_check,
    scalar_mult_adjoint,
    scalar_mult_apply,
    two_ray_admissible_symbol,
    two_ray_divergence_witness,
    two_ray_symbol,
    unit_symbol,
)
from .shift import (
    L2Vector,
    SeparatedBasis,
    ShiftOperator,
    apply_adjoint,
    apply_left_inverse,
    apply_left_inverse_adjoint,
    apply_shift,
    is_balanced,
    left_inverse_matrix,
    project_kernel,
    separated_kernel_basis,
    shift_matrix,
)
from .tree import (
    PathSubtree,
    Tree,
    TreeSpec,
    WeightMap,
    balanced_double_ray,
    build_tree,
    enumerate_paths,
    generate_example,
    generate_random_tree,
    lambda_product,
    load_tree_spec,
    save_tree_spec,
    tree_to_spec,
)

__version__ = "0.1.0"
