//! Numerical invariants of kernel Hilbert modules.
//!
//! The crate is organised by the object being computed:
//!
//! - [`kernel`]: reproducing-kernel families, moments and kernel evaluation;
//! - [`shift`]: unilateral weighted shifts, restrictions of `M_{z^m}` and
//!   equivalence/similarity decisions;
//! - [`bundle`]: Cowen–Douglas metrics, curvature of line bundles and of
//!   frames, and the reducing-lattice verdict;
//! - [`localization`]: quotient dimensions of truncated polynomial modules
//!   and Hilbert–Samuel fitting;
//! - [`model`]: defect operators and characteristic functions of finite
//!   contractions, and the weighted-Bergman norm-ratio obstruction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod error;
pub mod kernel;
pub mod localization;
pub mod model;
pub mod numeric;
pub mod shift;
pub mod wirtinger;

pub use bundle::{
    bundle_curvature, bundle_curvature_with, grammian, line_curvature, metric_h, power_frame,
    power_frame_via_roots, reducing_curvatures, reducing_curvatures_at, CurvatureMethod,
    CurvatureOptions, CurvatureReport, Frame, LatticeVerdict, LineMethod, RadialMetric,
};
pub use error::{Error, Result};
pub use kernel::{
    eigenvector_residual, kernel_eval, kernel_series, moment, DomainShape, EigenCheck, Family,
    KernelSpec, KernelValue, MomentSequence, PointInDomain, Polynomial, TailRule,
};
pub use localization::{
    hilbert_samuel, quotient_dim, vanishing_submodule, HilbertSamuelFit, QuotientDim,
    TruncatedModule,
};
pub use model::{
    char_function, char_function_variant, defect_operators, localize_multiplier,
    quasi_similarity_ratio, CharFnSample, CharFnVariant, FiniteContraction, HolomorphicSymbol,
    Obstruction, QuasiSimilarity,
};
pub use numeric::C64;
pub use shift::{
    coordinate_slice_shift, restriction_shift, shift_kernel_metric, similarity_intertwiner,
    subspace_kernel, unitarily_equivalent, Equivalence, RationalWeightRule, ShiftDescriptor,
    SimilarityVerdict, WeightRule, WeightedShift,
};
