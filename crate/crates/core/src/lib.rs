//! KL divergence between multivariate Gaussians and the dimension-free
//! bounds that relate its two directions.
//!
//! * [`lambert_w`]: real branches of the Lambert W function.
//! * [`scalar`]: the roots `w1 <= 1 <= w2` of `x - ln x = 1 + t` and the
//!   scalar maps built from them.
//! * [`gaussian`]: validated Gaussians, closed-form KL, affine maps.
//! * [`bounds`]: supremum / infimum of reverse KL at a forward budget and the
//!   relaxed triangle bound.
//! * [`extremal`]: pairs that attain those bounds.
//! * [`verify`]: randomized and grid-based falsification harness.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod document;
pub mod error;
pub mod extremal;
pub mod gaussian;
pub mod lambert_w;
pub mod scalar;
pub mod verify;

pub use bounds::{
    dual_roundtrip, inf_reverse_kl, nary_inf_bound, nary_sup_bound, sup_reverse_kl, sup_reverse_kl_series,
    triangle_bound, triangle_bound_lambert_form, triangle_bound_series, BoundKind, BoundResult,
};
pub use document::{gaussian_to_json, pair_to_json, parse_gaussian, parse_pair, GaussianDoc};
pub use error::{Error, Result};
pub use extremal::{
    embed_in_frame, extremal_inf_pair, extremal_sup_pair, perturbation_probe, ExtremalKind, ExtremalPair,
    ProbeOutcome,
};
pub use gaussian::{
    apply_affine, kl, kl_to_standard, make_gaussian, spectral, symmetric_spectrum, whitening_map, AffineMap,
    Gaussian, Spectrum,
};
pub use lambert_w::{lambert_w, lambert_w_derivative, Branch};
pub use scalar::{f, root_oracle, w1, w2, EpsilonBudget, Side};
pub use verify::{Sense, TrialRecord, VerificationReport};
