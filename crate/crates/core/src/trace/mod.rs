//! Test functions on the half-space and the evaluators of the affine trace
//! inequality, its adapted convex function and the supporting lemmas.

pub mod cf;
pub mod checks;
pub mod function;
pub mod lemma;
pub mod norms;

pub use cf::{build_cf, CfData};
pub use checks::{
    affine_ratio, appendix_chain, balanced_radial_extremal, classical_ordering, holder_check,
    lemma2_check, lemma2_for, proof_chain, proof_chain_for, verify_affine, verify_affine_with,
    young_form, ChainReport, Lemma2, Tolerances,
};
pub use function::{
    c_extremal, compact_bump, extremal, gaussian_sum, gl_pullback, random_orthogonal, separable,
    AffineFrame, Chart, ExtremalParams, Field, GaussianBump, TestFunction,
};
pub use lemma::{
    convex_energy, lemma1_constant, nazaret_ratio, nazaret_ratio_with, ConjugatePair, Lemma1,
    NazaretRatio,
};
pub use norms::{
    affine_energy, directional_norm, dt_norm, tilde_grad_norm, trace_norm, Analysis, Directional,
    GradientSamples,
};
