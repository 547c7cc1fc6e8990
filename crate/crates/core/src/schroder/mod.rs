//! Uniformly quasiregular maps from Schröder equations `f ∘ h = h ∘ M`,
//! Lattès fitting, non-linear equivariant `A`, and the conjugacy iteration
//! `ι_k = M^{-k} A^k`.

mod conjugacy;
mod lattes;
mod rational;
mod twist;
mod uqr;

pub use conjugacy::{
    conjugacy_iteration, iota_at, ConjugacyOptions, ConjugacyReport, ConjugacyResult, BURN_IN,
    MAX_SLOW_STEPS, RATIO_SLACK,
};
pub use lattes::{
    fit_lattes_rational, fit_lattes_rational_with, lattes_degree, LattesFit, MAX_CONDITION,
};
pub use rational::{multisets_match, polynomial_roots, RationalMap};
pub use twist::{
    check_equivariance, conjugate_isometry, construct_nonlinear_a, smooth_cutoff, Twist, TwistedMap,
};
pub use uqr::{
    complex_derivative, schroder_residual, uqr_eval, uqr_eval_tracked, uqr_iterate, UqrMap,
    INVARIANCE_WORD_LEN,
};
