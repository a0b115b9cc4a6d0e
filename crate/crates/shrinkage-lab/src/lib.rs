//! Shrinkage estimation of a multivariate normal mean under squared-error loss.
//!
//! The crate provides a family of shrinkage estimators of the form
//! `(1 - phi(||x||^2)/||x||^2) x` together with the numerical machinery to
//! study them: noncentral chi-square densities and weighted integrals,
//! three independent risk engines (Monte Carlo, SURE averaging, chi-square
//! quadrature), a domination checker against the James-Stein estimator, and
//! a quasi-admissibility prober for pseudo-Bayes marginals.
//!
//! With the default `parallel` feature, Monte Carlo batches and sweeps over
//! `(family, lambda)` cells fan out over a rayon pool; results are merged in
//! a fixed order so output is bit-identical to the sequential fallback.

pub mod dominance;
pub mod error;
pub mod estimators;
pub mod gamma;
pub mod grid;
pub mod quad;
pub mod quasi_adm;
pub mod risk;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{Family, PhiFamily, PsiSeries};
pub use risk::{McConfig, RiskMethod, RiskPoint};
pub use special::ChiSquareLaw;

/// Crate version, echoed into CLI reports.
pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
