//! Association tests for genetic markers in samples of related, possibly
//! inbred individuals.
//!
//! The library treats a marker's allele proportion as the response of a
//! logistic model with the trait as covariate, which leaves the trait
//! distribution unspecified and handles binary and quantitative phenotypes
//! alike. The known genealogy supplies the exact correlation structure of
//! the response through kinship and inbreeding coefficients.
//!
//! Modules:
//! - [`pedigree`]: genealogy parsing, kinship/inbreeding coefficients, the
//!   correlation matrix R, and family (connected-component) structure.
//! - [`genodata`]: genotype/phenotype tables, allele-proportion responses,
//!   missingness and MAF filters.
//! - [`stats`]: the quasi-likelihood score statistics (biallelic,
//!   multi-family, multi-allelic, stratified) with chi-square p-values, plus
//!   a generic score-test oracle.
//! - [`trend`]: the independence-assuming Armitage trend baseline.
//! - [`sim`]: pedigree growth, Mendelian gene dropping, trait models, and
//!   the type-I-error / power experiment runner.
//! - [`cli`]: the `kinship`, `scan`, and `simulate` commands.

pub mod cli;
mod error;
pub mod genodata;
mod linalg;
pub mod pedigree;
pub mod sim;
pub mod stats;
pub mod trend;

#[doc(hidden)]
pub mod testkit;

pub use error::{Error, Result};
pub use linalg::SymMatrix;
