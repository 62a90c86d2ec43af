//! Multifractal detrended fluctuation analysis (MFDFA) and its bivariate
//! extension (MFCCA), together with the tooling needed to separate the two
//! usual sources of multifractality: temporal correlations and heavy-tailed
//! marginals.
//!
//! The crate is organised bottom-up:
//!
//! - [`series`]: price ingestion, log-returns, calendar windows.
//! - [`stats`]: autocorrelation, CCDFs and least-squares tail fits.
//! - [`qgauss`]: the q-Gaussian family (density, CDF, quantile, sampling, fit).
//! - [`surrogate`]: rank remapping and shuffling surrogates.
//! - [`mfdfa`]: detrended (co)variances and fluctuation surfaces.
//! - [`spectrum`]: scaling fits, `tau(r)`, singularity spectra, `rho_r(s)`.
//! - [`cascade`]: synthetic generators with known scaling (validation oracles).
//!
//! Heavy loops run through [`par::Exec`], which uses rayon when the
//! `parallel` feature is on and falls back to plain iteration otherwise.

// `!(a < b)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod error;
pub mod grid;
pub mod mfdfa;
pub mod par;
pub mod qgauss;
mod quad;
pub mod regress;
pub mod rng;
pub mod series;
pub mod spectrum;
pub mod stats;
pub mod surrogate;

pub use error::{Error, ErrorClass, Result};
pub use par::Exec;
