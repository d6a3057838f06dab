//! `mfa` computes thermodynamic-formalism quantities for one-dimensional
//! conformal iterated function systems and graph directed Markov systems:
//! topological pressure, Hausdorff dimension via the pressure equation, the
//! temperature function, multifractal spectra, and cylinder-level models of
//! conformal measures with local-dimension estimation.
//!
//! The guide in `book/` walks through the concepts chapter by chapter; the
//! `mfa` binary exposes everything behind a config-driven CLI with
//! deterministic CSV output.
//!
//! ```
//! use mfa::builtin;
//! use mfa::thermo::hausdorff_dimension;
//!
//! // middle-third Cantor set: the pressure t -> log(2 * 3^-t) vanishes at
//! // t = log 2 / log 3
//! let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
//! let dim = hausdorff_dimension(&sys).unwrap();
//! assert!((dim.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
//! ```

pub mod builtin;
pub mod cheb;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod interval;
pub mod maps;
pub mod measure;
pub mod potential;
pub mod pressure;
pub mod rng;
pub mod spectrum;
pub mod system;
pub mod thermo;

pub use error::{MfaError, Result};
