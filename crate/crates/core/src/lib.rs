//! Numerical toolkit for nonlinear Dirac equations on flat surfaces.
//!
//! Spinor fields live on a [`chart::GridChart`] (torus, disk, sphere chart or
//! cylinder). The Dirac operator in the fixed representation
//!
//! ```text
//! D = sigma_1 d_x + sigma_2 d_y = 2 [[0, dbar], [-d, 0]]
//! ```
//!
//! is available by finite differences everywhere and spectrally on the torus.
//! On top of it sit the cubic solvers, blow-up analysis and the Weierstrass
//! reconstruction of surfaces in R^3.
//!
//! ```
//! use std::sync::Arc;
//! use spinflow::chart::{GridChart, SpinStructure};
//! use spinflow::spinor::{SpinorField, ONE, ZERO};
//!
//! let chart = Arc::new(GridChart::unit_torus(16, SpinStructure::AntiAnti).unwrap());
//! let psi = SpinorField::constant(chart, &[ONE, ZERO]);
//! assert!((psi.total_energy() - 1.0).abs() < 1e-12);
//! ```

// Comparisons like `!(x > 0.0)` are written that way so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod chart;
pub mod cli;
pub mod clifford;
pub mod dirac;
pub mod error;
pub mod fields;
pub mod formats;
pub mod nonlinear;
mod fft2;
pub mod quadrature;
pub mod rng;
pub mod spinor;
pub mod weierstrass;

pub use error::{Result, SpinflowError};
