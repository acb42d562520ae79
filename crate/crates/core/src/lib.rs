//! Thermodynamic formalism for smooth expanding maps of the circle.
//!
//! The transfer operator `L_{f,φ} g(x) = Σ_{f(y)=x} e^{φ(y)} g(y)` is
//! discretized by Fourier collocation; its dominant eigendata give the
//! topological pressure, the equilibrium state and everything built on top
//! of it (linear response, CLT variances, large-deviation rate functions and
//! multifractal spectra). Independent oracles (periodic orbits, finite
//! differences, Monte Carlo) live next to each computation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod ldp;
pub mod operator;
pub mod report;
pub mod response;
pub mod spectral;
pub mod stats;
pub mod thermo;

pub use error::{Error, Result};
