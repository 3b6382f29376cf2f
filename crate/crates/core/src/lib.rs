//! Exact moment computations for q-Brownian chaos.
//!
//! Multiple integrals `I_n(f)` with respect to a q-Brownian motion are
//! represented by step kernels on a rational grid; their joint moments are
//! pairing sums weighted by `q^crossings`, returned as exact polynomials in `q`.

pub mod analysis;
pub mod combinatorics;
pub mod density;
pub mod error;
pub mod kernels;
pub mod moments;
pub mod qalgebra;
pub mod qhermite;

pub use combinatorics::{BlockStructure, Pairing, Permutation};
pub use error::{Error, Result};
pub use kernels::{Grid, Kernel, QKernel, RhoFunction};
pub use moments::{ChaosElement, MomentResult};
pub use qalgebra::{QPoly, Rational, Surd};
pub use qhermite::XPoly;
