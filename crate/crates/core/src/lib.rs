//! Discrete harmonic polynomials and exit-time moments for lattice random
//! walks killed at the boundary of a planar wedge.

pub mod alt;
pub mod cone;
pub mod error;
pub mod exit;
pub mod harmonic;
pub mod io;
pub mod laplace;
pub mod linalg;
pub mod lx;
pub mod poly;
pub mod scalar;
pub mod selftest;
pub mod sim;
pub mod walk;

pub use error::{Error, Result};
pub use poly::Poly;
pub use scalar::{Backend, BigFloat, BigRational, Quad, Scalar};
