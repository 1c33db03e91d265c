//! Numerical toolkit for Orlicz growth conditions: Young-function calculus,
//! Sobolev conjugates, Luxemburg norms, admissibility of growth envelopes,
//! De Giorgi iteration and a discrete variational harness.

pub mod admissibility;
pub mod cli;
pub mod degiorgi;
pub mod error;
pub mod harness;
pub mod norms;
pub mod quadrature;
pub mod sampled;
pub mod sobolev;
pub mod young;

pub use error::{Error, Result};
pub use young::YoungFunction;
