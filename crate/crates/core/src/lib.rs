//! Collision kernels of the two-dimensional periodic Lorentz gas in the
//! Boltzmann–Grad limit, together with the two simulators they describe:
//! an exact billiard at finite scatterer radius and the limiting random
//! flight process.

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod streams;
pub mod trajectory;
pub mod billiard;
pub mod flight;
pub mod stats;
mod special;

pub use error::{Error, Result};
