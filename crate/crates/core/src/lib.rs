//! Non-local perimeters of sets and functions for Lévy-type measures,
//! together with the tools to study their local and Lebesgue limits.

pub mod asymptotics;
pub mod config;
pub mod constants;
pub mod convex;
pub mod error;
pub mod geometry;
pub mod measures;
pub mod perimeter;
pub mod point;
pub mod quadrature;
pub mod sphere;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
