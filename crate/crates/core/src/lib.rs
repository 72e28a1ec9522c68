//! Concentration bounds for sample means under sublinear expectations,
//! with Monte Carlo and exact finite-space verification.

pub mod bounds;
pub mod convex_sets;
pub mod error;
pub mod martingale;
pub mod montecarlo;
pub mod oracle;
pub mod priors;
mod qp;
pub mod rng;
pub mod sphere_nets;
mod vector;

pub use convex_sets::{minkowski_average, ConvexBody, Shape};
pub use error::{Error, Result};
pub use oracle::FiniteSpace;
pub use priors::{PriorFamily, PriorPoint};
