//! Geodesic completeness of left-invariant metrics on three-dimensional Lie
//! groups, decided through the quadratic Euler and Lax vector fields.

pub mod error;
pub mod flows;
pub mod forms;
pub mod lie3;
pub mod linalg;
pub mod cli;
pub mod completeness;
pub mod odeint;
pub mod quadfield;

pub use error::{Error, Result};
