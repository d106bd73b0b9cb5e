//! Fuchsian value of the accessory parameter for four-punctured spheres.

pub mod accessory;
pub mod config;
pub mod error;
pub mod expansion;
pub mod frobenius;
pub mod geometry;
pub mod linalg;
pub mod modular;
pub mod num;
pub mod poly;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use num::BigComplex;
pub use series::{Derivative, PowerSeries, Var};
