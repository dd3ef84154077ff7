//! Numerical toolkit for the super-Liouville system with a spinorial Yamabe term.

pub mod blowup_lab;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod fields;
pub mod grid;
pub mod io;
pub mod parallel;
pub mod scalar;
pub mod solver;
pub mod spin2d;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = grid::Grid<f64>;
pub type Grid32 = grid::Grid<f32>;
pub type Point64 = grid::Point<f64>;
pub type Point32 = grid::Point<f32>;
pub type Domain64 = grid::Domain<f64>;
pub type Domain32 = grid::Domain<f32>;
pub type ScalarField64 = fields::ScalarField<f64>;
pub type ScalarField32 = fields::ScalarField<f32>;
pub type SpinorField64 = fields::SpinorField<f64>;
pub type SpinorField32 = fields::SpinorField<f32>;
pub type CouplingField64 = fields::CouplingField<f64>;
pub type CouplingField32 = fields::CouplingField<f32>;
