//! Two-dimensional finite-element extraction of high-frequency transformer parasitics:
//! leakage and magnetizing inductance, inter-winding capacitance, dielectric margins and
//! AC resistance, with closed-form counterparts for every extracted quantity.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod extraction;
pub mod fem;
pub mod fixtures;
pub mod geometry;
pub mod materials;
pub mod mesh;

pub use error::{Error, Result};
