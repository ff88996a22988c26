//! Shape optimization of marine propeller blades with non-intrusive
//! reduced-order models.
//!
//! The crate covers the whole offline/online pipeline: a parametric blade
//! deformed by four multiplicative factors ([`geometry`]), RBF morphing of
//! point clouds ([`morph`]), a deterministic synthetic field oracle standing
//! in for the CFD solver ([`oracle`]), POD-based reduced-order models
//! ([`rom`]), thrust/torque/efficiency integration ([`hydro`]) and the
//! genetic and gradient optimizers ([`optim`]).

// `!(x > 0.0)` style checks deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod hydro;
pub mod linalg;
pub mod morph;
pub mod optim;
pub mod oracle;
pub mod pipeline;
pub mod rom;

mod binio;

pub use error::{Error, Result};
pub use geometry::{BladeDefinition, DeformationParams, ParameterBox, Side};
