//! Localized hopfion-like solutions of the Dirac equation built from a
//! Macdonald-function Klein–Gordon wave packet, the matching Maxwell
//! hopfion, and the numerical machinery that checks them.
//!
//! Natural units (c = ħ = 1) throughout.

pub mod dirac;
pub mod dynamics;
pub mod error;
pub mod kg_fields;
pub mod maxwell;
pub mod numerics;
pub mod topology;

pub use error::{Error, Result};
pub use kg_fields::{PacketParams, SpaceTimePoint};
pub use numerics::{Complex64, ToleranceConfig, Vec3};
