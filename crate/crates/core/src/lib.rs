//! Planar linked-twist maps on two overlapping annuli, their torus form, the
//! invariant cone calculus, and numerical diagnostics.

pub mod annulus_geometry;
pub mod bipolar_coords;
pub mod certification;
pub mod ergodic_diagnostics;
pub mod error;
pub mod numdiff;
pub mod sampling;
pub mod tangent_cones;
pub mod torus_dynamics;
pub mod twist_maps;

pub use annulus_geometry::{AnnulusPair, PlanePoint, PolarPoint, Region};
pub use bipolar_coords::TorusPoint;
pub use error::{Error, Result};
pub use tangent_cones::{ConeId, Jac2, TangentVec};
pub use twist_maps::{Direction, MapId};
