//! Concrete barrier families, the homogenizing cone lift, and the
//! closure combinators.
//!
//! Every family implements [`Barrier`](crate::Barrier) together with
//! the set oracle of its domain ([`SetOracle`](crate::SetOracle)), so a
//! single value serves both the differential calculus and the ray
//! geometry.

mod combinators;
mod conic_lift;
mod exp_epigraph;
mod polyhedral;
mod power_epigraph;
mod spectrahedral;

pub use combinators::{AffineSection, DirectProduct, ProjectiveImage};
pub use conic_lift::ConicLift;
pub use exp_epigraph::ExpEpigraph;
pub use polyhedral::Polyhedral;
pub use power_epigraph::PowerEpigraph;
pub use spectrahedral::Spectrahedral;
