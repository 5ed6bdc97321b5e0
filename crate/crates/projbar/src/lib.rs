//! Calculus of projectively self-concordant barriers.
//!
//! A barrier `f` on the interior of a convex body is *projectively*
//! self-concordant when the rank-one corrected metric
//! `G = f'' - f' f'^T` is positive definite and the corrected cubic form
//!
//! ```text
//! C[h,h,h] = f'''[h,h,h] - 6 f''[h,h] f'[h] + 4 (f'[h])^3
//! ```
//!
//! satisfies `|C[h,h,h]| <= 2 gamma (G[h,h])^{3/2}` for a constant
//! `gamma >= 0`.  The pair `(gamma, nu)` with
//! `gamma = (nu - 2)/sqrt(nu - 1)` plays the role the parameter `nu`
//! plays for ordinary (affinely) self-concordant barriers.
//!
//! The crate provides
//!
//! * [`params`]: the `gamma <-> nu` algebra and the universal parameter
//!   bounds for bounded convex sets,
//! * [`barrier`]: the [`Barrier`](barrier::Barrier) interface and local
//!   differential data ([`LocalGeometry`](barrier::LocalGeometry)),
//! * [`barriers`]: concrete barriers (polyhedral, spectrahedral,
//!   exponential and power epigraphs), the homogenizing cone lift, and
//!   the combinators (affine section, projective image, direct product),
//! * [`geometry`]: boundary queries, the projective Dikin set and its
//!   outer counterpart, one-dimensional envelope bounds, and the
//!   negative-curvature certificate,
//! * [`duality`]: the projective polarity map and the dual barrier,
//! * [`verify`]: sampling estimators and ODE oracles that check the
//!   defining inequalities numerically,
//! * [`ipm`]: path-following interior-point methods (an affine baseline
//!   and the projective method with hyperbolic step control),
//! * [`problem`]: a JSON problem-instance schema shared by the CLI and
//!   the Python bindings.

pub mod barrier;
pub mod barriers;
pub mod duality;
pub mod geometry;
pub mod ipm;
pub mod numfmt;
pub mod oracle;
pub mod params;
pub mod problem;
pub mod verify;

pub use barrier::{
    cubic_contracted, local_geometry, Barrier, Error, EvalBundle, LocalGeometry, Result,
};
pub use oracle::{BarrierSet, SetOracle};
pub use params::{gamma_from_nu, jarre_constants, nu_from_gamma, BarrierParams, JarreConstants};
