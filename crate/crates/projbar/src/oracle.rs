//! Membership and ray queries on the underlying convex set.

use nalgebra::DVector;

use crate::barrier::{Barrier, Result};

/// Treat the boundary as unreachable beyond this ray length; the
/// direction is then recession-feasible and `sigma` is zero.
const RAY_HORIZON: f64 = 1e18;

/// Geometric access to the convex set a barrier lives on.
///
/// `sigma(x, h)` is the reciprocal of the maximal step: the smallest
/// `s >= 0` such that `x + t h` stays inside for all `t < 1/s`, with
/// `s = 0` meaning the ray never leaves the set.
pub trait SetOracle: Send + Sync {
    /// Whether `x` lies in the closed set, up to a relative slack `tol`.
    fn contains(&self, x: &DVector<f64>, tol: f64) -> bool;

    /// Reciprocal distance to the boundary along `h` from the interior
    /// point `x`.
    fn sigma(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64>;
}

/// A barrier together with the geometry of its set. Combinators and
/// problem instances consume this combined view.
pub trait BarrierSet: Barrier + SetOracle {}

impl<T: Barrier + SetOracle + ?Sized> BarrierSet for T {}

/// Generic `sigma` for sets that only expose a membership test.
///
/// Doubles the step until the ray exits (or hits the horizon), then
/// bisects the exit time. Used by the barriers whose boundary has no
/// convenient closed form.
pub fn sigma_by_bisection<F>(is_inside: F) -> f64
where
    F: Fn(f64) -> bool,
{
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while is_inside(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > RAY_HORIZON {
            return 0.0;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if is_inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1.0 / (0.5 * (lo + hi))
}
