//! Barrier interface and pointwise differential data.

use nalgebra::{DMatrix, DVector};

use crate::params::BarrierParams;

/// Errors produced by barrier evaluations and the operations built on
/// top of them.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The query point lies outside the open domain of the barrier.
    #[error("point is outside the domain interior")]
    NotInterior,
    /// The projective metric `G = f'' - f' f'^T` failed the positive
    /// definiteness test although the point is inside the domain.
    #[error("projective metric is numerically degenerate at this point")]
    DegenerateMetric,
    /// The barrier does not implement an optional capability.
    #[error("this barrier does not support {0}")]
    UnsupportedCapability(&'static str),
    /// Construction-time validation failed.
    #[error("invalid construction: {0}")]
    InvalidConstruction(String),
    /// A scalar argument lies outside the domain of the requested
    /// formula.
    #[error("{0}")]
    Domain(String),
    /// `t` lies outside the maximal interval of the requested envelope.
    #[error("t={t} lies outside the maximal interval of the envelope (upper: {upper})")]
    EnvelopeOutsideInterval {
        /// `true` for the upper envelope, `false` for the lower one.
        upper: bool,
        /// Offending abscissa, relative to the anchor point.
        t: f64,
    },
    /// An iterative procedure ran out of its iteration budget.
    #[error("{what} did not converge within {iters} iterations")]
    NoConvergence { what: &'static str, iters: usize },
    /// The target equation of a projective step has no real solution.
    #[error("no real step reaches the requested hyperbolic distance")]
    NoRealStep,
    /// The point lies outside the domain of the projective duality map.
    #[error("point is outside the dual bijection domain")]
    OutsideBijection,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Value, gradient, and Hessian of a barrier at one interior point.
#[derive(Debug, Clone)]
pub struct EvalBundle {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

/// A projectively self-concordant barrier on the interior of a convex
/// body in `R^dim`.
///
/// Implementations must return exact analytic derivatives; the
/// [`verify`](crate::verify) module checks them against finite
/// differences.  `eval` fails with [`Error::NotInterior`] outside the
/// open domain.
pub trait Barrier: Send + Sync {
    /// Ambient dimension of the domain.
    fn dim(&self) -> usize;

    /// The `(gamma, nu)` pair declared for this barrier.
    fn params(&self) -> BarrierParams;

    /// Value, gradient, and Hessian at `x`.
    fn eval(&self, x: &DVector<f64>) -> Result<EvalBundle>;

    /// Directional third derivative `f'''(x)[h,h,h]`.
    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64>;

    /// Once-contracted third derivative `f'''(x)[., ., h]` as a matrix.
    ///
    /// Only barriers used in matrix-valued curvature certificates
    /// provide this; the default fails with
    /// [`Error::UnsupportedCapability`].
    fn third_contracted(&self, _x: &DVector<f64>, _h: &DVector<f64>) -> Result<DMatrix<f64>> {
        Err(Error::UnsupportedCapability("third_contracted"))
    }

    /// Whether [`Barrier::third_contracted`] is implemented.
    fn supports_third_contracted(&self) -> bool {
        false
    }
}

/// Local differential data of a barrier restricted to the line
/// `x + t h`, together with the full projective metric.
///
/// With `p(t) = f'(x + t h)[h]`:  `p0 = p(0)`, `s0 = p'(0) = f''[h,h]`,
/// `g0 = sqrt(s0 - p0^2)` is the metric length of `h`, and `c3` is the
/// corrected cubic form `C[h,h,h]`.  All entries scale multilinearly in
/// `h`: doubling `h` doubles `p0` and `g0`, quadruples `s0`, and
/// multiplies `c3` by eight.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    /// `f'(x)[h]`.
    pub p0: f64,
    /// `f''(x)[h,h]`.
    pub s0: f64,
    /// `sqrt(G(x)[h,h]) = sqrt(s0 - p0^2)`.
    pub g0: f64,
    /// Corrected cubic form `C(x)[h,h,h]`.
    pub c3: f64,
    /// Projective metric `G(x) = f''(x) - f'(x) f'(x)^T`.
    pub metric: DMatrix<f64>,
    /// Contracted corrected cubic form `C(x)[., ., h]` when the barrier
    /// supports matrix-valued third derivatives.
    pub cubic_contracted: Option<DMatrix<f64>>,
}

/// Relative eigenvalue floor of the positive definiteness test for the
/// projective metric. Points sampled very close to a facet make the
/// metric ill conditioned (condition number near `1e12` at relative
/// depth `1e-6`), so the floor sits two decades below that while still
/// catching exact rank deficiency, which rounds to `~1e-16` times the
/// largest eigenvalue.
const METRIC_EIG_FLOOR: f64 = 1e-14;

/// Checks that the symmetric matrix `g` is positive definite with a
/// relative eigenvalue margin.
pub(crate) fn metric_is_positive(g: &DMatrix<f64>) -> bool {
    let eig = g.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    max > 0.0 && min > METRIC_EIG_FLOOR * max
}

/// Assembles the contracted corrected cubic form `C(x)[., ., h]` from an
/// evaluation bundle and the contracted plain third derivative
/// `t3 = f'''(x)[., ., h]`.
///
/// With `g = f'(x)` and `H = f''(x)` the corrected form is
/// `t3 - 2 (g.h) H - 2 (Hh g^T + g (Hh)^T) + 4 (g.h) g g^T`; contracting
/// it twice more with `h` recovers the scalar cubic form `C[h,h,h]`.
pub fn cubic_contracted(e: &EvalBundle, t3: &DMatrix<f64>, h: &DVector<f64>) -> DMatrix<f64> {
    let p0 = e.grad.dot(h);
    let hh = &e.hess * h;
    t3 - 2.0 * p0 * &e.hess - 2.0 * (&hh * e.grad.transpose() + &e.grad * hh.transpose())
        + 4.0 * p0 * (&e.grad * e.grad.transpose())
}

/// Assembles the [`LocalGeometry`] of `b` at the interior point `x`
/// along the direction `h`.
///
/// Fails with [`Error::NotInterior`] outside the domain and with
/// [`Error::DegenerateMetric`] when the projective metric is not
/// positive definite at `x` (for example on a set containing a ray to
/// infinity in the direction of degeneracy).
pub fn local_geometry(b: &dyn Barrier, x: &DVector<f64>, h: &DVector<f64>) -> Result<LocalGeometry> {
    let e = b.eval(x)?;
    let metric = &e.hess - &e.grad * e.grad.transpose();
    if !metric_is_positive(&metric) {
        return Err(Error::DegenerateMetric);
    }
    let p0 = e.grad.dot(h);
    let s0 = (h.transpose() * &e.hess * h)[(0, 0)];
    let g0 = (s0 - p0 * p0).max(0.0).sqrt();
    let t3 = b.third_directional(x, h)?;
    let c3 = t3 - 6.0 * s0 * p0 + 4.0 * p0 * p0 * p0;
    let cubic = if b.supports_third_contracted() {
        let t = b.third_contracted(x, h)?;
        Some(cubic_contracted(&e, &t, h))
    } else {
        None
    };
    Ok(LocalGeometry { p0, s0, g0, c3, metric, cubic_contracted: cubic })
}
