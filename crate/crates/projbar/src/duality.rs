//! Projective dual map, dual function, and dual barrier.
//!
//! The map `p = -f'(x)/(1 + <f'(x), x>)` carries the part of the
//! domain where `1 + <f'(x), x> > 0` bijectively onto the domain of the
//! dual function `f_*(p) = -min_x (f(x) + log(1 + <x, p>))`. The dual
//! function is itself a barrier with the same projective constant, its
//! metric is the pushforward of the primal metric, and its corrected
//! cubic form is the pushforward with a sign flip. Applying the map of
//! the dual barrier inverts the primal map.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::barrier::{cubic_contracted, Barrier, Error, EvalBundle, Result};
use crate::ipm::analytic_center;
use crate::params::BarrierParams;

/// Maps the interior point `x` to its dual point
/// `p = -f'(x) / (1 + <f'(x), x>)`.
///
/// Fails with [`Error::OutsideBijection`] when `1 + <f'(x), x> <= 0`;
/// the denominator is positive throughout the interior whenever the
/// origin lies in the set.
pub fn dual_point(b: &dyn Barrier, x: &DVector<f64>) -> Result<DVector<f64>> {
    let e = b.eval(x)?;
    let beta = 1.0 + e.grad.dot(x);
    if beta <= 0.0 {
        return Err(Error::OutsideBijection);
    }
    Ok(-&e.grad / beta)
}

/// Result of evaluating the dual function at one dual point.
#[derive(Debug, Clone)]
pub struct DualValue {
    /// `f_*(p) = -(f(x) + log(1 + <x, p>))` at the inner minimizer.
    pub value: f64,
    /// The inner minimizer `x` of `f(x) + log(1 + <x, p>)`.
    pub minimizer: DVector<f64>,
}

/// State of the inner minimization at its solution, shared by all dual
/// barrier evaluations.
struct InnerPoint {
    x: DVector<f64>,
    eval: EvalBundle,
    /// `1 + <f'(x), x> = 1/(1 + <x, p>)`.
    beta: f64,
    /// Primal metric `G(x)`.
    metric: DMatrix<f64>,
}

/// Minimizes `q_p(x) = f(x) + log(1 + <x, p>)` by damped Newton from
/// `x_start`, to gradient norm `1e-10` in the metric `G`.
fn minimize_inner(b: &dyn Barrier, p: &DVector<f64>, x_start: &DVector<f64>) -> Result<InnerPoint> {
    const MAX_ITERS: usize = 200;
    const MAX_HALVINGS: usize = 60;
    const TOL: f64 = 1e-10;
    let mut x = x_start.clone();
    let mut e = b.eval(&x)?;
    let mut denom = 1.0 + x.dot(p);
    if denom <= 0.0 {
        return Err(Error::OutsideBijection);
    }
    let mut q = e.value + denom.ln();
    for _ in 0..MAX_ITERS {
        let grad_q = &e.grad + p / denom;
        let metric = &e.hess - &e.grad * e.grad.transpose();
        let metric_chol =
            Cholesky::new(metric.clone()).ok_or(Error::DegenerateMetric)?;
        let lambda = grad_q.dot(&metric_chol.solve(&grad_q)).max(0.0).sqrt();
        if lambda <= TOL {
            return Ok(InnerPoint { x, eval: e, beta: 1.0 / denom, metric });
        }
        // Newton direction on q when its Hessian is positive definite,
        // metric direction otherwise (q is only quasi-convex).
        let hess_q = &e.hess - (p * p.transpose()) / (denom * denom);
        let dir = match Cholesky::new(hess_q) {
            Some(chol) => chol.solve(&(-&grad_q)),
            None => metric_chol.solve(&(-&grad_q)),
        };
        // Decrement in the matrix that produced the direction; inside
        // the quadratic convergence region the objective decrease per
        // step drops below rounding, so take full steps there instead
        // of insisting on monotone progress.
        let step_decrement = (-grad_q.dot(&dir)).max(0.0).sqrt();
        let mut accepted = false;
        if step_decrement <= 0.25 {
            let x_new = &x + &dir;
            if let Ok(e_new) = b.eval(&x_new) {
                let denom_new = 1.0 + x_new.dot(p);
                if denom_new > 0.0 {
                    q = e_new.value + denom_new.ln();
                    x = x_new;
                    e = e_new;
                    denom = denom_new;
                    accepted = true;
                }
            }
        }
        if !accepted {
            let mut step = 1.0;
            for _ in 0..MAX_HALVINGS {
                let x_new = &x + step * &dir;
                if let Ok(e_new) = b.eval(&x_new) {
                    let denom_new = 1.0 + x_new.dot(p);
                    if denom_new > 0.0 {
                        let q_new = e_new.value + denom_new.ln();
                        if q_new < q {
                            x = x_new;
                            e = e_new;
                            denom = denom_new;
                            q = q_new;
                            accepted = true;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
        }
        if !accepted {
            return Err(Error::NoConvergence {
                what: "dual inner minimization",
                iters: MAX_ITERS,
            });
        }
    }
    Err(Error::NoConvergence { what: "dual inner minimization", iters: MAX_ITERS })
}

/// Evaluates the dual function `f_*(p)` by minimizing
/// `f(x) + log(1 + <x, p>)` from the interior start `x_start`.
///
/// At the minimizer the stationarity identity
/// `f'(x) = -p / (1 + <x, p>)` holds, so the minimizer is exactly the
/// primal preimage of `p` under the dual map.
pub fn dual_value(b: &dyn Barrier, p: &DVector<f64>, x_start: &DVector<f64>) -> Result<DualValue> {
    let inner = minimize_inner(b, p, x_start)?;
    let value = -(inner.eval.value + (1.0 + inner.x.dot(p)).ln());
    Ok(DualValue { value, minimizer: inner.x })
}

/// The dual barrier `f_*` of a primal barrier, evaluated through inner
/// minimizations warm-started at the primal analytic center.
///
/// Carries the same `(gamma, nu)` pair as the primal barrier. Points
/// outside the dual domain surface as inner-solve failures.
pub struct DualBarrier {
    base: Arc<dyn Barrier>,
    /// Analytic center of the primal domain; start of all inner solves.
    start: DVector<f64>,
}

impl DualBarrier {
    /// Builds the dual barrier of `base`, locating the primal analytic
    /// center from the given interior point.
    ///
    /// The construction is meaningful when the primal set is bounded
    /// and has the origin in its interior, so that the dual domain is a
    /// bounded neighborhood of the origin as well; neither property is
    /// checked here.
    pub fn new(base: Arc<dyn Barrier>, interior: &DVector<f64>) -> Result<Self> {
        let start = analytic_center(base.as_ref(), interior)?;
        Ok(Self { base, start })
    }

    fn inner(&self, p: &DVector<f64>) -> Result<InnerPoint> {
        minimize_inner(self.base.as_ref(), p, &self.start)
    }

    /// Jacobian `dx/dp = -beta G^{-1} (I + f' x^T)` of the inverse dual
    /// map at the inner solution.
    fn inverse_jacobian(inner: &InnerPoint) -> Result<DMatrix<f64>> {
        let n = inner.x.len();
        let chol = Cholesky::new(inner.metric.clone()).ok_or(Error::DegenerateMetric)?;
        let mut shift = DMatrix::identity(n, n);
        shift += &inner.eval.grad * inner.x.transpose();
        Ok(-inner.beta * chol.solve(&shift))
    }
}

impl Barrier for DualBarrier {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn params(&self) -> BarrierParams {
        self.base.params()
    }

    fn eval(&self, p: &DVector<f64>) -> Result<EvalBundle> {
        let inner = self.inner(p)?;
        let value = -(inner.eval.value + (1.0 + inner.x.dot(p)).ln());
        let grad = -inner.beta * &inner.x;
        // The dual metric is the pushforward J^T G J of the primal
        // metric under the inverse-map Jacobian J = dx/dp.
        let j = Self::inverse_jacobian(&inner)?;
        let dual_metric = j.transpose() * &inner.metric * &j;
        let hess = &dual_metric + &grad * grad.transpose();
        Ok(EvalBundle { value, grad, hess })
    }

    fn third_directional(&self, p: &DVector<f64>, k: &DVector<f64>) -> Result<f64> {
        let inner = self.inner(p)?;
        let j = Self::inverse_jacobian(&inner)?;
        let jk = &j * k;
        // The corrected cubic form transports with a sign flip.
        let t3 = self.base.third_directional(&inner.x, &jk)?;
        let d1 = inner.eval.grad.dot(&jk);
        let d2 = (jk.transpose() * &inner.eval.hess * &jk)[(0, 0)];
        let primal_cubic = t3 - 6.0 * d2 * d1 + 4.0 * d1 * d1 * d1;
        let grad = -inner.beta * &inner.x;
        let dual_metric = j.transpose() * &inner.metric * &j;
        let e1 = grad.dot(k);
        let e2 = (k.transpose() * &dual_metric * k)[(0, 0)] + e1 * e1;
        Ok(-primal_cubic + 6.0 * e2 * e1 - 4.0 * e1 * e1 * e1)
    }

    fn third_contracted(&self, p: &DVector<f64>, k: &DVector<f64>) -> Result<DMatrix<f64>> {
        if !self.base.supports_third_contracted() {
            return Err(Error::UnsupportedCapability("third_contracted"));
        }
        let inner = self.inner(p)?;
        let j = Self::inverse_jacobian(&inner)?;
        let jk = &j * k;
        let t3 = self.base.third_contracted(&inner.x, &jk)?;
        let primal_cubic = cubic_contracted(&inner.eval, &t3, &jk);
        let dual_cubic = -(j.transpose() * primal_cubic * &j);
        // Undo the cubic correction with the dual gradient and Hessian.
        let grad = -inner.beta * &inner.x;
        let dual_metric = j.transpose() * &inner.metric * &j;
        let hess = &dual_metric + &grad * grad.transpose();
        let gk = grad.dot(k);
        let hk = &hess * k;
        Ok(dual_cubic
            + 2.0 * gk * &hess
            + 2.0 * (&hk * grad.transpose() + &grad * hk.transpose())
            - 4.0 * gk * (&grad * grad.transpose()))
    }

    fn supports_third_contracted(&self) -> bool {
        self.base.supports_third_contracted()
    }
}
