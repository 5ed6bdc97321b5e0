//! Path-following machinery: analytic centering, the affine short-step
//! baseline, the projective quadratic model with its hyperbolic
//! distance, the projective step, decrement-bound formulas, and the
//! solver loop.
//!
//! Both methods minimize `<c, x>` over the barrier domain. The affine
//! baseline works with the rescaled barrier `F = nu f` and alternates a
//! penalty increase with one Newton step; the projective method jumps a
//! fixed hyperbolic distance toward the minimizer of the local
//! two-logarithm model in every iteration. The guaranteed post-step
//! decrement as a function of the step size has a closed form in both
//! regimes, and the step size maximizing the per-iteration gain is
//! computed from it.

use nalgebra::{Cholesky, DVector};

use crate::barrier::{Barrier, Error, EvalBundle, Result};

/// Penalty-free quantities of the rescaled barrier `F = nu f` at one
/// point: `a = c^T (F'')^{-1} c`, `b = c^T (F'')^{-1} F'`, and
/// `rho0_sq = F'^T (F'')^{-1} F'`, so that the decrement obeys
/// `rho_tau^2 = rho0_sq + 2 b tau + a tau^2`.
struct LinearData {
    a: f64,
    b: f64,
    rho0_sq: f64,
}

fn linear_data(b: &dyn Barrier, c: &DVector<f64>, x: &DVector<f64>) -> Result<(LinearData, EvalBundle)> {
    let e = b.eval(x)?;
    let nu = b.params().nu;
    let chol = Cholesky::new(e.hess.clone()).ok_or(Error::DegenerateMetric)?;
    let wc = chol.solve(c);
    let wg = chol.solve(&e.grad);
    let data = LinearData {
        a: c.dot(&wc) / nu,
        b: c.dot(&wg),
        rho0_sq: nu * e.grad.dot(&wg),
    };
    Ok((data, e))
}

/// Minimizes the barrier by damped Newton iterations from the interior
/// point `x_start`, until the Newton decrement drops below `1e-10`.
///
/// Fails with a non-convergence error after 500 iterations, for
/// example on an unbounded domain whose barrier has no minimizer.
pub fn analytic_center(b: &dyn Barrier, x_start: &DVector<f64>) -> Result<DVector<f64>> {
    const TOL: f64 = 1e-10;
    let mut x = x_start.clone();
    let mut e = b.eval(&x)?;
    for _ in 0..500 {
        let chol = Cholesky::new(e.hess.clone()).ok_or(Error::DegenerateMetric)?;
        let wg = chol.solve(&e.grad);
        let lambda = e.grad.dot(&wg).max(0.0).sqrt();
        if lambda <= TOL {
            return Ok(x);
        }
        let dir = -wg;
        // The full step is safe close to the minimizer; elsewhere
        // backtrack until the value decreases.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let x_new = &x + step * &dir;
            if let Ok(e_new) = b.eval(&x_new) {
                if lambda <= 0.25 || e_new.value < e.value {
                    x = x_new;
                    e = e_new;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { what: "analytic center", iters: 500 });
        }
    }
    Err(Error::NoConvergence { what: "analytic center", iters: 500 })
}

/// Newton decrement `rho_tau(x)` of the penalized rescaled barrier
/// `F + tau <c, .>` with `F = nu f`:
/// `sqrt((F' + tau c)^T (F'')^{-1} (F' + tau c))`.
pub fn affine_decrement(
    b: &dyn Barrier,
    c: &DVector<f64>,
    tau: f64,
    x: &DVector<f64>,
) -> Result<f64> {
    let (d, _) = linear_data(b, c, x)?;
    Ok((d.rho0_sq + 2.0 * tau * d.b + tau * tau * d.a).max(0.0).sqrt())
}

/// Penalty value minimizing `rho_tau(x)` over `tau`, used to convert
/// the current iterate into the duality-gap bound `nu / tau_hat`.
///
/// Fails when the objective is zero, since every `tau` then gives the
/// same decrement.
pub fn tau_hat(b: &dyn Barrier, c: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    let (d, _) = linear_data(b, c, x)?;
    if d.a <= 0.0 {
        return Err(Error::Domain(
            "gap estimate needs a nonzero objective direction".to_string(),
        ));
    }
    Ok(-d.b / d.a)
}

/// Central-path parametrization speed `mu = tau^2 c^T (F'')^{-1} c / nu`
/// at `x`, in `(0, 1]` on the path.
///
/// The path velocity in the local norm is `sqrt(mu nu) / tau`, and the
/// projective arc length shortens it by the factor `sqrt(1 - mu)`.
pub fn mu_on_path(b: &dyn Barrier, c: &DVector<f64>, tau: f64, x: &DVector<f64>) -> Result<f64> {
    let (d, _) = linear_data(b, c, x)?;
    Ok(tau * tau * d.a / b.params().nu)
}

/// One full Newton step on `F + tau <c, .>` with `F = nu f`.
///
/// The returned point is not checked for domain membership; the solver
/// damps the step when the barrier rejects it.
pub fn affine_newton_step(
    b: &dyn Barrier,
    c: &DVector<f64>,
    tau: f64,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let e = b.eval(x)?;
    let nu = b.params().nu;
    let chol = Cholesky::new(e.hess.clone()).ok_or(Error::DegenerateMetric)?;
    let step = chol.solve(&(&e.grad + (tau / nu) * c));
    Ok(x - step)
}

/// Local two-logarithm model of the barrier anchored at `x_hat`:
/// `q(x) = f(x_hat) - log((1 - f'[d])^2 - G[d,d]) / 2` with
/// `d = x - x_hat`.
///
/// The model matches the barrier's value, gradient, and Hessian at the
/// anchor and is exact for one-dimensional sets. Fails when `x` leaves
/// the model's domain `1 - f'[d] > sqrt(G[d,d])`.
pub fn quadratic_model(b: &dyn Barrier, x_hat: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    let e = b.eval(x_hat)?;
    let d = x - x_hat;
    let fd = e.grad.dot(&d);
    let hd = (d.transpose() * &e.hess * &d)[(0, 0)];
    let gd = (hd - fd * fd).max(0.0);
    let arg = (1.0 - fd) * (1.0 - fd) - gd;
    if 1.0 - fd <= 0.0 || arg <= 0.0 {
        return Err(Error::Domain(
            "point lies outside the local model domain".to_string(),
        ));
    }
    Ok(e.value - 0.5 * arg.ln())
}

/// Hyperbolic distance from the anchor `x_hat` to `x` in the local
/// model geometry: `artanh(sqrt(G[d,d]) / (1 - f'[d]))`.
///
/// Vanishes at the anchor and diverges at the model-domain boundary.
pub fn hyperbolic_distance(b: &dyn Barrier, x_hat: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    let e = b.eval(x_hat)?;
    let d = x - x_hat;
    let fd = e.grad.dot(&d);
    let hd = (d.transpose() * &e.hess * &d)[(0, 0)];
    let gd = (hd - fd * fd).max(0.0);
    let denom = 1.0 - fd;
    if denom <= 0.0 {
        return Err(Error::Domain(
            "point lies outside the local model domain".to_string(),
        ));
    }
    let ratio = gd.sqrt() / denom;
    if ratio >= 1.0 {
        return Err(Error::Domain(
            "point lies outside the local model domain".to_string(),
        ));
    }
    Ok(ratio.atanh())
}

/// Moves from `x_i` a hyperbolic distance `lambda_bar` toward the
/// constrained minimizer of the local model in the objective direction
/// `c`.
///
/// With `eta = tanh^2(lambda_bar)`, `g = f'(x_i)`, `G = G(x_i)`,
/// `q = g^T G^{-1} g`, the step solves the quadratic
/// `((1-q)^2 c^T G^{-1} c + (2-eta-q)(c^T G^{-1} g)^2) v^2
///  + 2 (1-eta)(c^T G^{-1} g) v + (q - eta) = 0`
/// for its maximal root `v` and returns
/// `x_i - G^{-1} g/(1-q) - v (G^{-1} + G^{-1} g g^T G^{-1}/(1-q)) c`.
/// A zero objective collapses the step to the recentering point
/// `x_i - G^{-1} g / (1 - q)`.
pub fn projective_step(
    b: &dyn Barrier,
    c: &DVector<f64>,
    x_i: &DVector<f64>,
    lambda_bar: f64,
) -> Result<DVector<f64>> {
    let e = b.eval(x_i)?;
    let metric = &e.hess - &e.grad * e.grad.transpose();
    let chol = Cholesky::new(metric).ok_or(Error::DegenerateMetric)?;
    let w = chol.solve(&e.grad);
    let q = e.grad.dot(&w);
    if c.iter().all(|&v| v == 0.0) {
        // Pure recentering: the target is the center of the local
        // model set, which exists only while that set is bounded.
        if 1.0 - q <= 0.0 {
            return Err(Error::OutsideBijection);
        }
        return Ok(x_i - &w / (1.0 - q));
    }
    let eta = lambda_bar.tanh().powi(2);
    let wc = chol.solve(c);
    let r = c.dot(&wc);
    let s = c.dot(&w);
    let a_coef = (1.0 - q) * (1.0 - q) * r + (2.0 - eta - q) * s * s;
    let b_coef = (1.0 - eta) * s;
    let c_coef = q - eta;
    let scale = (1.0 + q) * (1.0 + q) * r + (2.0 + eta + q) * s * s;
    // The displacement is -m G^{-1}g - upsilon G^{-1}c with
    // m = (1 + upsilon s)/(1 - q), and the step condition is a
    // quadratic in either variable.  Both quadratics share the
    // discriminant factor s^2 - r (q - eta), but the upsilon form
    // multiplies it by (1 - q)^2 while the m form multiplies it by
    // s^2.  Whichever coordinate owns the larger factor computes its
    // roots without cancellation, and 1 - q degrades exactly when the
    // gradient is large, that is when |1 - q| < 1 - eta.
    //
    // The two roots are the two intersections of the target curve
    // with the sphere of hyperbolic radius lambda_bar; the step with
    // the most advanced target is the one decreasing the objective,
    // so pick the candidate minimizing <c, x_f> = -m s - upsilon r
    // (for q < 1 this coincides with taking the larger root).
    let pick = |cands: &[(f64, f64)]| {
        let mut best = cands[0];
        for &cand in &cands[1..] {
            if -cand.0 * s - cand.1 * r < -best.0 * s - best.1 * r {
                best = cand;
            }
        }
        best
    };
    let (m, v) = if (1.0 - q).abs() >= 1.0 - eta {
        if a_coef.abs() <= 1e-14 * scale {
            if b_coef == 0.0 {
                return Err(Error::NoRealStep);
            }
            let v = -c_coef / (2.0 * b_coef);
            ((1.0 + v * s) / (1.0 - q), v)
        } else {
            let disc = b_coef * b_coef - a_coef * c_coef;
            if disc < 0.0 {
                return Err(Error::NoRealStep);
            }
            let (v1, v2) = quadratic_roots(a_coef, b_coef, c_coef, disc);
            let m1 = (1.0 + v1 * s) / (1.0 - q);
            let m2 = (1.0 + v2 * s) / (1.0 - q);
            pick(&[(m1, v1), (m2, v2)])
        }
    } else {
        // With the gradient this large the step leans on the coupling
        // between objective and gradient; without it the target point
        // escapes to infinity in the chart.
        if s == 0.0 {
            return Err(Error::NoRealStep);
        }
        let p = s * s + (1.0 - q) * r;
        let disc = p * p - a_coef * r;
        if disc < 0.0 {
            return Err(Error::NoRealStep);
        }
        let (m1, m2) = quadratic_roots(a_coef, -p, r, disc);
        let v1 = ((1.0 - q) * m1 - 1.0) / s;
        // For the paired root m2 = r / (p + sign(p) sqrt(disc)) the
        // difference (1 - q) m2 - 1 collapses to the form below,
        // which avoids cancelling the leading 1.
        let t = p + p.signum() * disc.sqrt();
        let v2 = -(s * s + p.signum() * disc.sqrt()) / (s * t);
        pick(&[(m1, v1), (m2, v2)])
    };
    Ok(x_i - m * &w - v * &wc)
}

/// Both roots of `a x^2 + 2 b x + c = 0`, paired to avoid subtractive
/// cancellation; `disc = b^2 - a c` must be nonnegative and `a`
/// nonzero.
fn quadratic_roots(a: f64, b: f64, c: f64, disc: f64) -> (f64, f64) {
    let sd = disc.sqrt();
    if b == 0.0 {
        (sd / a, -sd / a)
    } else {
        let t = -(b + b.signum() * sd);
        (t / a, c / t)
    }
}

/// Dynamics assumed for the decrement while the target moves: the
/// projective law with its constant, or the classical affine law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecrementModel {
    /// Decrement perturbation bounded by `gamma sinh(2 delta) / 2`.
    Projective(f64),
    /// Decrement perturbation bounded by `delta` itself.
    Affine,
}

/// Guaranteed bound on the Newton decrement after one step of size
/// `lambda_bar`.
///
/// Projective regime: `artanh` of
/// `(4 gamma - gamma^3 eta - 4 gamma sqrt((1-eta)^2 - gamma^2 eta))
///  / ((gamma^2 + 4)(1 - eta))` with `eta = tanh^2(lambda_bar)`;
/// the bound is `inf` when the fraction reaches `1`. Affine regime:
/// `4 - lambda_bar^2 - 4 sqrt(1 - lambda_bar^2)`.
pub fn lambda_under(lambda_bar: f64, model: DecrementModel) -> Result<f64> {
    if !(lambda_bar >= 0.0) {
        return Err(Error::Domain(format!(
            "step size must be nonnegative, got {lambda_bar}"
        )));
    }
    match model {
        DecrementModel::Affine => {
            if lambda_bar > 1.0 {
                return Err(Error::Domain(format!(
                    "affine decrement bound needs lambda_bar <= 1, got {lambda_bar}"
                )));
            }
            Ok(4.0 - lambda_bar * lambda_bar
                - 4.0 * (1.0 - lambda_bar * lambda_bar).sqrt())
        }
        DecrementModel::Projective(gamma) => {
            if !(gamma >= 0.0) {
                return Err(Error::Domain(format!(
                    "projective constant must be nonnegative, got {gamma}"
                )));
            }
            let eta = lambda_bar.tanh().powi(2);
            let radicand = (1.0 - eta) * (1.0 - eta) - gamma * gamma * eta;
            if radicand < 0.0 {
                return Err(Error::Domain(format!(
                    "step size {lambda_bar} violates (1 - eta)^2 >= gamma^2 eta"
                )));
            }
            let num = 4.0 * gamma - gamma.powi(3) * eta - 4.0 * gamma * radicand.sqrt();
            let den = (gamma * gamma + 4.0) * (1.0 - eta);
            let arg = num / den;
            if arg >= 1.0 {
                return Ok(f64::INFINITY);
            }
            Ok(arg.atanh())
        }
    }
}

/// Largest step size with a meaningful decrement bound at the given
/// projective constant.
///
/// Two effects limit the step: the square root in the bound turns
/// imaginary at `eta* = ((2 + gamma^2) - sqrt((2 + gamma^2)^2 - 4))/2`,
/// and for small constants the bound itself diverges at a smaller
/// `eta`. The returned value is `artanh(sqrt(eta_edge))` for the
/// tighter of the two.
pub fn lambda_bar_max(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!(
            "edge step size needs gamma > 0, got {gamma}"
        )));
    }
    let b = 2.0 + gamma * gamma;
    let eta_star = (b - (b * b - 4.0).sqrt()) / 2.0;
    let fraction = |eta: f64| -> f64 {
        let radicand = ((1.0 - eta) * (1.0 - eta) - gamma * gamma * eta).max(0.0);
        let num = 4.0 * gamma - gamma.powi(3) * eta - 4.0 * gamma * radicand.sqrt();
        num / ((gamma * gamma + 4.0) * (1.0 - eta))
    };
    let mut eta_edge = eta_star;
    if fraction(eta_star) >= 1.0 {
        // The bound blows up strictly before the square root vanishes;
        // bisect for the divergence point.
        let mut lo = 0.0;
        let mut hi = eta_star;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fraction(mid) >= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        eta_edge = 0.5 * (lo + hi);
    }
    Ok(eta_edge.sqrt().atanh())
}

/// Step size maximizing the per-iteration progress
/// `lambda_bar - lambda_under(lambda_bar)`, with the resulting
/// guaranteed post-step decrement.
///
/// Returns `(inf, 0)` for the degenerate projective constant `0`,
/// where the model is exact and arbitrarily long steps keep a zero
/// decrement.
pub fn optimal_lambda(model: DecrementModel) -> Result<(f64, f64)> {
    let upper = match model {
        DecrementModel::Affine => 1.0,
        DecrementModel::Projective(gamma) => {
            if gamma == 0.0 {
                return Ok((f64::INFINITY, 0.0));
            }
            lambda_bar_max(gamma)?
        }
    };
    let objective = |lam: f64| -> f64 {
        match lambda_under(lam, model) {
            Ok(under) => lam - under,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    // Coarse scan, then golden-section refinement on the best bracket.
    let n = 200;
    let mut best_k = 1;
    let mut best_val = f64::NEG_INFINITY;
    for k in 1..n {
        let lam = upper * k as f64 / n as f64;
        let val = objective(lam);
        if val > best_val {
            best_val = val;
            best_k = k;
        }
    }
    let mut lo = upper * (best_k - 1) as f64 / n as f64;
    let mut hi = upper * (best_k + 1) as f64 / n as f64;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut m1 = hi - phi * (hi - lo);
    let mut m2 = lo + phi * (hi - lo);
    let mut f1 = objective(m1);
    let mut f2 = objective(m2);
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + phi * (hi - lo);
            f2 = objective(m2);
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - phi * (hi - lo);
            f1 = objective(m1);
        }
    }
    let star = 0.5 * (lo + hi);
    Ok((star, lambda_under(star, model)?))
}

/// Path-following flavor of [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Rescaled-barrier short steps with exact penalty updates.
    Affine,
    /// Fixed hyperbolic-distance steps on the local model.
    Projective,
}

/// One solver iteration as recorded in the trace.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    /// Iteration counter, centering phase included.
    pub iter: usize,
    /// Iterate after the step.
    pub x: DVector<f64>,
    /// Objective value `<c, x>`.
    pub objective: f64,
    /// Affine rows: Newton decrement at the active penalty. Projective
    /// rows: metric norm of `f'`, whose `artanh` is the recentering
    /// distance.
    pub decrement: f64,
    /// Affine rows: step length in the local `F''` norm. Projective
    /// rows: hyperbolic distance from the previous iterate.
    pub step_distance: f64,
    /// Active penalty (affine) or the least-squares estimate
    /// (projective).
    pub tau: f64,
    /// Penalty value minimizing the decrement at the new iterate.
    pub tau_estimate: f64,
    /// Duality-gap bound `nu / tau_estimate`.
    pub gap_bound: f64,
    /// Whether the row belongs to the initial centering phase.
    pub centering: bool,
}

/// Full solver output: the per-iteration trace and the final iterate.
#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    /// Final iterate.
    pub x: DVector<f64>,
    /// Final objective value.
    pub objective: f64,
    /// Final duality-gap bound.
    pub gap_bound: f64,
    /// Total iterations spent, centering included.
    pub iterations: usize,
}

const ITERATION_CAP: usize = 100_000;

/// Whether the displacement `delta` from the point whose evaluation is
/// `e` stays strictly inside the local model domain, where the model
/// value and the hyperbolic distance are finite.
///
/// The solver only accepts steps satisfying this, so every iterate is
/// reachable from its predecessor inside one model chart.
fn within_model_domain(e: &EvalBundle, delta: &DVector<f64>) -> bool {
    let fd = e.grad.dot(delta);
    let hd = (delta.transpose() * &e.hess * delta)[(0, 0)];
    let gd = hd - fd * fd;
    1.0 - fd > 0.0 && (1.0 - fd) * (1.0 - fd) - gd > 0.0
}

fn gap_from_tau(nu: f64, tau: f64) -> f64 {
    if tau > 0.0 {
        nu / tau
    } else {
        f64::INFINITY
    }
}

/// Minimizes `<c, x>` over the barrier domain from the interior point
/// `x0`, stopping once the gap bound `nu / tau_hat` drops to `eps`.
///
/// Both methods start with a centering phase. The affine method then
/// alternates the largest penalty increase keeping the decrement at
/// its optimal step size with one Newton step; the projective method
/// repeats fixed-distance steps toward the model minimizer. A zero
/// objective degenerates to pure centering, stopping at a Newton
/// decrement of `eps`.
pub fn solve(
    b: &dyn Barrier,
    c: &DVector<f64>,
    x0: &DVector<f64>,
    method: SolveMethod,
    eps: f64,
) -> Result<SolverTrace> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {eps}")));
    }
    let nu = b.params().nu;
    let gamma = b.params().gamma;
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut x = x0.clone();
    let pure_centering = c.iter().all(|&v| v == 0.0);

    // Step-size constants for the main loop.
    let (lambda_star, lambda_low) = match method {
        SolveMethod::Affine => optimal_lambda(DecrementModel::Affine)?,
        SolveMethod::Projective => {
            if gamma == 0.0 {
                // Exact model: any step length is admissible, so take
                // long jumps; the cap keeps tanh far enough from 1
                // that step distances are still recoverable from the
                // chart to full precision.
                (2.5, 0.0)
            } else {
                optimal_lambda(DecrementModel::Projective(gamma))?
            }
        }
    };
    let eta_star = lambda_star.tanh().powi(2);

    let mut iter = 0usize;
    // Centering phase: damped Newton on the barrier itself.
    loop {
        if iter >= ITERATION_CAP {
            return Err(Error::NoConvergence { what: "centering phase", iters: iter });
        }
        let e = b.eval(&x)?;
        let chol = Cholesky::new(e.hess.clone()).ok_or(Error::DegenerateMetric)?;
        let wg = chol.solve(&e.grad);
        let newton = e.grad.dot(&wg).max(0.0).sqrt();
        let metric_sq = newton * newton / (1.0 - newton * newton);
        let centered = match method {
            _ if pure_centering => newton <= eps,
            SolveMethod::Affine => newton * nu.sqrt() <= lambda_low.max(1e-12),
            // Gate on g^T G^{-1} g, which the step quadratic needs
            // below eta; q = u/(1-u) for u = g^T (f'')^{-1} g.
            SolveMethod::Projective => {
                newton < 1.0 && metric_sq <= 0.98 * eta_star.min(0.98)
            }
        };
        if centered {
            break;
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let x_new = &x - step * &wg;
            let delta = &x_new - &x;
            if let Ok(e_new) = b.eval(&x_new) {
                if (newton <= 0.25 || e_new.value < e.value)
                    && within_model_domain(&e, &delta)
                {
                    let dist = step * newton;
                    x = x_new;
                    iter += 1;
                    let objective = c.dot(&x);
                    let tau_est = if pure_centering { 0.0 } else { tau_hat(b, c, &x)? };
                    let dec = match method {
                        SolveMethod::Affine => affine_decrement(b, c, tau_est.max(0.0), &x)?,
                        SolveMethod::Projective => {
                            let en = b.eval(&x)?;
                            let m = &en.hess - &en.grad * en.grad.transpose();
                            let mc = Cholesky::new(m).ok_or(Error::DegenerateMetric)?;
                            en.grad.dot(&mc.solve(&en.grad)).max(0.0).sqrt()
                        }
                    };
                    records.push(TraceRecord {
                        iter,
                        x: x.clone(),
                        objective,
                        decrement: dec,
                        step_distance: dist,
                        tau: tau_est,
                        tau_estimate: tau_est,
                        gap_bound: if pure_centering { 0.0 } else { gap_from_tau(nu, tau_est) },
                        centering: true,
                    });
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { what: "centering phase", iters: iter });
        }
    }

    if pure_centering {
        let objective = c.dot(&x);
        return Ok(SolverTrace {
            records,
            x,
            objective,
            gap_bound: 0.0,
            iterations: iter,
        });
    }

    // Main path-following loop.
    let mut tau = 0.0f64;
    loop {
        let t_hat = tau_hat(b, c, &x)?;
        let gap = gap_from_tau(nu, t_hat);
        if gap <= eps {
            let objective = c.dot(&x);
            return Ok(SolverTrace {
                records,
                x,
                objective,
                gap_bound: gap,
                iterations: iter,
            });
        }
        if iter >= ITERATION_CAP {
            return Err(Error::NoConvergence { what: "path following", iters: iter });
        }
        iter += 1;
        match method {
            SolveMethod::Affine => {
                // Largest penalty keeping the decrement at lambda_star.
                let (d, e) = linear_data(b, c, &x)?;
                let disc = d.b * d.b - d.a * (d.rho0_sq - lambda_star * lambda_star);
                if disc >= 0.0 && d.a > 0.0 {
                    let root = (-d.b + disc.sqrt()) / d.a;
                    if root > tau {
                        tau = root;
                    }
                }
                let chol = Cholesky::new(e.hess.clone()).ok_or(Error::DegenerateMetric)?;
                let dir = -chol.solve(&(&e.grad + (tau / nu) * c));
                let mut step = 1.0;
                let mut moved = None;
                for _ in 0..60 {
                    let x_new = &x + step * &dir;
                    let delta = &x_new - &x;
                    if b.eval(&x_new).is_ok() && within_model_domain(&e, &delta) {
                        moved = Some((x_new, step));
                        break;
                    }
                    step *= 0.5;
                }
                let (x_new, step) =
                    moved.ok_or(Error::NoConvergence { what: "affine step", iters: iter })?;
                let dist = step
                    * nu.sqrt()
                    * (dir.dot(&(&e.hess * &dir))).max(0.0).sqrt();
                x = x_new;
                let dec = affine_decrement(b, c, tau, &x)?;
                let t_est = tau_hat(b, c, &x)?;
                records.push(TraceRecord {
                    iter,
                    x: x.clone(),
                    objective: c.dot(&x),
                    decrement: dec,
                    step_distance: dist,
                    tau,
                    tau_estimate: t_est,
                    gap_bound: gap_from_tau(nu, t_est),
                    centering: false,
                });
            }
            SolveMethod::Projective => {
                let x_new = projective_step(b, c, &x, lambda_star)?;
                b.eval(&x_new)?;
                let dist = hyperbolic_distance(b, &x, &x_new)?;
                x = x_new;
                let en = b.eval(&x)?;
                let m = &en.hess - &en.grad * en.grad.transpose();
                let mc = Cholesky::new(m).ok_or(Error::DegenerateMetric)?;
                let dec = en.grad.dot(&mc.solve(&en.grad)).max(0.0).sqrt();
                let t_est = tau_hat(b, c, &x)?;
                records.push(TraceRecord {
                    iter,
                    x: x.clone(),
                    objective: c.dot(&x),
                    decrement: dec,
                    step_distance: dist,
                    tau: t_est,
                    tau_estimate: t_est,
                    gap_bound: gap_from_tau(nu, t_est),
                    centering: false,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::Polyhedral;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    fn unit_interval() -> Polyhedral {
        Polyhedral::new(dmatrix![-1.0; 1.0], dvector![0.0, 1.0]).unwrap()
    }

    fn triangle() -> Polyhedral {
        Polyhedral::new(
            dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 1.0],
            dvector![0.0, 0.0, 1.0],
        )
        .unwrap()
    }

    fn unit_square() -> Polyhedral {
        Polyhedral::new(
            dmatrix![-1.0, 0.0; 1.0, 0.0; 0.0, -1.0; 0.0, 1.0],
            dvector![0.0, 1.0, 0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn analytic_centers_of_simple_sets() {
        let c = analytic_center(&unit_interval(), &dvector![0.1]).unwrap();
        assert_relative_eq!(c[0], 0.5, epsilon = 1e-10);
        let c = analytic_center(&triangle(), &dvector![0.2, 0.6]).unwrap();
        assert_relative_eq!(c[0], 1.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(c[1], 1.0 / 3.0, epsilon = 1e-10);
        let c = analytic_center(&unit_square(), &dvector![0.9, 0.05]).unwrap();
        assert_relative_eq!(c[0], 0.5, epsilon = 1e-10);
        assert_relative_eq!(c[1], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn decrement_vanishes_on_the_central_path() {
        let b = unit_interval();
        let c = dvector![1.0];
        // F'(0.25) = -8/3 cancels tau c at tau = 8/3.
        let rho = affine_decrement(&b, &c, 8.0 / 3.0, &dvector![0.25]).unwrap();
        assert!(rho < 1e-12, "rho = {rho}");
        let rho0 = affine_decrement(&b, &c, 0.0, &dvector![0.5]).unwrap();
        assert!(rho0 < 1e-12);
        assert_relative_eq!(
            tau_hat(&b, &c, &dvector![0.25]).unwrap(),
            8.0 / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn path_speed_at_the_interval_example() {
        let b = unit_interval();
        let mu = mu_on_path(&b, &dvector![1.0], 8.0 / 3.0, &dvector![0.25]).unwrap();
        assert_relative_eq!(mu, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn newton_step_matches_scalar_arithmetic() {
        let b = unit_interval();
        let x = dvector![0.3];
        let stepped = affine_newton_step(&b, &dvector![1.0], 8.0 / 3.0, &x).unwrap();
        // F' = -1/0.3 + 1/0.7, F'' = 1/0.09 + 1/0.49.
        let fp = -1.0 / 0.3 + 1.0 / 0.7;
        let fpp = 1.0 / 0.09 + 1.0 / 0.49;
        let expected = 0.3 - (fp + 8.0 / 3.0) / fpp;
        assert_relative_eq!(stepped[0], expected, max_relative = 1e-13);
    }

    #[test]
    fn model_is_exact_on_the_interval() {
        let b = unit_interval();
        let q = quadratic_model(&b, &dvector![0.5], &dvector![0.25]).unwrap();
        let truth = b.eval(&dvector![0.25]).unwrap().value;
        assert_relative_eq!(q, truth, max_relative = 1e-13);
        assert_relative_eq!(
            q,
            2f64.ln() - 0.5 * 0.75f64.ln(),
            max_relative = 1e-13
        );
        let at_anchor = quadratic_model(&b, &dvector![0.5], &dvector![0.5]).unwrap();
        assert_relative_eq!(at_anchor, b.eval(&dvector![0.5]).unwrap().value);
    }

    #[test]
    fn model_matches_barrier_to_second_order() {
        let b = triangle();
        let x_hat = dvector![0.25, 0.3];
        let e = b.eval(&x_hat).unwrap();
        let step = 1e-4;
        for dir in [dvector![1.0, 0.0], dvector![0.0, 1.0], dvector![1.0, 1.0]] {
            let q = |t: f64| quadratic_model(&b, &x_hat, &(&x_hat + t * &dir)).unwrap();
            let fd2 = (q(step) - 2.0 * q(0.0) + q(-step)) / (step * step);
            let exact = (dir.transpose() * &e.hess * &dir)[(0, 0)];
            assert_relative_eq!(fd2, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn model_domain_violation_is_reported() {
        let b = unit_interval();
        assert!(quadratic_model(&b, &dvector![0.5], &dvector![1.5]).is_err());
        assert!(hyperbolic_distance(&b, &dvector![0.5], &dvector![1.2]).is_err());
    }

    #[test]
    fn hyperbolic_distance_examples() {
        let b = unit_interval();
        assert_eq!(
            hyperbolic_distance(&b, &dvector![0.5], &dvector![0.5]).unwrap(),
            0.0
        );
        let x = dvector![0.5 - 0.4f64.tanh() / 2.0];
        assert_relative_eq!(
            hyperbolic_distance(&b, &dvector![0.5], &x).unwrap(),
            0.4,
            max_relative = 1e-12
        );
        // Distance grows without bound toward the model boundary.
        let near = hyperbolic_distance(&b, &dvector![0.5], &dvector![0.5 - 0.4999999]).unwrap();
        assert!(near > 7.0);
    }

    #[test]
    fn projective_step_at_the_interval_center() {
        let b = unit_interval();
        let x_f = projective_step(&b, &dvector![1.0], &dvector![0.5], 0.4).unwrap();
        assert_relative_eq!(x_f[0], 0.5 - 0.4f64.tanh() / 2.0, max_relative = 1e-12);
        let d = hyperbolic_distance(&b, &dvector![0.5], &x_f).unwrap();
        assert_relative_eq!(d, 0.4, epsilon = 1e-10);
    }

    #[test]
    fn projective_step_distance_is_the_requested_one() {
        let b = triangle();
        for (x0, x1, c0, c1, lam) in [
            (1.0 / 3.0, 1.0 / 3.0, 1.0, 0.0, 0.3),
            (0.32, 0.34, 1.0, -2.0, 0.5),
            (0.3, 0.35, -1.0, -1.0, 0.25),
        ] {
            let x = dvector![x0, x1];
            let c = dvector![c0, c1];
            let x_f = projective_step(&b, &c, &x, lam).unwrap();
            let d = hyperbolic_distance(&b, &x, &x_f).unwrap();
            assert_relative_eq!(d, lam, epsilon = 1e-9);
        }
    }

    #[test]
    fn projective_step_ignores_objective_scale() {
        let b = triangle();
        let x = dvector![0.3, 0.25];
        let a = projective_step(&b, &dvector![1.0, -0.5], &x, 0.35).unwrap();
        let s = projective_step(&b, &dvector![37.0, -18.5], &x, 0.35).unwrap();
        assert_relative_eq!((a - s).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_objective_step_recenters() {
        let b = unit_interval();
        let x_f = projective_step(&b, &dvector![0.0], &dvector![0.5], 0.4).unwrap();
        assert_relative_eq!(x_f[0], 0.5);
        // Off-center recentering moves toward the analytic center.
        let x_f = projective_step(&b, &dvector![0.0], &dvector![0.3], 0.4).unwrap();
        assert!((x_f[0] - 0.5).abs() < 0.2);
    }

    #[test]
    fn decrement_bound_special_values() {
        assert_eq!(lambda_under(0.7, DecrementModel::Projective(0.0)).unwrap(), 0.0);
        // Frozen evaluation of the closed form.
        assert_relative_eq!(
            lambda_under(0.5, DecrementModel::Projective(1.0)).unwrap(),
            0.326_756_443_048_109,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            lambda_under(0.4166, DecrementModel::Affine).unwrap(),
            0.19008,
            max_relative = 1e-4
        );
        assert!(lambda_under(0.9, DecrementModel::Projective(1.0)).is_err());
        assert!(lambda_under(1.2, DecrementModel::Affine).is_err());
    }

    #[test]
    fn edge_step_size_structure() {
        // At gamma = 1 the bound diverges at eta = 3/8, strictly before
        // the square root vanishes at (3 - sqrt 5)/2.
        let edge = lambda_bar_max(1.0).unwrap();
        assert_relative_eq!(edge.tanh().powi(2), 0.375, epsilon = 1e-9);
        // At gamma = 5 the square root is the binding limit.
        let edge = lambda_bar_max(5.0).unwrap();
        let b = 27.0f64;
        let eta_star = (b - (b * b - 4.0).sqrt()) / 2.0;
        assert_relative_eq!(edge.tanh().powi(2), eta_star, epsilon = 1e-12);
        let under = lambda_under(edge * 0.999999, DecrementModel::Projective(5.0)).unwrap();
        assert!(under.is_finite());
    }

    #[test]
    fn optimal_affine_step_matches_frozen_values() {
        let (star, low) = optimal_lambda(DecrementModel::Affine).unwrap();
        assert_relative_eq!(star, 0.416_647_517_575_512_6, epsilon = 1e-8);
        assert_relative_eq!(low, 0.190_132_367_642_978_9, epsilon = 1e-8);
        // Interior optimality.
        let obj = |l: f64| l - lambda_under(l, DecrementModel::Affine).unwrap();
        assert!(obj(star) >= obj(star - 1e-4));
        assert!(obj(star) >= obj(star + 1e-4));
    }

    #[test]
    fn optimal_projective_step_is_a_local_maximum() {
        for gamma in [0.3, 1.0, 3.0] {
            let model = DecrementModel::Projective(gamma);
            let (star, low) = optimal_lambda(model).unwrap();
            assert_relative_eq!(low, lambda_under(star, model).unwrap(), epsilon = 1e-9);
            let obj = |l: f64| l - lambda_under(l, model).unwrap();
            assert!(obj(star) >= obj(star - 1e-5));
            assert!(obj(star) >= obj(star + 1e-5));
            assert!(low < star);
        }
    }

    #[test]
    fn zero_gamma_model_is_exact_and_unbounded() {
        let (star, low) = optimal_lambda(DecrementModel::Projective(0.0)).unwrap();
        assert!(star.is_infinite());
        assert_eq!(low, 0.0);
    }

    #[test]
    fn both_methods_solve_the_interval_problem() {
        let b = unit_interval();
        let c = dvector![1.0];
        for method in [SolveMethod::Affine, SolveMethod::Projective] {
            let trace = solve(&b, &c, &dvector![0.7], method, 1e-6).unwrap();
            assert!(trace.objective <= 1e-6, "objective {}", trace.objective);
            assert!(trace.gap_bound <= 1e-6);
            assert!(!trace.records.is_empty());
        }
    }

    #[test]
    fn both_methods_solve_square_and_triangle_problems() {
        let sq = unit_square();
        let c = dvector![1.0, 1.0];
        for method in [SolveMethod::Affine, SolveMethod::Projective] {
            let trace = solve(&sq, &c, &dvector![0.3, 0.8], method, 1e-5).unwrap();
            assert!(trace.objective <= 1e-5, "objective {}", trace.objective);
        }
        let tri = triangle();
        let c = dvector![-1.0, 0.0];
        for method in [SolveMethod::Affine, SolveMethod::Projective] {
            let trace = solve(&tri, &c, &dvector![0.2, 0.2], method, 1e-6).unwrap();
            assert!(
                (trace.objective + 1.0).abs() <= 1e-6,
                "objective {}",
                trace.objective
            );
        }
    }

    #[test]
    fn projective_steps_keep_constant_distance() {
        let tri = triangle();
        let c = dvector![1.0, 0.5];
        let gamma = tri.params().gamma;
        let (star, _) = optimal_lambda(DecrementModel::Projective(gamma)).unwrap();
        let trace = solve(&tri, &c, &dvector![0.3, 0.3], SolveMethod::Projective, 1e-6).unwrap();
        let path_rows: Vec<_> = trace.records.iter().filter(|r| !r.centering).collect();
        assert!(!path_rows.is_empty());
        for row in path_rows {
            assert_relative_eq!(row.step_distance, star, epsilon = 1e-8);
        }
    }

    #[test]
    fn affine_iterations_respect_the_decrement_bound() {
        let sq = unit_square();
        let c = dvector![1.0, 2.0];
        let trace = solve(&sq, &c, &dvector![0.5, 0.5], SolveMethod::Affine, 1e-6).unwrap();
        let (star, low) = optimal_lambda(DecrementModel::Affine).unwrap();
        let _ = star;
        for row in trace.records.iter().filter(|r| !r.centering) {
            assert!(
                row.decrement <= low + 1e-6,
                "decrement {} above bound {low}",
                row.decrement
            );
        }
    }

    #[test]
    fn pure_centering_mode_returns_the_analytic_center() {
        let tri = triangle();
        let trace = solve(
            &tri,
            &dvector![0.0, 0.0],
            &dvector![0.1, 0.7],
            SolveMethod::Projective,
            1e-9,
        )
        .unwrap();
        assert_relative_eq!(trace.x[0], 1.0 / 3.0, epsilon = 1e-7);
        assert_relative_eq!(trace.x[1], 1.0 / 3.0, epsilon = 1e-7);
    }

    #[test]
    fn gap_bound_dominates_true_gap_on_the_interval() {
        let b = unit_interval();
        let c = dvector![1.0];
        let trace = solve(&b, &c, &dvector![0.6], SolveMethod::Affine, 1e-6).unwrap();
        for row in trace.records.iter().filter(|r| !r.centering) {
            // True optimum is 0; the bound must cover the distance.
            assert!(
                row.objective <= row.gap_bound * (1.0 + 1e-6),
                "gap bound {} below true gap {}",
                row.gap_bound,
                row.objective
            );
        }
    }
}
