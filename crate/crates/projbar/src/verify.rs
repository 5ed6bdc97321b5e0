//! Numerical certification utilities: boundary-biased sampling of the
//! cubic-bound constant, cone-lift equivalence checks, controlled ODE
//! oracles for the envelope and decrement bounds, and finite-difference
//! audits of analytic derivatives.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barrier::{local_geometry, Barrier, Error, Result};
use crate::barriers::ConicLift;
use crate::ipm::{lambda_under, DecrementModel};
use crate::oracle::BarrierSet;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let d = DVector::from_fn(n, |_, _| gaussian(rng));
        let norm = d.norm();
        if norm > 1e-12 {
            return d / norm;
        }
    }
}

/// Maximum ray parameter used when a sampling ray never leaves the set.
const UNBOUNDED_RAY_REACH: f64 = 8.0;

/// Draws one interior point along a random ray from `start`, together
/// with the ray direction. Samples cycle between a uniform position
/// and positions at relative distance `10^-k` (k = 1..6) from the
/// boundary, where the cubic-bound supremum is typically approached.
fn biased_point(
    set: &dyn BarrierSet,
    start: &DVector<f64>,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let b: &dyn Barrier = set;
    let d = random_direction(rng, set.dim());
    let sigma = set.sigma(start, &d)?;
    let reach = if sigma > 0.0 {
        1.0 / sigma
    } else {
        UNBOUNDED_RAY_REACH
    };
    // Depth rungs stop at 1e-4 from the boundary: past that, curved
    // boundaries push the corrected metric's condition number beyond
    // what double precision resolves and the cubic ratio is noise.
    let fraction = match index % 7 {
        0 => rng.random_range(0.05..0.95),
        k => 1.0 - 10f64.powi(-(k.min(4) as i32)),
    };
    // Numerical safety: back off slightly if the barrier rejects the
    // point at the requested depth.
    for backoff in [1.0, 1.0 - 1e-9, 1.0 - 1e-7, 0.9] {
        let x = start + (fraction * backoff * reach) * &d;
        if set.contains(&x, 1e-12) && b.eval(&x).is_ok() {
            return Ok((x, d));
        }
    }
    Ok((start.clone(), d))
}

/// Cubic-bound estimate together with the sample attaining it.
#[derive(Debug, Clone)]
pub struct GammaEstimate {
    /// Largest sampled ratio `|C[h,h,h]| / (2 G[h,h]^{3/2})`.
    pub gamma_hat: f64,
    /// Interior point attaining the largest ratio.
    pub worst_point: DVector<f64>,
    /// Direction attaining the largest ratio.
    pub worst_direction: DVector<f64>,
}

/// Estimates the cubic-bound constant as the maximum of
/// `|C[h,h,h]| / (2 G[h,h]^{3/2})` over sampled interior points and
/// directions, reporting the sample where the maximum is attained.
///
/// Each of the `n_samples` points is probed along its generating ray,
/// the reversed ray, and one fresh random direction. Sampling is
/// deterministic in `seed`, and prefixes agree across sample counts,
/// so the estimate is monotone in `n_samples` for a fixed seed.
pub fn estimate_gamma_report(
    set: &dyn BarrierSet,
    start: &DVector<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<GammaEstimate> {
    let b: &dyn Barrier = set;
    b.eval(start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GammaEstimate {
        gamma_hat: 0.0,
        worst_point: start.clone(),
        worst_direction: DVector::zeros(set.dim()),
    };
    for i in 0..n_samples {
        let (x, d) = biased_point(set, start, i, &mut rng)?;
        let fresh = random_direction(&mut rng, set.dim());
        for h in [d.clone(), -d, fresh] {
            let lg = local_geometry(b, &x, &h)?;
            let ratio = lg.c3.abs() / (2.0 * lg.g0.powi(3));
            if ratio > report.gamma_hat {
                report.gamma_hat = ratio;
                report.worst_point = x.clone();
                report.worst_direction = h.clone();
            }
        }
    }
    Ok(report)
}

/// [`estimate_gamma_report`] reduced to the estimate itself.
pub fn estimate_gamma(
    set: &dyn BarrierSet,
    start: &DVector<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(estimate_gamma_report(set, start, n_samples, seed)?.gamma_hat)
}

/// Draws `count` interior points with the boundary-biased schedule the
/// estimators use, deterministically in `seed`.
pub fn sample_interior(
    set: &dyn BarrierSet,
    start: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| biased_point(set, start, i, &mut rng).map(|(x, _)| x))
        .collect()
}

/// Outcome of the cone-lift equivalence check.
#[derive(Debug, Clone)]
pub struct LiftReport {
    /// Maximum of `|F'''[k,k,k]| / (2 F''[k,k]^{3/2})` over the cone
    /// samples; at most `1` when the lift is consistent.
    pub cone_max_ratio: f64,
    /// Maximum excess of the sampled base-set cubic ratio over the
    /// declared constant.
    pub base_max_excess: f64,
    /// Whether both checks stay within `1e-6`.
    pub pass: bool,
    /// Cone point attaining the worst ratio.
    pub worst_point: DVector<f64>,
    /// Direction attaining the worst ratio.
    pub worst_direction: DVector<f64>,
}

/// Checks the equivalence between the projective cubic bound on the
/// base set and the classical cubic bound of the homogenized barrier
/// on the cone, sampling heights, radial directions, and mixtures of
/// radial and horizontal moves.
pub fn verify_lift_equivalence(
    set: &Arc<dyn BarrierSet>,
    start: &DVector<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<LiftReport> {
    let nu = set.params().nu;
    lift_equivalence_with_parameter(set, start, n_samples, seed, nu)
}

/// Same check as [`verify_lift_equivalence`] but homogenizing with an
/// explicit degree, used to confirm that a wrong degree is detected.
pub fn lift_equivalence_with_parameter(
    set: &Arc<dyn BarrierSet>,
    start: &DVector<f64>,
    n_samples: usize,
    seed: u64,
    nu_used: f64,
) -> Result<LiftReport> {
    let barrier: &dyn Barrier = set.as_ref();
    let gamma = set.params().gamma;
    let nu_true = set.params().nu;
    let kappa = (nu_true - 1.0).max(1e-12).sqrt();
    let lift = ConicLift::new(Arc::clone(set) as Arc<dyn Barrier>);
    // Homogenizing with a different degree rescales the lift uniformly.
    let scale = nu_used / nu_true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LiftReport {
        cone_max_ratio: 0.0,
        base_max_excess: f64::NEG_INFINITY,
        pass: false,
        worst_point: DVector::zeros(set.dim() + 1),
        worst_direction: DVector::zeros(set.dim() + 1),
    };
    let n = set.dim();
    let consider = |report: &mut LiftReport, y: &DVector<f64>, k: &DVector<f64>| -> Result<()> {
        let e = lift.eval(y)?;
        let second = scale * (k.transpose() * &e.hess * k)[(0, 0)];
        let third = scale * lift.third_directional(y, k)?;
        if second <= 0.0 {
            return Ok(());
        }
        let ratio = third.abs() / (2.0 * second.powf(1.5));
        if ratio > report.cone_max_ratio {
            report.cone_max_ratio = ratio;
            report.worst_point = y.clone();
            report.worst_direction = k.clone();
        }
        Ok(())
    };
    for i in 0..n_samples {
        // The critical mixtures below attain the cone bound exactly at
        // every interior point, so extreme boundary depth buys no
        // coverage here and only amplifies rounding in the tight
        // cancellations; cap the bias at relative depth 1e-3.
        let (x, d) = biased_point(set.as_ref(), start, i % 4, &mut rng)?;
        let t = rng.random_range(0.5..2.0);
        let mut y = DVector::zeros(n + 1);
        y[0] = t;
        for j in 0..n {
            y[j + 1] = t * x[j];
        }
        // Base-set cubic bound at the same point.
        let lg = local_geometry(barrier, &x, &d)?;
        let excess = lg.c3.abs() / (2.0 * lg.g0.powi(3)) - gamma;
        if excess > report.base_max_excess {
            report.base_max_excess = excess;
        }
        // Radial direction.
        consider(&mut report, &y, &y)?;
        // Random ambient direction.
        let k = random_direction(&mut rng, n + 1);
        consider(&mut report, &y, &k)?;
        // Mixtures of the horizontal lift of d with the radial ray,
        // including the critical weights where the cubic bound on the
        // cone is attained.
        let mut horizontal = DVector::zeros(n + 1);
        for j in 0..n {
            horizontal[j + 1] = t * d[j];
        }
        let mut alphas = vec![-2.0, -0.75, 0.0, 0.75, 2.0];
        if lg.g0 > 0.0 {
            alphas.push(lg.p0 - lg.g0 / kappa);
            alphas.push(lg.p0 + lg.g0 / kappa);
        }
        for alpha in alphas {
            let k = &horizontal + &y * alpha;
            consider(&mut report, &y, &k)?;
        }
    }
    report.pass = report.cone_max_ratio <= 1.0 + 1e-6 && report.base_max_excess <= 1e-6;
    Ok(report)
}

/// Trajectory of the controlled slope equation, sampled on the
/// integration grid.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub ts: Vec<f64>,
    /// Slope values `p(t)`.
    pub ps: Vec<f64>,
    /// Derivative values `p'(t)`.
    pub slopes: Vec<f64>,
    /// Whether integration stopped early because the solution blew up.
    pub truncated: bool,
}

/// Integrates the controlled second-order slope equation
/// `p'' = 6 p' p - 4 p^3 + 2 u(t) gamma (p' - p^2)^{3/2}` from
/// `p(0) = p0`, `p'(0) = s0` by the classical 4-stage explicit scheme
/// with `steps` fixed steps up to `t_end`.
///
/// The control is clamped to `[-1, 1]`. Any trajectory of this family
/// stays between the two extremal-control solutions, which coincide
/// with the one-dimensional derivative envelopes.
pub fn ode_envelope_oracle(
    p0: f64,
    s0: f64,
    gamma: f64,
    control: &dyn Fn(f64) -> f64,
    t_end: f64,
    steps: usize,
) -> Result<OdeTrajectory> {
    if !(s0 > p0 * p0) {
        return Err(Error::Domain(format!(
            "slope data needs s0 > p0^2, got p0 = {p0}, s0 = {s0}"
        )));
    }
    if !(gamma >= 0.0) || !(t_end > 0.0) || steps == 0 {
        return Err(Error::Domain(
            "envelope oracle needs gamma >= 0, t_end > 0 and at least one step".to_string(),
        ));
    }
    let rhs = |t: f64, p: f64, w: f64| -> (f64, f64) {
        let u = control(t).clamp(-1.0, 1.0);
        let excess = (w - p * p).max(0.0);
        (w, 6.0 * w * p - 4.0 * p.powi(3) + 2.0 * u * gamma * excess.powf(1.5))
    };
    let h = t_end / steps as f64;
    let mut t = 0.0;
    let mut p = p0;
    let mut w = s0;
    let mut traj = OdeTrajectory {
        ts: vec![0.0],
        ps: vec![p0],
        slopes: vec![s0],
        truncated: false,
    };
    for _ in 0..steps {
        let (k1p, k1w) = rhs(t, p, w);
        let (k2p, k2w) = rhs(t + h / 2.0, p + h / 2.0 * k1p, w + h / 2.0 * k1w);
        let (k3p, k3w) = rhs(t + h / 2.0, p + h / 2.0 * k2p, w + h / 2.0 * k2w);
        let (k4p, k4w) = rhs(t + h, p + h * k3p, w + h * k3w);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        t += h;
        if !p.is_finite() || !w.is_finite() || p.abs() > 1e8 || w.abs() > 1e16 {
            traj.truncated = true;
            break;
        }
        traj.ts.push(t);
        traj.ps.push(p);
        traj.slopes.push(w);
    }
    Ok(traj)
}

/// State of the two-distance control system.
#[derive(Clone, Copy)]
struct DecrementState {
    df: f64,
    dm: f64,
}

fn decrement_rhs(state: DecrementState, u: f64, model: DecrementModel) -> DecrementState {
    let coef = |d: f64| -> f64 {
        match model {
            DecrementModel::Projective(gamma) => gamma * (2.0 * d).sinh() / 2.0,
            DecrementModel::Affine => d,
        }
    };
    DecrementState {
        df: -1.0 + coef(state.df) * u,
        dm: -1.0 - coef(state.dm) * u,
    }
}

fn decrement_rk4(state: DecrementState, u: f64, h: f64, model: DecrementModel) -> DecrementState {
    let add = |s: DecrementState, d: DecrementState, f: f64| DecrementState {
        df: s.df + f * d.df,
        dm: s.dm + f * d.dm,
    };
    let k1 = decrement_rhs(state, u, model);
    let k2 = decrement_rhs(add(state, k1, h / 2.0), u, model);
    let k3 = decrement_rhs(add(state, k2, h / 2.0), u, model);
    let k4 = decrement_rhs(add(state, k3, h), u, model);
    DecrementState {
        df: state.df + h / 6.0 * (k1.df + 2.0 * k2.df + 2.0 * k3.df + k4.df),
        dm: state.dm + h / 6.0 * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm),
    }
}

/// Integrates one phase of the bang-bang run until `event` changes
/// sign, refining the crossing by bisection on the final sub-step.
/// Returns the state at the event.
fn decrement_phase(
    mut state: DecrementState,
    u: f64,
    model: DecrementModel,
    event: &dyn Fn(DecrementState) -> f64,
) -> Result<DecrementState> {
    const STEP: f64 = 1e-3;
    const MAX_TIME: f64 = 50.0;
    let mut t = 0.0;
    while t < MAX_TIME {
        let next = decrement_rk4(state, u, STEP, model);
        if state.dm.abs() > 50.0 || next.dm.abs() > 50.0 {
            return Err(Error::Domain(
                "decrement trajectory diverged before the phase event".to_string(),
            ));
        }
        if event(next) <= 0.0 {
            // Bisect the sub-step length to land on the event.
            let mut lo = 0.0;
            let mut hi = STEP;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let probe = decrement_rk4(state, u, mid, model);
                if event(probe) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(decrement_rk4(state, u, 0.5 * (lo + hi), model));
        }
        state = next;
        t += STEP;
    }
    Err(Error::Domain(
        "decrement phase event not reached within the time horizon".to_string(),
    ))
}

fn decrement_precondition(model: DecrementModel, lambda_bar: f64) -> Result<()> {
    if !(lambda_bar > 0.0) {
        return Err(Error::Domain(format!(
            "step size must be positive, got {lambda_bar}"
        )));
    }
    // Reuse the closed-form precondition checks.
    lambda_under(lambda_bar, model)?;
    Ok(())
}

/// Runs the worst-case two-distance control system: from both
/// distances at `lambda_bar`, the control pushes the moving target
/// away (`u = +1`) until the distance to the final target equals the
/// distance to the moving target on the far side, then reverses until
/// the final target is reached. Returns `|dm|` at that instant, which
/// reproduces the closed-form decrement bound.
pub fn ode_decrement_oracle(model: DecrementModel, lambda_bar: f64) -> Result<f64> {
    let (_, state) = decrement_run(model, lambda_bar)?;
    Ok(state.dm.abs())
}

/// State of the bang-bang run at the control switch, exposed so the
/// equal-distance switching rule can be asserted directly.
pub fn decrement_switch_state(model: DecrementModel, lambda_bar: f64) -> Result<(f64, f64)> {
    let (switch, _) = decrement_run(model, lambda_bar)?;
    Ok((switch.df, switch.dm))
}

fn decrement_run(
    model: DecrementModel,
    lambda_bar: f64,
) -> Result<(DecrementState, DecrementState)> {
    decrement_precondition(model, lambda_bar)?;
    let start = DecrementState { df: lambda_bar, dm: lambda_bar };
    let switch = decrement_phase(start, 1.0, model, &|s| s.df + s.dm)?;
    let end = decrement_phase(switch, -1.0, model, &|s| s.df)?;
    Ok((switch, end))
}

/// Finite-difference audit of the analytic derivatives at one point.
#[derive(Debug, Clone)]
pub struct FdReport {
    /// Worst relative error of the gradient against value differences.
    pub grad_err: f64,
    /// Worst relative error of the Hessian against gradient
    /// differences.
    pub hess_err: f64,
    /// Worst relative error of the third directional derivative
    /// against Hessian-form differences.
    pub third_err: f64,
    /// Whether every error stays within `1e-5`.
    pub pass: bool,
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Compares the barrier's gradient, Hessian, and third directional
/// derivative against central finite differences at `x`.
///
/// The stencil width adapts to the curvature along each differencing
/// direction: at boundary distance `s` the directional curvature grows
/// like `1/s^2`, so the width stays a factor of about `1e3` inside the
/// domain, and the homogeneous growth of the derivatives keeps the
/// quotients accurate. The width must be directional because one
/// shared width cannot serve a stiff and a flat direction at the same
/// anisotropic point; a flat direction keeps a wide stencil, which
/// also protects small cross entries from the rounding of large
/// gradient components.
pub fn fd_consistency(b: &dyn Barrier, x: &DVector<f64>) -> Result<FdReport> {
    let n = b.dim();
    let e = b.eval(x)?;
    let cap = 1e-5 * (1.0 + x.norm());
    let width = |curvature: f64| cap.min(3e-4 / curvature.max(0.0).sqrt());
    let mut report = FdReport { grad_err: 0.0, hess_err: 0.0, third_err: 0.0, pass: false };
    for i in 0..n {
        let step = width(e.hess[(i, i)]);
        let mut hi = x.clone();
        let mut lo = x.clone();
        hi[i] += step;
        lo[i] -= step;
        let ehi = b.eval(&hi)?;
        let elo = b.eval(&lo)?;
        let dv = (ehi.value - elo.value) / (2.0 * step);
        report.grad_err = report.grad_err.max(rel_err(dv, e.grad[i]));
        for j in 0..n {
            let dg = (ehi.grad[j] - elo.grad[j]) / (2.0 * step);
            report.hess_err = report.hess_err.max(rel_err(dg, e.hess[(i, j)]));
        }
    }
    let mut directions: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    directions.push(DVector::from_element(n, 1.0) / (n as f64).sqrt());
    for h in directions {
        let quad = |y: &DVector<f64>| -> Result<f64> {
            let ey = b.eval(y)?;
            Ok((h.transpose() * &ey.hess * &h)[(0, 0)])
        };
        let step = width((h.transpose() * &e.hess * &h)[(0, 0)]);
        let hi = x + &h * step;
        let lo = x - &h * step;
        let fd3 = (quad(&hi)? - quad(&lo)?) / (2.0 * step);
        let exact = b.third_directional(x, &h)?;
        report.third_err = report.third_err.max(rel_err(fd3, exact));
    }
    report.pass =
        report.grad_err <= 1e-5 && report.hess_err <= 1e-5 && report.third_err <= 1e-5;
    Ok(report)
}
