//! Boundary measures, inner and outer quadric regions, extremal
//! one-dimensional curves, derivative bounds, and curvature
//! certificates.
//!
//! Everything here quantifies how a barrier sees the boundary of its
//! domain. The ray measure `sigma` is the reciprocal of the distance to
//! the boundary along a direction, `pi` symmetrizes it over both ray
//! orientations, and `omega` normalizes the slack `sigma - f'[h]` by
//! the metric length of `h`. Around an interior point the barrier
//! carves out an inner quadric region guaranteed to lie inside the set
//! and an outer one guaranteed to contain it; along a single line it
//! pins the barrier between two explicit two-pole curves.

use nalgebra::DVector;

use crate::barrier::{local_geometry, Barrier, Error, Result};
use crate::oracle::BarrierSet;
use crate::params::nu_from_gamma;

/// Boundary measures of the line through `x` spanned by `h`.
#[derive(Debug, Clone, Copy)]
pub struct RayMeasures {
    /// `sigma_x(h)`: reciprocal of the largest step `t` with `x + t h`
    /// still in the set, `0` when the ray never leaves.
    pub sigma: f64,
    /// `max(sigma_x(h), sigma_x(-h))`.
    pub pi: f64,
    /// `(sigma - f'(x)[h]) / sqrt(G(x)[h,h])`.
    pub omega: f64,
}

/// Measures the boundary along `x + t h`: the ray measure, its
/// symmetrization over both orientations, and the metric-normalized
/// slack.
pub fn boundary_query(
    set: &dyn BarrierSet,
    x: &DVector<f64>,
    h: &DVector<f64>,
) -> Result<RayMeasures> {
    let lg = local_geometry(set, x, h)?;
    let forward = set.sigma(x, h)?;
    let backward = set.sigma(x, &(-h))?;
    Ok(RayMeasures {
        sigma: forward,
        pi: forward.max(backward),
        omega: (forward - lg.p0) / lg.g0,
    })
}

/// Quadric regions a barrier associates with an interior anchor point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// Inner region `1 - f'[d] > sqrt((nu-1) G[d,d])`, contained in the
    /// set.
    DikinSet,
    /// Outer region `1 - f'[d] > sqrt(G[d,d]/(nu-1))`, containing the
    /// set.
    OuterSet,
    /// Unit ball `d^T F'' d < 1` of the rescaled Hessian `F = nu f`,
    /// contained in the inner region.
    ClassicEllipsoid,
}

/// Tests whether `x` lies in the region of `kind` anchored at the
/// interior point `x0`.
///
/// Membership is strict; points exactly on the quadric are outside.
/// Fails when `x0` is not interior.
pub fn region_contains(
    b: &dyn Barrier,
    x0: &DVector<f64>,
    x: &DVector<f64>,
    kind: RegionKind,
) -> Result<bool> {
    let e = b.eval(x0)?;
    let nu = b.params().nu;
    let delta = x - x0;
    let fd = e.grad.dot(&delta);
    let hd = (delta.transpose() * &e.hess * &delta)[(0, 0)];
    let gd = (hd - fd * fd).max(0.0);
    Ok(match kind {
        RegionKind::DikinSet => 1.0 - fd > ((nu - 1.0) * gd).sqrt(),
        RegionKind::OuterSet => 1.0 - fd > (gd / (nu - 1.0)).sqrt(),
        RegionKind::ClassicEllipsoid => nu * hd < 1.0,
    })
}

/// Distance from `x0` to the boundary of the region of `kind`, in
/// multiples of `h`.
///
/// The inner and outer regions are half-line intersections of two
/// affine conditions; along a fixed ray each reduces to one linear
/// equation whose root is returned, or `inf` when the ray stays inside
/// the region forever.
pub fn region_radius(
    b: &dyn Barrier,
    x0: &DVector<f64>,
    h: &DVector<f64>,
    kind: RegionKind,
) -> Result<f64> {
    let lg = local_geometry(b, x0, h)?;
    let nu = b.params().nu;
    let kappa = (nu - 1.0).sqrt();
    let denom = match kind {
        RegionKind::DikinSet => lg.p0 + kappa * lg.g0,
        RegionKind::OuterSet => lg.p0 + lg.g0 / kappa,
        RegionKind::ClassicEllipsoid => (nu * lg.s0).sqrt(),
    };
    Ok(if denom > 0.0 { 1.0 / denom } else { f64::INFINITY })
}

/// Radius, in multiples of `h`, of the classical outer norm ball
/// `d^T F''(x*) d <= (nu + 2 sqrt(nu))^2` about the analytic center,
/// where `s0 = f''(x*)[h,h]`.
///
/// The containment guarantee behind this radius holds only when the
/// anchor is the analytic center of the set.
pub fn classic_outer_radius(nu: f64, s0: f64) -> Result<f64> {
    if !(nu >= 2.0) || !(s0 > 0.0) {
        return Err(Error::Domain(format!(
            "classic outer radius needs nu >= 2 and s0 > 0, got nu={nu}, s0={s0}"
        )));
    }
    Ok((nu + 2.0 * nu.sqrt()) / (nu * s0).sqrt())
}

/// Outcome of checking the two-sided recession bounds and the gradient
/// probe inequality at one point.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeBounds {
    /// Measured `sigma_x(h)`.
    pub sigma: f64,
    /// Guaranteed lower bound `max(0, f'[h] + sqrt(G[h,h]/(nu-1)))`.
    pub sigma_low: f64,
    /// Guaranteed upper bound `max(0, f'[h] + sqrt((nu-1) G[h,h]))`.
    pub sigma_high: f64,
    /// Measured `pi_x(h)`.
    pub pi: f64,
    /// Guaranteed lower bound `|f'[h]| + sqrt(G[h,h]/(nu-1))`.
    pub pi_low: f64,
    /// Guaranteed upper bound `|f'[h]| + sqrt((nu-1) G[h,h])`.
    pub pi_high: f64,
    /// `<f'(x), y - x>` for the supplied probe `y`; below `1` whenever
    /// `y` is interior.
    pub probe_gap: f64,
    /// Whether every bound held, inequalities relaxed by a `1e-9`
    /// relative slack.
    pub ok: bool,
}

/// Checks the recession-measure bounds along `h` and the gradient probe
/// inequality against `probe` at the interior point `x`.
///
/// The probe inequality `<f'(x), y - x> < 1` is guaranteed only for
/// probes `y` interior to the set; the caller picks `y`.
pub fn derivative_bounds_check(
    set: &dyn BarrierSet,
    x: &DVector<f64>,
    h: &DVector<f64>,
    probe: &DVector<f64>,
) -> Result<DerivativeBounds> {
    let lg = local_geometry(set, x, h)?;
    let kappa = (set.params().nu - 1.0).sqrt();
    let measures = boundary_query(set, x, h)?;
    let sigma_low = (lg.p0 + lg.g0 / kappa).max(0.0);
    let sigma_high = (lg.p0 + lg.g0 * kappa).max(0.0);
    let pi_low = lg.p0.abs() + lg.g0 / kappa;
    let pi_high = lg.p0.abs() + lg.g0 * kappa;
    let grad = set.eval(x)?.grad;
    let probe_gap = grad.dot(&(probe - x));
    let tol = 1e-9 * (1.0 + measures.sigma.abs() + measures.pi.abs());
    let ok = measures.sigma >= sigma_low - tol
        && measures.sigma <= sigma_high + tol
        && measures.pi >= pi_low - tol
        && measures.pi <= pi_high + tol
        && probe_gap < 1.0;
    Ok(DerivativeBounds {
        sigma: measures.sigma,
        sigma_low,
        sigma_high,
        pi: measures.pi,
        pi_low,
        pi_high,
        probe_gap,
        ok,
    })
}

/// Closed-form upper bound on `f''(x + t h)[h,h]` from the values at
/// `t = 0`: Hessian `h0 = f''(x)[h,h]`, slope `d1 = f'(x)[h]`, and ray
/// measure `sigma = sigma_x(h)`.
///
/// Valid for `0 <= t < 1/sigma` (any `t >= 0` when `sigma = 0`). For
/// genuine barrier data the bound never exceeds the classical
/// `h0 / (1 - sigma t)^2`; when the correction term's denominator
/// vanishes (possible only for inconsistent inputs) the bound
/// degenerates to `inf`.
pub fn hessian_ray_bound(h0: f64, d1: f64, sigma: f64, t: f64) -> Result<f64> {
    if !(h0 > 0.0) {
        return Err(Error::Domain(format!(
            "initial Hessian value must be positive, got {h0}"
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("ray measure must be nonnegative, got {sigma}")));
    }
    if !(t >= 0.0) || (sigma > 0.0 && t >= 1.0 / sigma) {
        return Err(Error::Domain(format!(
            "t={t} lies outside the feasible ray segment [0, 1/sigma)"
        )));
    }
    let damp = (1.0 - sigma * t).powi(2);
    let b = h0 - d1 * sigma;
    if t == 0.0 || b == 0.0 {
        // At t = 0 the correction carries a factor t; with h0 = d1 sigma
        // it carries a factor (h0 - d1 sigma)^2. Both make it vanish.
        return Ok(h0 / damp);
    }
    let denom = sigma - d1 + t * b;
    if denom == 0.0 {
        return Ok(f64::INFINITY);
    }
    let bracket = (2.0 * (1.0 - sigma * t) + t * (sigma - d1)) * (sigma - d1) + t * (h0 - d1 * d1);
    let correction = t * b * b * bracket / (denom * denom);
    Ok((h0 - correction) / damp)
}

/// Checks the matrix curvature certificate
/// `(sigma - f'[h]) C[.,.,h] / 2 <= (sigma - f'[h])^2 G - (Gh)(Gh)^T`
/// by an eigenvalue test with a `1e-9` relative floor.
///
/// Requires a barrier that provides contracted third derivatives.
pub fn negcurv_certificate(
    set: &dyn BarrierSet,
    x: &DVector<f64>,
    h: &DVector<f64>,
) -> Result<bool> {
    let lg = local_geometry(set, x, h)?;
    let cubic = lg
        .cubic_contracted
        .ok_or(Error::UnsupportedCapability("third_contracted"))?;
    let slack = set.sigma(x, h)? - lg.p0;
    let gh = &lg.metric * h;
    let diff = slack * slack * &lg.metric - &gh * gh.transpose() - 0.5 * slack * cubic;
    let eig = diff.symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(min >= -1e-9 * (1.0 + max_abs))
}

/// Report of the monotonicity and pairing properties of `omega` along a
/// ray.
#[derive(Debug, Clone)]
pub struct OmegaProbe {
    /// `omega_{x + t h}(h)` for each grid value `t`.
    pub omegas: Vec<f64>,
    /// Whether the sequence is non-decreasing up to a `1e-9` relative
    /// slack.
    pub nondecreasing: bool,
    /// `omega_x(h) * omega_x(-h)`, at least `1` in exact arithmetic.
    pub product: f64,
    /// Whether the product bound held.
    pub product_ok: bool,
    /// `(sigma_x(h) + sigma_x(-h)) / 2`.
    pub mean_sigma: f64,
    /// `sqrt(G(x)[h,h])`, a lower bound for `mean_sigma`.
    pub metric_length: f64,
    /// Whether the mean bound held.
    pub mean_ok: bool,
}

/// Evaluates `omega` along `x + t h` over `tgrid` and checks its
/// monotonicity together with the two pointwise inequalities
/// `omega(h) omega(-h) >= 1` and `(sigma(h) + sigma(-h))/2 >= sqrt(G[h,h])`.
///
/// Every grid point must be interior.
pub fn omega_monotonicity_probe(
    set: &dyn BarrierSet,
    x: &DVector<f64>,
    h: &DVector<f64>,
    tgrid: &[f64],
) -> Result<OmegaProbe> {
    let mut omegas = Vec::with_capacity(tgrid.len());
    for &t in tgrid {
        let xt = x + h * t;
        omegas.push(boundary_query(set, &xt, h)?.omega);
    }
    let nondecreasing = omegas
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9 * (1.0 + w[0].abs()));
    let forward = boundary_query(set, x, h)?;
    let backward = boundary_query(set, x, &(-h))?;
    let product = forward.omega * backward.omega;
    let mean_sigma = 0.5 * (forward.sigma + backward.sigma);
    let metric_length = local_geometry(set, x, h)?.g0;
    Ok(OmegaProbe {
        omegas,
        nondecreasing,
        product,
        product_ok: product >= 1.0 - 1e-9,
        mean_sigma,
        metric_length,
        mean_ok: mean_sigma >= metric_length * (1.0 - 1e-9),
    })
}

/// One-dimensional two-pole curve matching prescribed first and second
/// derivatives at `t = 0` and riding one side of the allowed cubic
/// band: its corrected cubic form equals `+2 gamma G^{3/2}` on the
/// upper curve and `-2 gamma G^{3/2}` on the lower one.
///
/// The curve is `f0 - w_a log(1 - t a) - w_b log(1 - t b)` with weights
/// `w_a = (nu-1)/nu` and `w_b = 1/nu`, so its slope is a convex
/// combination of the two simple poles `a` and `b`.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeCurve {
    nu: f64,
    /// Pole carrying weight `(nu-1)/nu`.
    a: f64,
    /// Pole carrying weight `1/nu`.
    b: f64,
    upper: bool,
    f0: f64,
}

impl EnvelopeCurve {
    fn new(p0: f64, s0: f64, gamma: f64, f0: f64, upper: bool) -> Result<Self> {
        let g0sq = s0 - p0 * p0;
        if !(g0sq > 0.0) {
            return Err(Error::Domain(format!(
                "envelope anchor needs s0 > p0^2, got p0={p0}, s0={s0}"
            )));
        }
        let g0 = g0sq.sqrt();
        let nu = nu_from_gamma(gamma)?;
        let kappa = (nu - 1.0).sqrt();
        let (a, b) = if upper {
            (p0 - g0 / kappa, p0 + g0 * kappa)
        } else {
            (p0 + g0 / kappa, p0 - g0 * kappa)
        };
        Ok(Self { nu, a, b, upper, f0 })
    }

    /// Curve whose slope bounds the barrier derivative from above.
    pub fn upper(p0: f64, s0: f64, gamma: f64, f0: f64) -> Result<Self> {
        Self::new(p0, s0, gamma, f0, true)
    }

    /// Curve whose slope bounds the barrier derivative from below.
    pub fn lower(p0: f64, s0: f64, gamma: f64, f0: f64) -> Result<Self> {
        Self::new(p0, s0, gamma, f0, false)
    }

    /// Right endpoint of the maximal interval, `inf` when the curve
    /// extends forever.
    pub fn right_endpoint(&self) -> f64 {
        let fastest = self.a.max(self.b);
        if fastest > 0.0 {
            1.0 / fastest
        } else {
            f64::INFINITY
        }
    }

    /// Left endpoint of the maximal interval, `-inf` when the curve
    /// extends forever.
    pub fn left_endpoint(&self) -> f64 {
        let fastest = self.a.min(self.b);
        if fastest < 0.0 {
            1.0 / fastest
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Whether `t` lies strictly inside the maximal interval.
    pub fn contains(&self, t: f64) -> bool {
        1.0 - t * self.a > 0.0 && 1.0 - t * self.b > 0.0
    }

    fn pole_gaps(&self, t: f64) -> Result<(f64, f64)> {
        let da = 1.0 - t * self.a;
        let db = 1.0 - t * self.b;
        if da <= 0.0 || db <= 0.0 {
            return Err(Error::EnvelopeOutsideInterval { upper: self.upper, t });
        }
        Ok((da, db))
    }

    fn weights(&self) -> (f64, f64) {
        ((self.nu - 1.0) / self.nu, 1.0 / self.nu)
    }

    /// Curve value at offset `t` from the anchor.
    pub fn value(&self, t: f64) -> Result<f64> {
        let (da, db) = self.pole_gaps(t)?;
        let (wa, wb) = self.weights();
        Ok(self.f0 - wa * da.ln() - wb * db.ln())
    }

    /// First derivative of the curve at offset `t`.
    pub fn slope(&self, t: f64) -> Result<f64> {
        let (da, db) = self.pole_gaps(t)?;
        let (wa, wb) = self.weights();
        Ok(wa * self.a / da + wb * self.b / db)
    }

    /// Second derivative of the curve at offset `t`.
    pub fn slope_derivative(&self, t: f64) -> Result<f64> {
        let (da, db) = self.pole_gaps(t)?;
        let (wa, wb) = self.weights();
        Ok(wa * (self.a / da).powi(2) + wb * (self.b / db).powi(2))
    }

    /// Metric value `f'' - (f')^2` along the curve.
    pub fn metric(&self, t: f64) -> Result<f64> {
        let p = self.slope(t)?;
        Ok(self.slope_derivative(t)? - p * p)
    }

    /// Third derivative of the curve at offset `t`.
    pub fn third(&self, t: f64) -> Result<f64> {
        let (da, db) = self.pole_gaps(t)?;
        let (wa, wb) = self.weights();
        Ok(2.0 * (wa * (self.a / da).powi(3) + wb * (self.b / db).powi(3)))
    }
}

/// Both envelope curves anchored at `(p0, s0)` evaluated at offset `t`,
/// with the right endpoints of their maximal intervals.
#[derive(Debug, Clone, Copy)]
pub struct Envelopes1D {
    /// Lower bound on the derivative at offset `t`.
    pub p_minus: f64,
    /// Upper bound on the derivative at offset `t`.
    pub p_plus: f64,
    /// Lower curve value at offset `t`, anchored to `0` at `t = 0`.
    pub f_minus: f64,
    /// Upper curve value at offset `t`, anchored to `0` at `t = 0`.
    pub f_plus: f64,
    /// Right endpoint of the upper curve's interval (`inf` if none).
    pub iplus_right: f64,
    /// Right endpoint of the lower curve's interval (`inf` if none).
    pub iminus_right: f64,
}

/// Evaluates the two envelope curves determined by `p(0) = p0`,
/// `p'(0) = s0`, and the cubic bound constant `gamma` at offset `t`.
///
/// The derivative of any barrier with these initial data stays between
/// `p_minus` and `p_plus` on both sides of the anchor; the values
/// bracket the barrier in the signed sense, with `f_plus` above on the
/// right of the anchor and below on the left.
pub fn envelopes_1d(p0: f64, s0: f64, gamma: f64, t: f64) -> Result<Envelopes1D> {
    let up = EnvelopeCurve::upper(p0, s0, gamma, 0.0)?;
    let lo = EnvelopeCurve::lower(p0, s0, gamma, 0.0)?;
    Ok(Envelopes1D {
        p_minus: lo.slope(t)?,
        p_plus: up.slope(t)?,
        f_minus: lo.value(t)?,
        f_plus: up.value(t)?,
        iplus_right: up.right_endpoint(),
        iminus_right: lo.right_endpoint(),
    })
}
