//! Barrier for the epigraph of a power function,
//! `{(x, y) : y >= |x|^p}` with exponent `p > 1`.

use nalgebra::{DMatrix, DVector};

use crate::barrier::{Barrier, Error, EvalBundle, Result};
use crate::oracle::{sigma_by_bisection, SetOracle};
use crate::params::BarrierParams;

/// Below this value of the scaled coordinate `t = |x| y^{-1/p}` the
/// barrier switches to its exact limit expressions on the axis; the
/// neglected corrections are of order `t^2`.
const AXIS_THRESHOLD: f64 = 1e-120;

/// `f(x, y) = -((p+1)/(3p)) log y + phi(|x| y^{-1/p}) / 3`.
///
/// The profile `phi` is given implicitly through an auxiliary variable
/// `rho in (0, inf)` that parametrizes `t in (0, 1)`:
///
/// ```text
/// log t = (1/2) log rho - (1/(2p)) log(rho + p + 1) - (1/(2q)) log(rho + q + 1)
/// 2 phi = (1 + 1/p) log(rho + p + 1) + (1 + 1/q) log(rho + q + 1)
/// ```
///
/// with `q` the conjugate exponent, `1/p + 1/q = 1`. The map
/// `rho -> t` is strictly increasing, so `rho(t)` is recovered by
/// bisection in `log rho`. The constant `gamma` of the barrier is
/// `(m - 2)/sqrt((2m - 1)(m + 1))` with `m = max(p, q)`; it vanishes
/// exactly for `p = 2`, where the barrier reduces to
/// `-(1/2) log(y - x^2) + (1/2) log 3`.
#[derive(Debug, Clone, Copy)]
pub struct PowerEpigraph {
    p: f64,
    q: f64,
    params: BarrierParams,
}

/// Profile derivatives at one value of `t`, all obtained from the
/// implicit parametrization by `rho`.
struct Profile {
    rho: f64,
    phi: f64,
    dphi: f64,
    d2phi: f64,
    d3phi: f64,
    drho: f64,
    d2rho: f64,
}

/// All ten partial derivatives of the barrier at an interior point.
struct Partials {
    value: f64,
    fx: f64,
    fy: f64,
    fxx: f64,
    fxy: f64,
    fyy: f64,
    fxxx: f64,
    fxxy: f64,
    fxyy: f64,
    fyyy: f64,
}

impl PowerEpigraph {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidConstruction(format!(
                "power exponent must be a finite number above one, got {p}"
            )));
        }
        let q = p / (p - 1.0);
        let m = p.max(q);
        let gamma = (m - 2.0) / ((2.0 * m - 1.0) * (m + 1.0)).sqrt();
        let params = BarrierParams::from_gamma(gamma)?;
        Ok(Self { p, q, params })
    }

    /// Exponent of the epigraph.
    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// `log t` as a function of `zeta = log rho`.
    fn log_t(&self, zeta: f64) -> f64 {
        let rho = zeta.exp();
        0.5 * zeta
            - (rho + self.p + 1.0).ln() / (2.0 * self.p)
            - (rho + self.q + 1.0).ln() / (2.0 * self.q)
    }

    /// `S(rho)`, the logarithmic sensitivity `2 rho d(log t)/d(rho)`.
    fn s_of(&self, rho: f64) -> f64 {
        (self.p + 1.0) / (self.p * (rho + self.p + 1.0))
            + (self.q + 1.0) / (self.q * (rho + self.q + 1.0))
    }

    fn s_deriv(&self, rho: f64) -> f64 {
        let dp = rho + self.p + 1.0;
        let dq = rho + self.q + 1.0;
        -(self.p + 1.0) / (self.p * dp * dp) - (self.q + 1.0) / (self.q * dq * dq)
    }

    /// Inverts the monotone map `rho -> t`.
    fn solve_rho(&self, t: f64) -> f64 {
        let target = t.ln();
        let (mut lo, mut hi) = (-708.0_f64, 708.0_f64);
        for _ in 0..200 {
            if hi - lo < 1e-14 * (1.0 + lo.abs()) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.log_t(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut zeta = 0.5 * (lo + hi);
        for _ in 0..2 {
            let slope = 0.5 * self.s_of(zeta.exp());
            zeta -= (self.log_t(zeta) - target) / slope;
        }
        zeta.exp()
    }

    fn profile(&self, t: f64) -> Profile {
        let rho = self.solve_rho(t);
        let s = self.s_of(rho);
        let sp = self.s_deriv(rho);
        let phi = 0.5
            * ((1.0 + 1.0 / self.p) * (rho + self.p + 1.0).ln()
                + (1.0 + 1.0 / self.q) * (rho + self.q + 1.0).ln());
        let dphi = rho / t;
        let drho = 2.0 * rho / (t * s);
        let d2phi = rho * (2.0 - s) / (s * t * t);
        let n = rho * (2.0 - s) / s;
        let np = (2.0 - s) / s - 2.0 * rho * sp / (s * s);
        let d3phi = np * drho / (t * t) - 2.0 * n / (t * t * t);
        let d2rho = 2.0 * rho * (2.0 - s - t * sp * drho) / (t * t * s * s);
        Profile {
            rho,
            phi,
            dphi,
            d2phi,
            d3phi,
            drho,
            d2rho,
        }
    }

    /// Splits an interior point into `(x, y, y^{-1/p}, t)`.
    fn interior(&self, point: &DVector<f64>) -> Result<(f64, f64, f64, f64)> {
        if point.len() != 2 {
            return Err(Error::Domain(format!(
                "point has {} coordinates, expected 2",
                point.len()
            )));
        }
        let (x, y) = (point[0], point[1]);
        if !(y > 0.0) {
            return Err(Error::NotInterior);
        }
        let u1 = y.powf(-1.0 / self.p);
        let t = x.abs() * u1;
        if !(t < 1.0) {
            return Err(Error::NotInterior);
        }
        Ok((x, y, u1, t))
    }

    fn partials(&self, point: &DVector<f64>) -> Result<Partials> {
        let (x, y, u1, t) = self.interior(point)?;
        let (p, q) = (self.p, self.q);
        let u2 = u1 * u1;
        let u3 = u2 * u1;
        if t < AXIS_THRESHOLD {
            let phi0 = 0.5 * ((1.0 + 1.0 / p) * (p + 1.0).ln() + (1.0 + 1.0 / q) * (q + 1.0).ln());
            let curv = (p + 1.0).powf(1.0 / p) * (q + 1.0).powf(1.0 / q);
            return Ok(Partials {
                value: -((p + 1.0) / (3.0 * p)) * y.ln() + phi0 / 3.0,
                fx: 0.0,
                fy: -(p + 1.0) / (3.0 * p * y),
                fxx: curv * u2 / 3.0,
                fxy: 0.0,
                fyy: (p + 1.0) / (3.0 * p * y * y),
                fxxx: 0.0,
                fxxy: -2.0 * curv * u2 / (3.0 * p * y),
                fxyy: 0.0,
                fyyy: -2.0 * (p + 1.0) / (3.0 * p * y * y * y),
            });
        }
        let sgn = if x >= 0.0 { 1.0 } else { -1.0 };
        let pr = self.profile(t);
        let b = pr.drho * t / p + (p + 1.0) + pr.rho;
        let bp = (pr.d2rho * t + pr.drho) / p + pr.drho;
        Ok(Partials {
            value: -((p + 1.0) / (3.0 * p)) * y.ln() + pr.phi / 3.0,
            fx: sgn * pr.dphi * u1 / 3.0,
            fy: -((p + 1.0) + pr.rho) / (3.0 * p * y),
            fxx: pr.d2phi * u2 / 3.0,
            fxy: -sgn * u1 * (t * pr.d2phi + pr.dphi) / (3.0 * p * y),
            fyy: b / (3.0 * p * y * y),
            fxxx: sgn * pr.d3phi * u3 / 3.0,
            fxxy: -u2 * (t * pr.d3phi + 2.0 * pr.d2phi) / (3.0 * p * y),
            fxyy: sgn * u1
                * (t * (2.0 * pr.d2phi + t * pr.d3phi) / p
                    + (1.0 + 1.0 / p) * (t * pr.d2phi + pr.dphi))
                / (3.0 * p * y * y),
            fyyy: -(bp * t / p + 2.0 * b) / (3.0 * p * y * y * y),
        })
    }
}

impl Barrier for PowerEpigraph {
    fn dim(&self) -> usize {
        2
    }

    fn params(&self) -> BarrierParams {
        self.params
    }

    fn eval(&self, point: &DVector<f64>) -> Result<EvalBundle> {
        let d = self.partials(point)?;
        Ok(EvalBundle {
            value: d.value,
            grad: DVector::from_column_slice(&[d.fx, d.fy]),
            hess: DMatrix::from_row_slice(2, 2, &[d.fxx, d.fxy, d.fxy, d.fyy]),
        })
    }

    fn third_directional(&self, point: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let d = self.partials(point)?;
        let (hx, hy) = (h[0], h[1]);
        Ok(d.fxxx * hx * hx * hx
            + 3.0 * d.fxxy * hx * hx * hy
            + 3.0 * d.fxyy * hx * hy * hy
            + d.fyyy * hy * hy * hy)
    }

    fn third_contracted(&self, point: &DVector<f64>, h: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.partials(point)?;
        let (hx, hy) = (h[0], h[1]);
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[
                d.fxxx * hx + d.fxxy * hy,
                d.fxxy * hx + d.fxyy * hy,
                d.fxxy * hx + d.fxyy * hy,
                d.fxyy * hx + d.fyyy * hy,
            ],
        ))
    }

    fn supports_third_contracted(&self) -> bool {
        true
    }
}

impl SetOracle for PowerEpigraph {
    fn contains(&self, point: &DVector<f64>, tol: f64) -> bool {
        if point.len() != 2 {
            return false;
        }
        let (x, y) = (point[0], point[1]);
        let bound = y + tol * (1.0 + y.abs());
        if !(bound >= 0.0) {
            return false;
        }
        if x == 0.0 {
            return true;
        }
        // |x|^p <= bound, tested in log form to avoid overflow
        self.p * x.abs().ln() <= bound.ln()
    }

    fn sigma(&self, point: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let (x0, y0, _, _) = self.interior(point)?;
        let (hx, hy) = (h[0], h[1]);
        let p = self.p;
        Ok(sigma_by_bisection(|t| {
            let x = x0 + t * hx;
            let y = y0 + t * hy;
            y > 0.0 && (x == 0.0 || p * x.abs().ln() < y.ln())
        }))
    }
}
