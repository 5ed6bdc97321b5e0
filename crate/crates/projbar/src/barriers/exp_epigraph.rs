//! Barrier for the region above the exponential graph,
//! `{(x, y) : y >= exp(x)}`.

use nalgebra::{DMatrix, DVector};

use crate::barrier::{Barrier, Error, EvalBundle, Result};
use crate::oracle::{sigma_by_bisection, SetOracle};
use crate::params::BarrierParams;

/// `f(x, y) = -(1/3) (log(log y - x) + log y)`.
///
/// The normalization by three gives `nu = 3` and `gamma = 1/sqrt 2`.
#[derive(Debug, Clone, Copy)]
pub struct ExpEpigraph {
    params: BarrierParams,
}

impl ExpEpigraph {
    pub fn new() -> Self {
        let params = BarrierParams::from_nu(3.0).expect("3 is a valid barrier parameter");
        Self { params }
    }

    /// Splits an interior point into `(x, y, w)` with `w = log y - x`.
    fn interior(&self, point: &DVector<f64>) -> Result<(f64, f64, f64)> {
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
        let w = y.ln() - x;
        if !(w > 0.0) {
            return Err(Error::NotInterior);
        }
        Ok((x, y, w))
    }

    /// All distinct third partials at an interior point, as
    /// `(fxxx, fxxy, fxyy, fyyy)`.
    fn third_partials(&self, point: &DVector<f64>) -> Result<(f64, f64, f64, f64)> {
        let (_, y, w) = self.interior(point)?;
        let w3 = w * w * w;
        let fxxx = 2.0 / (3.0 * w3);
        let fxxy = -2.0 / (3.0 * w3 * y);
        let fxyy = (2.0 + w) / (3.0 * w3 * y * y);
        let fyyy = -(2.0 + 2.0 / w + 3.0 / (w * w) + 2.0 / w3) / (3.0 * y * y * y);
        Ok((fxxx, fxxy, fxyy, fyyy))
    }
}

impl Default for ExpEpigraph {
    fn default() -> Self {
        Self::new()
    }
}

impl Barrier for ExpEpigraph {
    fn dim(&self) -> usize {
        2
    }

    fn params(&self) -> BarrierParams {
        self.params
    }

    fn eval(&self, point: &DVector<f64>) -> Result<EvalBundle> {
        let (_, y, w) = self.interior(point)?;
        let value = -(w.ln() + y.ln()) / 3.0;
        let grad = DVector::from_column_slice(&[1.0 / (3.0 * w), -(1.0 + w) / (3.0 * y * w)]);
        let w2 = w * w;
        let fxx = 1.0 / (3.0 * w2);
        let fxy = -1.0 / (3.0 * w2 * y);
        let fyy = (w2 + w + 1.0) / (3.0 * w2 * y * y);
        let hess = DMatrix::from_row_slice(2, 2, &[fxx, fxy, fxy, fyy]);
        Ok(EvalBundle { value, grad, hess })
    }

    fn third_directional(&self, point: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let (fxxx, fxxy, fxyy, fyyy) = self.third_partials(point)?;
        let (hx, hy) = (h[0], h[1]);
        Ok(fxxx * hx * hx * hx
            + 3.0 * fxxy * hx * hx * hy
            + 3.0 * fxyy * hx * hy * hy
            + fyyy * hy * hy * hy)
    }

    fn third_contracted(&self, point: &DVector<f64>, h: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (fxxx, fxxy, fxyy, fyyy) = self.third_partials(point)?;
        let (hx, hy) = (h[0], h[1]);
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[
                fxxx * hx + fxxy * hy,
                fxxy * hx + fxyy * hy,
                fxxy * hx + fxyy * hy,
                fxyy * hx + fyyy * hy,
            ],
        ))
    }

    fn supports_third_contracted(&self) -> bool {
        true
    }
}

impl SetOracle for ExpEpigraph {
    fn contains(&self, point: &DVector<f64>, tol: f64) -> bool {
        if point.len() != 2 {
            return false;
        }
        let (x, y) = (point[0], point[1]);
        // exp(x) <= y + slack, tested in log form to avoid overflow
        let bound = y + tol * (1.0 + y.abs());
        bound > 0.0 && x <= bound.ln()
    }

    fn sigma(&self, point: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let (x0, y0, _) = self.interior(point)?;
        let (hx, hy) = (h[0], h[1]);
        Ok(sigma_by_bisection(|t| {
            let y = y0 + t * hy;
            y > 0.0 && y.ln() > x0 + t * hx
        }))
    }
}
