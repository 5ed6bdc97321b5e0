//! Homogenization of a barrier to the cone over its set.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::barrier::{Barrier, Error, EvalBundle, Result};

/// `F(t, x) = nu (f(x/t) - log t)` on the cone
/// `{(t, x) : t > 0, x/t in X}`, with coordinate `0` holding the cone
/// height `t`.
///
/// The lift is logarithmically homogeneous of degree `-nu` and its
/// metric `F'' - F' F'^T / nu`-style combination degenerates along rays,
/// so it deliberately does not present itself as a barrier of the
/// projective kind. It exposes plain derivatives of `F` instead.
pub struct ConicLift {
    base: Arc<dyn Barrier>,
    nu: f64,
}

impl ConicLift {
    pub fn new(base: Arc<dyn Barrier>) -> Self {
        let nu = base.params().nu;
        Self { base, nu }
    }

    /// Homogeneity degree of the lift.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Ambient dimension, one more than the base set.
    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    /// Splits a cone point into `(t, x/t)`.
    fn split(&self, point: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        if point.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, cone lives in dimension {}",
                point.len(),
                self.dim()
            )));
        }
        let t = point[0];
        if !(t > 0.0) {
            return Err(Error::NotInterior);
        }
        Ok((t, point.rows(1, self.base.dim()) / t))
    }

    /// Value, gradient and Hessian of the lift.
    pub fn eval(&self, point: &DVector<f64>) -> Result<EvalBundle> {
        let (t, z) = self.split(point)?;
        let e = self.base.eval(&z)?;
        let nu = self.nu;
        let n = self.base.dim();
        let gz = e.grad.dot(&z);
        let hz = &e.hess * &z;

        let value = nu * (e.value - t.ln());
        let mut grad = DVector::zeros(n + 1);
        grad[0] = -(nu / t) * (1.0 + gz);
        grad.rows_mut(1, n).copy_from(&(&e.grad * (nu / t)));

        let t2 = t * t;
        let mut hess = DMatrix::zeros(n + 1, n + 1);
        hess[(0, 0)] = (nu / t2) * (1.0 + 2.0 * gz + z.dot(&hz));
        let cross = (&hz + &e.grad) * (-nu / t2);
        for i in 0..n {
            hess[(0, i + 1)] = cross[i];
            hess[(i + 1, 0)] = cross[i];
        }
        hess
            .view_mut((1, 1), (n, n))
            .copy_from(&(&e.hess * (nu / t2)));
        Ok(EvalBundle { value, grad, hess })
    }

    /// Third directional derivative of the lift along `k`.
    pub fn third_directional(&self, point: &DVector<f64>, k: &DVector<f64>) -> Result<f64> {
        let (t, z) = self.split(point)?;
        if k.len() != self.dim() {
            return Err(Error::Domain(format!(
                "direction has {} coordinates, cone lives in dimension {}",
                k.len(),
                self.dim()
            )));
        }
        let kt = k[0];
        let kx = k.rows(1, self.base.dim());
        let w0 = (kx - &z * kt) / t;
        let e = self.base.eval(&z)?;
        let f3 = self.base.third_directional(&z, &w0)?;
        let f2 = (w0.transpose() * &e.hess * &w0)[(0, 0)];
        let f1 = e.grad.dot(&w0);
        let s = kt / t;
        Ok(self.nu * (f3 - 6.0 * s * f2 + 6.0 * s * s * f1 - 2.0 * s * s * s))
    }
}
