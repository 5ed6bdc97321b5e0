//! Constructions that build new barriers from existing ones: affine
//! sections, projective images and direct products.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::barrier::{Barrier, Error, EvalBundle, Result};
use crate::oracle::{BarrierSet, SetOracle};
use crate::params::BarrierParams;

/// Restriction of a barrier to an affine slice, `u -> f(x0 + M u)`.
///
/// The restriction keeps the constants of the base barrier.
pub struct AffineSection {
    base: Arc<dyn BarrierSet>,
    origin: DVector<f64>,
    map: DMatrix<f64>,
}

impl AffineSection {
    pub fn new(base: Arc<dyn BarrierSet>, origin: DVector<f64>, map: DMatrix<f64>) -> Result<Self> {
        if origin.len() != base.dim() || map.nrows() != base.dim() {
            return Err(Error::InvalidConstruction(format!(
                "slice origin and map must live in the base dimension {}",
                base.dim()
            )));
        }
        if map.ncols() == 0 || map.ncols() > map.nrows() {
            return Err(Error::InvalidConstruction(format!(
                "slice map {}x{} must have between 1 and {} columns",
                map.nrows(),
                map.ncols(),
                map.nrows()
            )));
        }
        let sv = map.clone().svd(false, false).singular_values;
        if sv.min() <= 1e-12 * sv.max() {
            return Err(Error::InvalidConstruction(
                "slice map must have full column rank".into(),
            ));
        }
        Ok(Self { base, origin, map })
    }

    fn embed(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        if u.len() != self.map.ncols() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, slice has {}",
                u.len(),
                self.map.ncols()
            )));
        }
        Ok(&self.origin + &self.map * u)
    }
}

impl Barrier for AffineSection {
    fn dim(&self) -> usize {
        self.map.ncols()
    }

    fn params(&self) -> BarrierParams {
        self.base.params()
    }

    fn eval(&self, u: &DVector<f64>) -> Result<EvalBundle> {
        let x = self.embed(u)?;
        let e = self.base.eval(&x)?;
        Ok(EvalBundle {
            value: e.value,
            grad: self.map.transpose() * &e.grad,
            hess: self.map.transpose() * &e.hess * &self.map,
        })
    }

    fn third_directional(&self, u: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let x = self.embed(u)?;
        self.base.third_directional(&x, &(&self.map * h))
    }

    fn third_contracted(&self, u: &DVector<f64>, h: &DVector<f64>) -> Result<DMatrix<f64>> {
        let x = self.embed(u)?;
        let t = self.base.third_contracted(&x, &(&self.map * h))?;
        Ok(self.map.transpose() * t * &self.map)
    }

    fn supports_third_contracted(&self) -> bool {
        self.base.supports_third_contracted()
    }
}

impl SetOracle for AffineSection {
    fn contains(&self, u: &DVector<f64>, tol: f64) -> bool {
        match self.embed(u) {
            Ok(x) => self.base.contains(&x, tol),
            Err(_) => false,
        }
    }

    fn sigma(&self, u: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let x = self.embed(u)?;
        self.base.sigma(&x, &(&self.map * h))
    }
}

/// Image of a barrier under an invertible projective transformation.
///
/// The map is given in homogeneous coordinates with the scalar
/// component first: `lambda * (1, x) = s (1, y)`. Writing the inverse
/// in blocks as first row `(rho0, rho^T)` and remaining rows
/// `(m0 | M)`, the chart of an image point is `r = rho0 + rho^T y`,
/// `m = m0 + M y`, and the image barrier is
/// `g(y) = f(m/r) - log r` on `{y : r(y) > 0, m/r in X}`.
/// It carries the same constants as the base barrier.
pub struct ProjectiveImage {
    base: Arc<dyn BarrierSet>,
    forward: DMatrix<f64>,
    rho0: f64,
    rho: DVector<f64>,
    m0: DVector<f64>,
    mmat: DMatrix<f64>,
}

impl ProjectiveImage {
    pub fn new(base: Arc<dyn BarrierSet>, lambda: DMatrix<f64>) -> Result<Self> {
        let n = base.dim();
        if lambda.nrows() != n + 1 || lambda.ncols() != n + 1 {
            return Err(Error::InvalidConstruction(format!(
                "homogeneous map must be {0}x{0} for a base of dimension {1}",
                n + 1,
                n
            )));
        }
        let inv = lambda
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidConstruction("homogeneous map must be invertible".into()))?;
        let rho0 = inv[(0, 0)];
        let rho = DVector::from_fn(n, |i, _| inv[(0, i + 1)]);
        let m0 = DVector::from_fn(n, |i, _| inv[(i + 1, 0)]);
        let mmat = DMatrix::from_fn(n, n, |i, j| inv[(i + 1, j + 1)]);
        Ok(Self {
            base,
            forward: lambda,
            rho0,
            rho,
            m0,
            mmat,
        })
    }

    /// Chart data `(r, m, m/r)` of an image point.
    fn chart(&self, y: &DVector<f64>) -> Result<(f64, DVector<f64>, DVector<f64>)> {
        if y.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, image lives in dimension {}",
                y.len(),
                self.dim()
            )));
        }
        let r = self.rho0 + self.rho.dot(y);
        if !(r > 0.0) {
            return Err(Error::NotInterior);
        }
        let m = &self.m0 + &self.mmat * y;
        let z = &m / r;
        Ok((r, m, z))
    }

    /// Pushes a base point through the map; fails when the point
    /// crosses the horizon of the chart.
    pub fn push(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, base lives in dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let mut homo = DVector::zeros(self.dim() + 1);
        homo[0] = 1.0;
        homo.rows_mut(1, self.dim()).copy_from(x);
        let image = &self.forward * homo;
        let s = image[0];
        if !(s > 0.0) {
            return Err(Error::Domain(
                "point maps across the horizon of the projective chart".into(),
            ));
        }
        Ok(image.rows(1, self.dim()) / s)
    }
}

impl Barrier for ProjectiveImage {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn params(&self) -> BarrierParams {
        self.base.params()
    }

    fn eval(&self, y: &DVector<f64>) -> Result<EvalBundle> {
        let (r, _, z) = self.chart(y)?;
        let e = self.base.eval(&z)?;
        let w = (&self.mmat - &z * self.rho.transpose()) / r;
        let wg = w.transpose() * &e.grad;
        let value = e.value - r.ln();
        let grad = &wg - &self.rho / r;
        let hess = w.transpose() * &e.hess * &w
            - (&wg * self.rho.transpose() + &self.rho * wg.transpose()) / r
            + &self.rho * self.rho.transpose() / (r * r);
        Ok(EvalBundle { value, grad, hess })
    }

    fn third_directional(&self, y: &DVector<f64>, k: &DVector<f64>) -> Result<f64> {
        let (r, _, z) = self.chart(y)?;
        let kr = self.rho.dot(k);
        let w0 = (&self.mmat * k - &z * kr) / r;
        let e = self.base.eval(&z)?;
        let f3 = self.base.third_directional(&z, &w0)?;
        let f2 = (w0.transpose() * &e.hess * &w0)[(0, 0)];
        let f1 = e.grad.dot(&w0);
        let s = kr / r;
        Ok(f3 - 6.0 * s * f2 + 6.0 * s * s * f1 - 2.0 * s * s * s)
    }

    fn third_contracted(&self, y: &DVector<f64>, k: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (r, _, z) = self.chart(y)?;
        let e = self.base.eval(&z)?;
        let kr = self.rho.dot(k);
        let zdot = (&self.mmat * k - &z * kr) / r;
        let w = (&self.mmat - &z * self.rho.transpose()) / r;
        let wdot = -(&zdot * self.rho.transpose() + &w * kr) / r;
        let t3 = self.base.third_contracted(&z, &zdot)?;
        let a = wdot.transpose() * (&e.hess * &w);
        let avec = wdot.transpose() * &e.grad + w.transpose() * (&e.hess * &zdot);
        let wg = w.transpose() * &e.grad;
        let mut out = &a + a.transpose();
        out += w.transpose() * t3 * &w;
        out -= (&avec * self.rho.transpose() + &self.rho * avec.transpose()) / r;
        out += (&wg * self.rho.transpose() + &self.rho * wg.transpose()) * (kr / (r * r));
        out -= &self.rho * self.rho.transpose() * (2.0 * kr / (r * r * r));
        Ok(out)
    }

    fn supports_third_contracted(&self) -> bool {
        self.base.supports_third_contracted()
    }
}

impl SetOracle for ProjectiveImage {
    fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        match self.chart(y) {
            Ok((_, _, z)) => self.base.contains(&z, tol),
            Err(_) => false,
        }
    }

    fn sigma(&self, y: &DVector<f64>, k: &DVector<f64>) -> Result<f64> {
        let (r, m, z) = self.chart(y)?;
        let kr = self.rho.dot(k);
        let km = &self.mmat * k;
        // direction traced in the base chart, up to reparametrization
        let d = km * r - m * kr;
        let s = self.base.sigma(&z, &d)?;
        Ok(((s - r * kr) / (r * r)).max(0.0))
    }
}

/// Barrier of a product set,
/// `f(x1, x2) = (nu1 f1(x1) + nu2 f2(x2)) / (nu1 + nu2)`.
///
/// The combined constants are the ones of a barrier with
/// `nu = nu1 + nu2`.
pub struct DirectProduct {
    left: Arc<dyn BarrierSet>,
    right: Arc<dyn BarrierSet>,
    params: BarrierParams,
}

impl DirectProduct {
    pub fn new(left: Arc<dyn BarrierSet>, right: Arc<dyn BarrierSet>) -> Result<Self> {
        let params = BarrierParams::from_nu(left.params().nu + right.params().nu)?;
        Ok(Self {
            left,
            right,
            params,
        })
    }

    fn split(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, product lives in dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let n1 = self.left.dim();
        Ok((
            x.rows(0, n1).into_owned(),
            x.rows(n1, self.right.dim()).into_owned(),
        ))
    }

    fn weights(&self) -> (f64, f64) {
        let total = self.params.nu;
        (
            self.left.params().nu / total,
            self.right.params().nu / total,
        )
    }
}

impl Barrier for DirectProduct {
    fn dim(&self) -> usize {
        self.left.dim() + self.right.dim()
    }

    fn params(&self) -> BarrierParams {
        self.params
    }

    fn eval(&self, x: &DVector<f64>) -> Result<EvalBundle> {
        let (x1, x2) = self.split(x)?;
        let e1 = self.left.eval(&x1)?;
        let e2 = self.right.eval(&x2)?;
        let (w1, w2) = self.weights();
        let (n1, n2) = (self.left.dim(), self.right.dim());
        let mut grad = DVector::zeros(n1 + n2);
        grad.rows_mut(0, n1).copy_from(&(&e1.grad * w1));
        grad.rows_mut(n1, n2).copy_from(&(&e2.grad * w2));
        let mut hess = DMatrix::zeros(n1 + n2, n1 + n2);
        hess.view_mut((0, 0), (n1, n1)).copy_from(&(&e1.hess * w1));
        hess.view_mut((n1, n1), (n2, n2))
            .copy_from(&(&e2.hess * w2));
        Ok(EvalBundle {
            value: w1 * e1.value + w2 * e2.value,
            grad,
            hess,
        })
    }

    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let (x1, x2) = self.split(x)?;
        let (h1, h2) = self.split(h)?;
        let (w1, w2) = self.weights();
        Ok(w1 * self.left.third_directional(&x1, &h1)?
            + w2 * self.right.third_directional(&x2, &h2)?)
    }

    fn third_contracted(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (x1, x2) = self.split(x)?;
        let (h1, h2) = self.split(h)?;
        let (w1, w2) = self.weights();
        let (n1, n2) = (self.left.dim(), self.right.dim());
        let t1 = self.left.third_contracted(&x1, &h1)?;
        let t2 = self.right.third_contracted(&x2, &h2)?;
        let mut out = DMatrix::zeros(n1 + n2, n1 + n2);
        out.view_mut((0, 0), (n1, n1)).copy_from(&(t1 * w1));
        out.view_mut((n1, n1), (n2, n2)).copy_from(&(t2 * w2));
        Ok(out)
    }

    fn supports_third_contracted(&self) -> bool {
        self.left.supports_third_contracted() && self.right.supports_third_contracted()
    }
}

impl SetOracle for DirectProduct {
    fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self.split(x) {
            Ok((x1, x2)) => self.left.contains(&x1, tol) && self.right.contains(&x2, tol),
            Err(_) => false,
        }
    }

    fn sigma(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let (x1, x2) = self.split(x)?;
        let (h1, h2) = self.split(h)?;
        Ok(self
            .left
            .sigma(&x1, &h1)?
            .max(self.right.sigma(&x2, &h2)?))
    }
}
