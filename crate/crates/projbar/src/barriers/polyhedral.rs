//! Normalized logarithmic barrier of a polyhedron `{x : A x < b}`.

use nalgebra::{DMatrix, DVector};

use crate::barrier::{Barrier, Error, EvalBundle, Result};
use crate::oracle::SetOracle;
use crate::params::BarrierParams;

/// `f(x) = -(1/m) sum_i log(b_i - a_i^T x)` over the `m` facets of a
/// polyhedron with nonempty interior.
///
/// The `1/m` normalization makes the barrier projectively
/// self-concordant with `gamma = (m - 2)/sqrt(m - 1)` and `nu = m`.
#[derive(Debug, Clone)]
pub struct Polyhedral {
    a: DMatrix<f64>,
    b: DVector<f64>,
    params: BarrierParams,
}

impl Polyhedral {
    /// Builds the barrier from the facet description `A x < b`.
    ///
    /// Requires `m >= 2` rows, full column rank, and `b != 0`; a zero
    /// right-hand side describes a cone with apex at the origin, whose
    /// radial direction degenerates the projective metric everywhere.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let m = a.nrows();
        let n = a.ncols();
        if b.len() != m {
            return Err(Error::InvalidConstruction(format!(
                "facet matrix has {m} rows but the right-hand side has {} entries",
                b.len()
            )));
        }
        if m < 2 {
            return Err(Error::InvalidConstruction(
                "a polyhedral barrier needs at least two facets".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidConstruction("ambient dimension must be positive".into()));
        }
        if b.amax() == 0.0 {
            return Err(Error::InvalidConstruction(
                "right-hand side must be nonzero; a cone through the origin has a degenerate projective metric".into(),
            ));
        }
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * smax).count();
        if rank < n {
            return Err(Error::InvalidConstruction(format!(
                "facet normals span only {rank} of {n} dimensions"
            )));
        }
        let params = BarrierParams::from_nu(m as f64)?;
        Ok(Self { a, b, params })
    }

    /// Number of facets `m`.
    pub fn facets(&self) -> usize {
        self.a.nrows()
    }

    /// Facet matrix `A`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Right-hand side `b`.
    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    fn slacks(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, barrier lives in dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let s = &self.b - &self.a * x;
        if s.iter().all(|v| *v > 0.0) {
            Ok(s)
        } else {
            Err(Error::NotInterior)
        }
    }
}

impl Barrier for Polyhedral {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn params(&self) -> BarrierParams {
        self.params
    }

    fn eval(&self, x: &DVector<f64>) -> Result<EvalBundle> {
        let s = self.slacks(x)?;
        let m = self.facets() as f64;
        let value = -s.iter().map(|v| v.ln()).sum::<f64>() / m;
        let inv = s.map(|v| 1.0 / v);
        let grad = self.a.transpose() * &inv / m;
        let mut hess = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.facets() {
            let row = self.a.row(i).transpose();
            hess += &row * row.transpose() * (inv[i] * inv[i]);
        }
        hess /= m;
        Ok(EvalBundle { value, grad, hess })
    }

    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let s = self.slacks(x)?;
        let ah = &self.a * h;
        let m = self.facets() as f64;
        let mut t = 0.0;
        for i in 0..self.facets() {
            let r = ah[i] / s[i];
            t += r * r * r;
        }
        Ok(2.0 * t / m)
    }

    fn third_contracted(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DMatrix<f64>> {
        let s = self.slacks(x)?;
        let ah = &self.a * h;
        let m = self.facets() as f64;
        let mut t = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.facets() {
            let row = self.a.row(i).transpose();
            let w = ah[i] / (s[i] * s[i] * s[i]);
            t += &row * row.transpose() * w;
        }
        Ok(2.0 * t / m)
    }

    fn supports_third_contracted(&self) -> bool {
        true
    }
}

impl SetOracle for Polyhedral {
    fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        let s = &self.b - &self.a * x;
        s.iter().all(|v| *v >= -tol)
    }

    fn sigma(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let s = self.slacks(x)?;
        let ah = &self.a * h;
        let mut sigma: f64 = 0.0;
        for i in 0..self.facets() {
            sigma = sigma.max(ah[i] / s[i]);
        }
        Ok(sigma.max(0.0))
    }
}
