//! Normalized log-det barrier of a spectrahedron
//! `{x : A_0 + sum_i x_i A_i > 0}`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::barrier::{Barrier, Error, EvalBundle, Result};
use crate::oracle::SetOracle;
use crate::params::BarrierParams;

/// `f(x) = -(1/m) log det(A_0 + sum_i x_i A_i)` for symmetric `m x m`
/// coefficient matrices.
///
/// The `1/m` normalization gives `gamma = (m - 2)/sqrt(m - 1)` and
/// `nu = m`, matching the polyhedral case with `m` facets.
#[derive(Debug, Clone)]
pub struct Spectrahedral {
    /// `mats[0]` is the constant term, `mats[1..]` the coordinate
    /// coefficients.
    mats: Vec<DMatrix<f64>>,
    msize: usize,
    params: BarrierParams,
}

impl Spectrahedral {
    /// Builds the barrier from `[A_0, A_1, ..., A_n]`.
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        if mats.len() < 2 {
            return Err(Error::InvalidConstruction(
                "a spectrahedral barrier needs a constant term and at least one coefficient".into(),
            ));
        }
        let msize = mats[0].nrows();
        if msize < 2 {
            return Err(Error::InvalidConstruction(
                "matrix order must be at least two".into(),
            ));
        }
        for (k, m) in mats.iter().enumerate() {
            if m.nrows() != msize || m.ncols() != msize {
                return Err(Error::InvalidConstruction(format!(
                    "coefficient {k} is {}x{}, expected {msize}x{msize}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let asym = (m - m.transpose()).amax();
            if asym > 1e-12 * (1.0 + m.amax()) {
                return Err(Error::InvalidConstruction(format!(
                    "coefficient {k} is not symmetric (skew part {asym:.3e})"
                )));
            }
        }
        let params = BarrierParams::from_nu(msize as f64)?;
        Ok(Self { mats, msize, params })
    }

    /// Matrix order `m`.
    pub fn matrix_order(&self) -> usize {
        self.msize
    }

    /// Pencil value `A_0 + sum_i x_i A_i`.
    pub fn pencil(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, barrier lives in dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let mut a = self.mats[0].clone();
        for i in 0..self.dim() {
            a += &self.mats[i + 1] * x[i];
        }
        Ok(a)
    }

    fn chol(&self, x: &DVector<f64>) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.pencil(x)?).ok_or(Error::NotInterior)
    }

    /// Combines a direction into `H = sum_i h_i A_i`.
    fn direction_matrix(&self, h: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.msize, self.msize);
        for i in 0..self.dim() {
            m += &self.mats[i + 1] * h[i];
        }
        m
    }
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut t = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t
}

impl Barrier for Spectrahedral {
    fn dim(&self) -> usize {
        self.mats.len() - 1
    }

    fn params(&self) -> BarrierParams {
        self.params
    }

    fn eval(&self, x: &DVector<f64>) -> Result<EvalBundle> {
        let chol = self.chol(x)?;
        let m = self.msize as f64;
        let n = self.dim();
        let value = -2.0 * (0..self.msize).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>() / m;
        let inv = chol.inverse();
        // B_i = pencil^{-1} A_i
        let b: Vec<DMatrix<f64>> = (0..n).map(|i| &inv * &self.mats[i + 1]).collect();
        let grad = DVector::from_fn(n, |i, _| -b[i].trace() / m);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = trace_product(&b[i], &b[j]) / m;
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        Ok(EvalBundle { value, grad, hess })
    }

    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let chol = self.chol(x)?;
        let inv = chol.inverse();
        let m = &inv * self.direction_matrix(h);
        let m2 = &m * &m;
        Ok(-2.0 * trace_product(&m2, &m) / self.msize as f64)
    }

    fn third_contracted(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DMatrix<f64>> {
        let chol = self.chol(x)?;
        let inv = chol.inverse();
        let n = self.dim();
        let dm = &inv * self.direction_matrix(h);
        let b: Vec<DMatrix<f64>> = (0..n).map(|i| &inv * &self.mats[i + 1]).collect();
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            let mixed = &dm * &b[i] + &b[i] * &dm;
            for j in i..n {
                let v = -trace_product(&mixed, &b[j]) / self.msize as f64;
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        Ok(t)
    }

    fn supports_third_contracted(&self) -> bool {
        true
    }
}

impl SetOracle for Spectrahedral {
    fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self.pencil(x) {
            Ok(a) => {
                let scale = 1.0 + a.amax();
                a.symmetric_eigen().eigenvalues.iter().all(|l| *l >= -tol * scale)
            }
            Err(_) => false,
        }
    }

    fn sigma(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<f64> {
        let chol = self.chol(x)?;
        let hmat = self.direction_matrix(h);
        // pencil + t H > 0 iff I + t L^{-1} H L^{-T} > 0
        let l = chol.l();
        let y = l
            .solve_lower_triangular(&hmat)
            .ok_or(Error::DegenerateMetric)?;
        let w = l
            .solve_lower_triangular(&y.transpose())
            .ok_or(Error::DegenerateMetric)?;
        // symmetrize against roundoff before the eigenvalue query
        let w = (&w + w.transpose()) * 0.5;
        let lmin = w.symmetric_eigen().eigenvalues.min();
        Ok((-lmin).max(0.0))
    }
}
