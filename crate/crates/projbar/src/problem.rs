//! Problem files: JSON descriptions of a barrier domain together with
//! a linear objective, and their conversion into runnable instances.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::barrier::{Barrier, Error, Result};
use crate::barriers::{
    AffineSection, DirectProduct, ExpEpigraph, Polyhedral, PowerEpigraph, ProjectiveImage,
    Spectrahedral,
};
use crate::oracle::BarrierSet;

/// Serializable description of a barrier domain.
///
/// The JSON encoding is externally tagged: the single key names the
/// construction, e.g. `{"polyhedron": {"A": [[1.0]], "b": [1.0]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierSpec {
    /// Linear inequalities `A x <= b`.
    Polyhedron {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// Positive definiteness of `mats[0] + sum_i x_i mats[i]`.
    Spectrahedron { mats: Vec<Vec<Vec<f64>>> },
    /// The set above the exponential graph, `y > exp(x)`.
    ExpEpigraph {},
    /// The set above the power graph, `y > |x|^p` with `p > 1`.
    PowerEpigraph { p: f64 },
    /// Cartesian product of two domains.
    Product(Box<BarrierSpec>, Box<BarrierSpec>),
    /// Affine slice `{u : x0 + M u in base}`.
    Section {
        base: Box<BarrierSpec>,
        x0: Vec<f64>,
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
    },
    /// Image under an invertible homogeneous-coordinate map, scalar
    /// coordinate first: `Lambda * (1, x) ~ (1, y)`.
    ProjectiveImage {
        base: Box<BarrierSpec>,
        #[serde(rename = "Lambda")]
        lambda: Vec<Vec<f64>>,
    },
}

/// A full problem: domain, objective, and an optional interior start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub barrier: BarrierSpec,
    pub objective: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

/// A runnable instance: the barrier with its set oracle, the
/// objective, and a valid interior starting point.
pub struct Instance {
    pub set: Arc<dyn BarrierSet>,
    pub objective: DVector<f64>,
    pub start: DVector<f64>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::InvalidConstruction(format!("{what} has no rows")));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::InvalidConstruction(format!("{what} has empty rows")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::InvalidConstruction(format!(
                "{what} row {i} has {} entries, expected {ncols}",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Builds the barrier described by `spec` together with a default
/// interior point when one is known for the construction.
pub fn build_barrier(spec: &BarrierSpec) -> Result<(Arc<dyn BarrierSet>, Option<DVector<f64>>)> {
    match spec {
        BarrierSpec::Polyhedron { a, b } => {
            let mat = matrix_from_rows(a, "polyhedron matrix")?;
            if b.len() != mat.nrows() {
                return Err(Error::InvalidConstruction(format!(
                    "polyhedron has {} rows but {} offsets",
                    mat.nrows(),
                    b.len()
                )));
            }
            let dim = mat.ncols();
            let offsets = DVector::from_column_slice(b);
            let origin_interior = offsets.iter().all(|&v| v > 0.0);
            let set = Arc::new(Polyhedral::new(mat, offsets)?);
            let witness = origin_interior.then(|| DVector::zeros(dim));
            Ok((set, witness))
        }
        BarrierSpec::Spectrahedron { mats } => {
            let mats: Vec<DMatrix<f64>> = mats
                .iter()
                .map(|m| matrix_from_rows(m, "spectrahedron coefficient"))
                .collect::<Result<_>>()?;
            let set = Arc::new(Spectrahedral::new(mats)?);
            let origin = DVector::zeros(set.dim());
            let witness = set.eval(&origin).is_ok().then_some(origin);
            Ok((set, witness))
        }
        BarrierSpec::ExpEpigraph {} => {
            let set = Arc::new(ExpEpigraph::new());
            Ok((set, Some(DVector::from_column_slice(&[0.0, std::f64::consts::E]))))
        }
        BarrierSpec::PowerEpigraph { p } => {
            let set = Arc::new(PowerEpigraph::new(*p)?);
            Ok((set, Some(DVector::from_column_slice(&[0.0, 1.0]))))
        }
        BarrierSpec::Product(left, right) => {
            let (ls, lw) = build_barrier(left)?;
            let (rs, rw) = build_barrier(right)?;
            let set = Arc::new(DirectProduct::new(ls, rs)?);
            let witness = match (lw, rw) {
                (Some(a), Some(b)) => {
                    let mut w = DVector::zeros(a.len() + b.len());
                    w.rows_mut(0, a.len()).copy_from(&a);
                    w.rows_mut(a.len(), b.len()).copy_from(&b);
                    Some(w)
                }
                _ => None,
            };
            Ok((set, witness))
        }
        BarrierSpec::Section { base, x0, m } => {
            let (bs, _) = build_barrier(base)?;
            let origin = DVector::from_column_slice(x0);
            let map = matrix_from_rows(m, "section map")?;
            let set = Arc::new(AffineSection::new(bs, origin, map)?);
            let zero = DVector::zeros(set.dim());
            let witness = set.eval(&zero).is_ok().then_some(zero);
            Ok((set, witness))
        }
        BarrierSpec::ProjectiveImage { base, lambda } => {
            let (bs, bw) = build_barrier(base)?;
            let map = matrix_from_rows(lambda, "homogeneous map")?;
            let image = ProjectiveImage::new(bs, map)?;
            let witness = bw.and_then(|w| image.push(&w).ok());
            let set: Arc<dyn BarrierSet> = Arc::new(image);
            let witness = witness.filter(|w| set.eval(w).is_ok());
            Ok((set, witness))
        }
    }
}

/// Validates the problem file and assembles a runnable instance.
///
/// The starting point is taken from the file when present (it must be
/// interior), and otherwise from the construction's default witness.
pub fn build_instance(file: &ProblemFile) -> Result<Instance> {
    let (set, witness) = build_barrier(&file.barrier)?;
    if file.objective.len() != set.dim() {
        return Err(Error::InvalidConstruction(format!(
            "objective has {} entries, domain has dimension {}",
            file.objective.len(),
            set.dim()
        )));
    }
    let objective = DVector::from_column_slice(&file.objective);
    let start = match &file.x0 {
        Some(coords) => {
            if coords.len() != set.dim() {
                return Err(Error::InvalidConstruction(format!(
                    "start point has {} entries, domain has dimension {}",
                    coords.len(),
                    set.dim()
                )));
            }
            let x = DVector::from_column_slice(coords);
            set.eval(&x).map_err(|_| {
                Error::InvalidConstruction("start point x0 is not interior".to_string())
            })?;
            x
        }
        None => witness.ok_or_else(|| {
            Error::InvalidConstruction(
                "no interior start point: supply x0 (the construction has no default witness)"
                    .to_string(),
            )
        })?,
    };
    Ok(Instance { set, objective, start })
}

/// Parses a problem file from JSON text.
pub fn parse_problem(text: &str) -> std::result::Result<ProblemFile, serde_json::Error> {
    serde_json::from_str(text)
}

/// Parses a bare barrier description, the value of the `barrier` field
/// of a problem file.
pub fn parse_barrier(text: &str) -> std::result::Result<BarrierSpec, serde_json::Error> {
    serde_json::from_str(text)
}
