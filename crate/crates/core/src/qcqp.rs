//! Dense quadratically constrained quadratic programs:
//!
//! ```text
//!     minimize     1/2 x' Q_f x + q_f' x
//!     subject to   1/2 x' Q_i x + q_i' x - b_i <= 0,   i = 0..m
//!                  x in Y
//! ```
//!
//! with every `Q` symmetric positive semidefinite.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{ConstrainedProblem, ProblemConstants, SimpleSet};

/// One quadratic constraint `1/2 x'Qx + q'x - b <= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadConstraint {
    pub quad: DMatrix<f64>,
    pub lin: DVector<f64>,
    pub offset: f64,
}

/// Dense QCQP data.
#[derive(Clone, Debug, PartialEq)]
pub struct QcqpInstance {
    pub quad_obj: DMatrix<f64>,
    pub lin_obj: DVector<f64>,
    pub constraints: Vec<QuadConstraint>,
    pub set: SimpleSet,
}

/// Relative symmetry tolerance for instance matrices.
const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as "nonnegative" by the PSD check.
const PSD_TOL: f64 = -1e-10;

impl QcqpInstance {
    pub fn dimension(&self) -> usize {
        self.lin_obj.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Checks dimensions and symmetry of all matrices.
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension();
        if n == 0 {
            return Err(Error::InvalidInstance("dimension must be >= 1".into()));
        }
        if self.constraints.is_empty() {
            return Err(Error::InvalidInstance("at least one constraint required".into()));
        }
        check_square_symmetric(&self.quad_obj, n, "Q_f")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check_square_symmetric(&c.quad, n, &format!("Q_{i}"))?;
            if c.lin.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "q_{i} has length {}, expected {n}",
                    c.lin.len()
                )));
            }
            if !c.offset.is_finite() {
                return Err(Error::InvalidInstance(format!("b_{i} is not finite")));
            }
        }
        self.set.validate(n).map_err(|e| match e {
            Error::Validation(msg) => Error::InvalidInstance(msg),
            other => other,
        })
    }

    /// Objective value `1/2 x'Q_f x + q_f'x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        quadratic_value(&self.quad_obj, &self.lin_obj, x)
    }

    /// Objective gradient `Q_f x + q_f`.
    pub fn objective_gradient(&self, x: &[f64]) -> Vec<f64> {
        quadratic_gradient(&self.quad_obj, &self.lin_obj, x)
    }

    /// Constraint value `1/2 x'Q_j x + q_j'x - b_j`.
    pub fn constraint(&self, j: usize, x: &[f64]) -> f64 {
        let c = &self.constraints[j];
        quadratic_value(&c.quad, &c.lin, x) - c.offset
    }

    /// Constraint gradient `Q_j x + q_j`.
    pub fn constraint_gradient(&self, j: usize, x: &[f64]) -> Vec<f64> {
        let c = &self.constraints[j];
        quadratic_gradient(&c.quad, &c.lin, x)
    }

    /// Certifies bound constants over the ball `||x|| <= radius`.
    ///
    /// For a quadratic `1/2 x'Qx + q'x - b` with `s = lambda_max(Q)`:
    /// `|value| <= s r^2 / 2 + ||q|| r + |b|` and
    /// `||gradient|| <= s r + ||q||` on the ball. The strong-convexity
    /// modulus is `lambda_min(Q_f)`. Errs when any matrix fails the PSD
    /// check.
    pub fn constants(&self, radius: f64) -> Result<ProblemConstants> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Validation(format!(
                "certification radius must be positive and finite, got {radius}"
            )));
        }
        self.validate()?;
        let (obj_min, obj_max) = extremal_eigenvalues(&self.quad_obj);
        if obj_min < PSD_TOL {
            return Err(Error::InvalidInstance(format!(
                "Q_f is not positive semidefinite (lambda_min = {obj_min:e})"
            )));
        }
        let mut l_h: f64 = 0.0;
        let mut b_h: f64 = 0.0;
        let mut m_h: f64 = 0.0;
        for (i, c) in self.constraints.iter().enumerate() {
            let (cmin, cmax) = extremal_eigenvalues(&c.quad);
            if cmin < PSD_TOL {
                return Err(Error::InvalidInstance(format!(
                    "Q_{i} is not positive semidefinite (lambda_min = {cmin:e})"
                )));
            }
            let cmax = cmax.max(0.0);
            let qn = c.lin.norm();
            l_h = l_h.max(cmax);
            b_h = b_h.max(cmax * radius + qn);
            m_h = m_h.max(0.5 * cmax * radius * radius + qn * radius + c.offset.abs());
        }
        Ok(ProblemConstants {
            l_f: obj_max.max(0.0),
            l_h,
            b_f: obj_max.max(0.0) * radius + self.lin_obj.norm(),
            m_h,
            b_h,
            mu: obj_min.max(0.0),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&QcqpFile::from(self))?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: QcqpFile = serde_json::from_str(json)?;
        let instance = file.into_instance()?;
        instance.validate()?;
        Ok(instance)
    }

    pub fn write_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn check_square_symmetric(mat: &DMatrix<f64>, n: usize, name: &str) -> Result<()> {
    if mat.nrows() != n || mat.ncols() != n {
        return Err(Error::InvalidInstance(format!(
            "{name} is {}x{}, expected {n}x{n}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let scale = mat.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (mat[(i, j)] - mat[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidInstance(format!(
                    "{name} is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

fn quadratic_value(quad: &DMatrix<f64>, lin: &DVector<f64>, x: &[f64]) -> f64 {
    assert_eq!(x.len(), lin.len(), "dimension mismatch");
    let xv = DVector::from_column_slice(x);
    0.5 * (quad * &xv).dot(&xv) + lin.dot(&xv)
}

fn quadratic_gradient(quad: &DMatrix<f64>, lin: &DVector<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), lin.len(), "dimension mismatch");
    let xv = DVector::from_column_slice(x);
    let g = quad * &xv + lin;
    g.as_slice().to_vec()
}

/// Extremal eigenvalues of a symmetric matrix.
fn extremal_eigenvalues(mat: &DMatrix<f64>) -> (f64, f64) {
    let sym = nalgebra::SymmetricEigen::new(mat.clone());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in sym.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// A QCQP instance together with its certified constants; the concrete
/// realization of [`ConstrainedProblem`].
#[derive(Clone, Debug)]
pub struct QcqpProblem {
    instance: QcqpInstance,
    constants: ProblemConstants,
    radius: f64,
}

impl QcqpProblem {
    /// Validates the instance and certifies constants over
    /// `||x|| <= radius`. Iterates escaping that ball void the certificate.
    pub fn new(instance: QcqpInstance, radius: f64) -> Result<Self> {
        let constants = instance.constants(radius)?;
        Ok(Self {
            instance,
            constants,
            radius,
        })
    }

    pub fn instance(&self) -> &QcqpInstance {
        &self.instance
    }

    pub fn certified_radius(&self) -> f64 {
        self.radius
    }
}

impl ConstrainedProblem for QcqpProblem {
    fn dimension(&self) -> usize {
        self.instance.dimension()
    }

    fn num_constraints(&self) -> usize {
        self.instance.num_constraints()
    }

    fn objective_value(&self, x: &[f64]) -> f64 {
        self.instance.objective(x)
    }

    fn objective_gradient(&self, x: &[f64]) -> Vec<f64> {
        self.instance.objective_gradient(x)
    }

    fn constraint_value(&self, j: usize, x: &[f64]) -> f64 {
        self.instance.constraint(j, x)
    }

    fn constraint_gradient(&self, j: usize, x: &[f64]) -> Vec<f64> {
        self.instance.constraint_gradient(j, x)
    }

    fn project_in_place(&self, v: &mut [f64]) {
        self.instance.set.project_in_place(v);
    }

    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }
}

/// On-disk representation: matrices as row-major lists.
#[derive(Serialize, Deserialize)]
struct QcqpFile {
    n: usize,
    m: usize,
    #[serde(rename = "Q_f")]
    quad_obj: Vec<f64>,
    #[serde(rename = "q_f")]
    lin_obj: Vec<f64>,
    constraints: Vec<ConstraintFile>,
    simple_set: SimpleSet,
}

#[derive(Serialize, Deserialize)]
struct ConstraintFile {
    #[serde(rename = "Q")]
    quad: Vec<f64>,
    q: Vec<f64>,
    b: f64,
}

fn matrix_to_row_major(mat: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = mat.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(mat[(i, j)]);
        }
    }
    out
}

pub(crate) fn matrix_from_row_major(data: &[f64], rows: usize, cols: usize, name: &str) -> Result<DMatrix<f64>> {
    if data.len() != rows * cols {
        return Err(Error::InvalidInstance(format!(
            "{name} has {} entries, expected {}",
            data.len(),
            rows * cols
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

impl From<&QcqpInstance> for QcqpFile {
    fn from(inst: &QcqpInstance) -> Self {
        QcqpFile {
            n: inst.dimension(),
            m: inst.num_constraints(),
            quad_obj: matrix_to_row_major(&inst.quad_obj),
            lin_obj: inst.lin_obj.as_slice().to_vec(),
            constraints: inst
                .constraints
                .iter()
                .map(|c| ConstraintFile {
                    quad: matrix_to_row_major(&c.quad),
                    q: c.lin.as_slice().to_vec(),
                    b: c.offset,
                })
                .collect(),
            simple_set: inst.set.clone(),
        }
    }
}

impl QcqpFile {
    fn into_instance(self) -> Result<QcqpInstance> {
        let n = self.n;
        if self.constraints.len() != self.m {
            return Err(Error::InvalidInstance(format!(
                "constraint list has {} entries but m = {}",
                self.constraints.len(),
                self.m
            )));
        }
        Ok(QcqpInstance {
            quad_obj: matrix_from_row_major(&self.quad_obj, n, n, "Q_f")?,
            lin_obj: DVector::from_vec(self.lin_obj),
            constraints: self
                .constraints
                .into_iter()
                .enumerate()
                .map(|(i, c)| {
                    Ok(QuadConstraint {
                        quad: matrix_from_row_major(&c.quad, n, n, &format!("Q_{i}"))?,
                        lin: DVector::from_vec(c.q),
                        offset: c.b,
                    })
                })
                .collect::<Result<_>>()?,
            set: self.simple_set,
        })
    }
}
