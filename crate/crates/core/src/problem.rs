//! Abstract interface for smooth convex problems of the form
//!
//! ```text
//!     minimize     F(x)
//!     subject to   h_j(x) <= 0,  j = 0..m
//!                  x in Y
//! ```
//!
//! where `Y` is a simple set (projection is cheap) and the `h_j` are smooth
//! convex functional constraints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Oracle bundle for a constrained problem.
///
/// Implementations must be immutable after construction; evaluation performs
/// no internal mutation so a single problem can be shared across concurrent
/// solver runs.
pub trait ConstrainedProblem: Sync {
    /// Number of decision variables.
    fn dimension(&self) -> usize;

    /// Number of functional constraints `m >= 1`.
    fn num_constraints(&self) -> usize;

    /// Objective value `F(x)`.
    fn objective_value(&self, x: &[f64]) -> f64;

    /// Objective gradient, length `dimension()`.
    fn objective_gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Constraint value `h_j(x)`. Panics if `j >= num_constraints()`.
    fn constraint_value(&self, j: usize, x: &[f64]) -> f64;

    /// Constraint gradient. Panics if `j >= num_constraints()`.
    fn constraint_gradient(&self, j: usize, x: &[f64]) -> Vec<f64>;

    /// Euclidean projection onto the simple set, in place.
    fn project_in_place(&self, v: &mut [f64]);

    /// Published bound constants for this problem.
    fn constants(&self) -> &ProblemConstants;

    /// Euclidean projection onto the simple set.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        self.project_in_place(&mut out);
        out
    }
}

/// Bound and smoothness constants certified for a problem:
/// `||grad F|| <= b_f`, `|h_j| <= m_h`, `||grad h_j|| <= b_h` on the
/// certification region, `l_f`/`l_h` Lipschitz constants of the gradients,
/// and `mu >= 0` the strong-convexity modulus of the objective (0 = merely
/// convex).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub l_f: f64,
    pub l_h: f64,
    pub b_f: f64,
    pub m_h: f64,
    pub b_h: f64,
    pub mu: f64,
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("l_f", self.l_f),
            ("l_h", self.l_h),
            ("b_f", self.b_f),
            ("m_h", self.m_h),
            ("b_h", self.b_h),
            ("mu", self.mu),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Validation(format!(
                    "constant {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A simple set with a closed-form Euclidean projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimpleSet {
    NonnegativeOrthant,
    Box {
        #[serde(with = "extended_real_vec")]
        lower: Vec<f64>,
        #[serde(with = "extended_real_vec")]
        upper: Vec<f64>,
    },
    FullSpace,
}

impl SimpleSet {
    /// Checks internal consistency and, when the set carries bounds, that
    /// they match the ambient dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            SimpleSet::NonnegativeOrthant | SimpleSet::FullSpace => Ok(()),
            SimpleSet::Box { lower, upper } => {
                if lower.len() != n || upper.len() != n {
                    return Err(Error::Validation(format!(
                        "box bounds have length {}/{}, expected {n}",
                        lower.len(),
                        upper.len()
                    )));
                }
                for i in 0..n {
                    if lower[i].is_nan() || upper[i].is_nan() || lower[i] > upper[i] {
                        return Err(Error::Validation(format!(
                            "box bounds invalid at coordinate {i}: [{}, {}]",
                            lower[i], upper[i]
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Membership test (exact comparisons).
    pub fn contains(&self, v: &[f64]) -> bool {
        match self {
            SimpleSet::NonnegativeOrthant => v.iter().all(|&x| x >= 0.0),
            SimpleSet::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&x, (&l, &u))| l <= x && x <= u),
            SimpleSet::FullSpace => true,
        }
    }

    pub fn project_in_place(&self, v: &mut [f64]) {
        match self {
            SimpleSet::NonnegativeOrthant => {
                for x in v.iter_mut() {
                    *x = x.max(0.0);
                }
            }
            SimpleSet::Box { lower, upper } => {
                for (x, (&l, &u)) in v.iter_mut().zip(lower.iter().zip(upper)) {
                    *x = x.clamp(l, u);
                }
            }
            SimpleSet::FullSpace => {}
        }
    }

    /// Largest Euclidean norm attained on the set, `+inf` when unbounded.
    pub fn radius(&self) -> f64 {
        match self {
            SimpleSet::NonnegativeOrthant | SimpleSet::FullSpace => f64::INFINITY,
            SimpleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| l.abs().max(u.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Euclidean projection onto a simple set.
pub fn project_simple(set: &SimpleSet, v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    set.project_in_place(&mut out);
    out
}

/// Terminal quality metrics for a candidate point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    /// `|F(x) - F*|`; absent when no reference value is known.
    pub objective_gap: Option<f64>,
    /// `sum_j max(0, h_j(x))^2`.
    pub feasibility_sq: f64,
    /// `(1/m) sum_j max(0, h_j(x))`.
    pub mean_violation: f64,
}

/// Evaluates feasibility and (when a reference value is available) the
/// objective gap at `x`.
pub fn optimality_report<P: ConstrainedProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    f_star: Option<f64>,
) -> OptimalityReport {
    assert_eq!(x.len(), problem.dimension(), "dimension mismatch");
    let m = problem.num_constraints();
    let mut feas_sq = 0.0;
    let mut viol = 0.0;
    for j in 0..m {
        let pos = problem.constraint_value(j, x).max(0.0);
        feas_sq += pos * pos;
        viol += pos;
    }
    OptimalityReport {
        objective_gap: f_star.map(|fs| (problem.objective_value(x) - fs).abs()),
        feasibility_sq: feas_sq,
        mean_violation: viol / m as f64,
    }
}

/// Default radius of the certification ball: `10 * ||x0|| + 10`.
pub fn default_radius(x0: &[f64]) -> f64 {
    10.0 * x0.iter().map(|v| v * v).sum::<f64>().sqrt() + 10.0
}

/// Serialization of bound vectors that may contain infinities. JSON has no
/// infinity literal, so infinite entries round-trip as the strings
/// `"inf"` / `"-inf"`.
mod extended_real_vec {
    use serde::de::Error as DeError;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for &x in v {
            if x == f64::INFINITY {
                seq.serialize_element("inf")?;
            } else if x == f64::NEG_INFINITY {
                seq.serialize_element("-inf")?;
            } else {
                seq.serialize_element(&x)?;
            }
        }
        seq.end()
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        entries
            .into_iter()
            .map(|e| match e {
                Entry::Num(x) => Ok(x),
                Entry::Str(s) => match s.as_str() {
                    "inf" | "+inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(DeError::custom(format!("unknown bound value {other:?}"))),
                },
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn orthant_projection_clamps_negatives() {
        let set = SimpleSet::NonnegativeOrthant;
        assert_eq!(project_simple(&set, &[-1.0, 2.0]), vec![0.0, 2.0]);
    }

    #[test]
    fn box_projection_clamps() {
        let set = SimpleSet::Box {
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
        };
        assert_eq!(project_simple(&set, &[3.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn full_space_projection_is_identity() {
        let set = SimpleSet::FullSpace;
        assert_eq!(project_simple(&set, &[5.0, -5.0]), vec![5.0, -5.0]);
    }

    #[test]
    fn projection_is_idempotent_and_fixes_members() {
        let mut rng = StdRng::seed_from_u64(1);
        let sets = [
            SimpleSet::NonnegativeOrthant,
            SimpleSet::Box {
                lower: vec![-0.5, 0.0, -2.0],
                upper: vec![0.5, f64::INFINITY, -1.0],
            },
            SimpleSet::FullSpace,
        ];
        for set in &sets {
            for _ in 0..200 {
                let v: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
                let p = project_simple(set, &v);
                let pp = project_simple(set, &p);
                assert_eq!(p, pp);
                assert!(set.contains(&p));
                if set.contains(&v) {
                    assert_eq!(p, v);
                }
            }
        }
    }

    #[test]
    fn projection_is_nonexpansive() {
        let mut rng = StdRng::seed_from_u64(2);
        let set = SimpleSet::Box {
            lower: vec![-1.0, 0.0, f64::NEG_INFINITY, -2.0],
            upper: vec![1.0, f64::INFINITY, 0.0, -1.5],
        };
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..1000 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            let pu = project_simple(&set, &u);
            let pv = project_simple(&set, &v);
            let d_proj: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| a - b).collect();
            let d: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            assert!(norm(&d_proj) <= norm(&d) + 1e-12);
        }
    }

    #[test]
    fn box_bounds_round_trip_with_infinities() {
        let set = SimpleSet::Box {
            lower: vec![f64::NEG_INFINITY, -1.0],
            upper: vec![0.25, f64::INFINITY],
        };
        let json = serde_json::to_string(&set).unwrap();
        let back: SimpleSet = serde_json::from_str(&json).unwrap();
        assert_eq!(set, back);
    }

    #[test]
    fn invalid_box_rejected() {
        let set = SimpleSet::Box {
            lower: vec![1.0],
            upper: vec![0.0],
        };
        assert!(set.validate(1).is_err());
    }
}
