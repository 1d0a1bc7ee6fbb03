use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};

/// Smooth differential forms on `R^m`, evaluated on tuples of vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormSpec {
    /// The area form of `S^2`, normalized to total mass 1, pulled back along
    /// `x -> x/|x|` and multiplied by a radial cutoff supported in
    /// `0.2 < |x| < 2.5`. It equals the pulled-back area form on the shell
    /// `0.6 <= |x| <= 1.6`.
    S2AreaExtended,
    /// `sum_I c_I dx_I` over increasing index tuples `I`.
    ConstantCoefficient {
        ambient_dim: usize,
        degree: usize,
        terms: Vec<(Vec<usize>, f64)>,
    },
    Sum(Vec<FormSpec>),
}

const CUTOFF_INNER: (f64, f64) = (0.2, 0.6);
const CUTOFF_OUTER: (f64, f64) = (1.6, 2.5);

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Radial cutoff of the extended area form.
pub fn radial_cutoff(r: f64) -> f64 {
    let rise = smoothstep((r - CUTOFF_INNER.0) / (CUTOFF_INNER.1 - CUTOFF_INNER.0));
    let fall = smoothstep((r - CUTOFF_OUTER.0) / (CUTOFF_OUTER.1 - CUTOFF_OUTER.0));
    rise * (1.0 - fall)
}

impl FormSpec {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "s2_area_extended" => Ok(Self::S2AreaExtended),
            // dx ^ dy on R^3, the simplest constant example
            "constant_coefficient" => Ok(Self::ConstantCoefficient {
                ambient_dim: 3,
                degree: 2,
                terms: vec![(vec![0, 1], 1.0)],
            }),
            other => Err(HopfError::UnknownName(format!("form {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::S2AreaExtended => "s2_area_extended",
            Self::ConstantCoefficient { .. } => "constant_coefficient",
            Self::Sum(_) => "sum",
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::S2AreaExtended => 3,
            Self::ConstantCoefficient { ambient_dim, .. } => *ambient_dim,
            Self::Sum(parts) => parts.first().map_or(0, |p| p.ambient_dim()),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Self::S2AreaExtended => 2,
            Self::ConstantCoefficient { degree, .. } => *degree,
            Self::Sum(parts) => parts.first().map_or(0, |p| p.degree()),
        }
    }

    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Self::S2AreaExtended => Some(CUTOFF_OUTER.1),
            Self::ConstantCoefficient { .. } => None,
            Self::Sum(parts) => parts
                .iter()
                .map(|p| p.support_radius())
                .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::S2AreaExtended => Ok(()),
            Self::ConstantCoefficient {
                ambient_dim,
                degree,
                terms,
            } => {
                if *degree == 0 || degree % 2 != 0 || degree > ambient_dim {
                    return Err(HopfError::Precondition(format!(
                        "form degree must be even and in 2..={ambient_dim}, got {degree}"
                    )));
                }
                for (idx, _) in terms {
                    if idx.len() != *degree
                        || idx.windows(2).any(|w| w[0] >= w[1])
                        || idx.iter().any(|&i| i >= *ambient_dim)
                    {
                        return Err(HopfError::Precondition(format!(
                            "bad coefficient index tuple {idx:?}"
                        )));
                    }
                }
                Ok(())
            }
            Self::Sum(parts) => {
                let first = parts
                    .first()
                    .ok_or_else(|| HopfError::Precondition("empty form sum".into()))?;
                for p in parts {
                    p.validate()?;
                    if p.ambient_dim() != first.ambient_dim() || p.degree() != first.degree() {
                        return Err(HopfError::Precondition(
                            "summands differ in ambient dimension or degree".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// `alpha_x(v_1, ..., v_k)` for the columns of `vectors` (`m x k`).
    pub fn evaluate(&self, x: &[f64], vectors: &DMatrix<f64>) -> f64 {
        match self {
            Self::S2AreaExtended => {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                let r = r2.sqrt();
                let chi = radial_cutoff(r);
                if chi == 0.0 {
                    return 0.0;
                }
                let (u, v) = (vectors.column(0), vectors.column(1));
                let cross = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                let triple = x[0] * cross[0] + x[1] * cross[1] + x[2] * cross[2];
                chi * triple / (4.0 * PI * r2 * r)
            }
            Self::ConstantCoefficient { terms, degree, .. } => terms
                .iter()
                .map(|(idx, c)| {
                    let minor = DMatrix::from_fn(*degree, *degree, |i, j| vectors[(idx[i], j)]);
                    c * minor.determinant()
                })
                .sum(),
            Self::Sum(parts) => parts.iter().map(|p| p.evaluate(x, vectors)).sum(),
        }
    }

    /// Integral of the form over the affine simplex with the given vertices
    /// (`m x (k+1)` columns), by the degree-2 rule with `k+1` interior nodes.
    pub fn integrate_simplex(&self, vertices: &DMatrix<f64>) -> f64 {
        let k = vertices.ncols() - 1;
        let m = vertices.nrows();
        let v0 = vertices.column(0);
        let edges = DMatrix::from_fn(m, k, |r, c| vertices[(r, c + 1)] - v0[r]);
        let kf = k as f64;
        let b = (kf + 2.0 - (kf + 2.0).sqrt()) / ((kf + 1.0) * (kf + 2.0));
        let a = 1.0 - kf * b;
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let mut node = vec![0.0; m];
        let mut total = 0.0;
        for i in 0..=k {
            for (r, n) in node.iter_mut().enumerate() {
                *n = (0..=k)
                    .map(|j| vertices[(r, j)] * if j == i { a } else { b })
                    .sum();
            }
            total += self.evaluate(&node, &edges);
        }
        total / ((k + 1) as f64 * fact)
    }
}
