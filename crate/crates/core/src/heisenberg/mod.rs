//! The Heisenberg group `H_n = C^n x R` in exponential coordinates.
//!
//! Points are stored as `(x_1, y_1, ..., x_n, y_n, t)` with the group law
//!
//! ```text
//! (z, t) * (z', t') = (z + z', t + t' + 2 Im sum_j z_j conj(z'_j))
//! ```
//!
//! The horizontal distribution is spanned by the left invariant fields
//! `X_j = d/dx_j + 2 y_j d/dt` and `Y_j = d/dy_j - 2 x_j d/dt`, and it is
//! the kernel of the contact form `dt + 2 sum_j (x_j dy_j - y_j dx_j)`.

mod curve;
mod distance;

pub use curve::{cc_length, lift_curve, lift_curve_with_parameters, HorizontalCurve};
pub use distance::{
    cc_distance, isoperimetric_lower_bound, metric_comparison_check, CcBudget, MetricComparison,
    MetricReport,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};

/// Relative tolerance on the contact residual for a vector to count as horizontal.
pub const CONTACT_TOL: f64 = 1e-9;

/// A point `(z, t)` of `H_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisPoint {
    z: Vec<f64>,
    t: f64,
}

impl HeisPoint {
    /// `z` holds `(x_1, y_1, ..., x_n, y_n)`.
    pub fn new(z: Vec<f64>, t: f64) -> Result<Self> {
        if z.is_empty() || !z.len().is_multiple_of(2) {
            return Err(HopfError::Precondition(format!(
                "horizontal coordinate count must be a positive even number, got {}",
                z.len()
            )));
        }
        if !t.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(HopfError::Precondition("non-finite coordinate".into()));
        }
        Ok(Self { z, t })
    }

    /// Point of `H_1`.
    pub fn h1(x: f64, y: f64, t: f64) -> Self {
        Self { z: vec![x, y], t }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            z: vec![0.0; 2 * n],
            t: 0.0,
        }
    }

    /// From a flat `(x_1, y_1, ..., t)` slice of odd length.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        let (t, z) = coords
            .split_last()
            .ok_or_else(|| HopfError::Precondition("empty coordinate slice".into()))?;
        Self::new(z.to_vec(), *t)
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self, j: usize) -> f64 {
        self.z[2 * j]
    }

    pub fn y(&self, j: usize) -> f64 {
        self.z[2 * j + 1]
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.z.clone();
        c.push(self.t);
        c
    }

    /// Euclidean distance in `R^{2n+1}`.
    pub fn euclidean_distance(&self, other: &HeisPoint) -> f64 {
        let dz: f64 = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (dz + (self.t - other.t).powi(2)).sqrt()
    }

    /// Euclidean distance between the planar projections.
    pub fn planar_distance(&self, other: &HeisPoint) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn check_same_group(&self, other: &HeisPoint) -> Result<()> {
        if self.z.len() != other.z.len() {
            return Err(HopfError::DimensionMismatch {
                expected: self.z.len() + 1,
                found: other.z.len() + 1,
            });
        }
        Ok(())
    }
}

/// `2 Im sum_j z_j conj(w_j) = 2 sum_j (y_j u_j - x_j v_j)` for `w_j = u_j + i v_j`.
pub(crate) fn symplectic_term(z: &[f64], w: &[f64]) -> f64 {
    z.chunks_exact(2)
        .zip(w.chunks_exact(2))
        .map(|(a, b)| a[1] * b[0] - a[0] * b[1])
        .sum::<f64>()
        * 2.0
}

pub fn group_mul(p: &HeisPoint, q: &HeisPoint) -> Result<HeisPoint> {
    p.check_same_group(q)?;
    let z = p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect();
    let t = p.t + q.t + symplectic_term(&p.z, &q.z);
    Ok(HeisPoint { z, t })
}

pub fn group_inv(p: &HeisPoint) -> HeisPoint {
    HeisPoint {
        z: p.z.iter().map(|v| -v).collect(),
        t: -p.t,
    }
}

/// A tangent vector at `base`, in the coordinate frame `(d/dx_1, d/dy_1, ..., d/dt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: HeisPoint,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: HeisPoint, components: Vec<f64>) -> Result<Self> {
        let expected = 2 * base.n() + 1;
        if components.len() != expected {
            return Err(HopfError::DimensionMismatch {
                expected,
                found: components.len(),
            });
        }
        Ok(Self { base, components })
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Linear combination `sum_i c_i v_i` of vectors at a common base point.
    pub fn combination(base: &HeisPoint, terms: &[(f64, &TangentVector)]) -> TangentVector {
        let mut components = vec![0.0; 2 * base.n() + 1];
        for (c, v) in terms {
            for (acc, vi) in components.iter_mut().zip(&v.components) {
                *acc += c * vi;
            }
        }
        TangentVector {
            base: base.clone(),
            components,
        }
    }
}

/// The left invariant frame `X_1, Y_1, ..., X_n, Y_n, T` at `p`.
pub fn frame_at(p: &HeisPoint) -> Vec<TangentVector> {
    let n = p.n();
    let dim = 2 * n + 1;
    let mut frame = Vec::with_capacity(dim);
    for j in 0..n {
        let mut x = vec![0.0; dim];
        x[2 * j] = 1.0;
        x[dim - 1] = 2.0 * p.y(j);
        let mut y = vec![0.0; dim];
        y[2 * j + 1] = 1.0;
        y[dim - 1] = -2.0 * p.x(j);
        frame.push(TangentVector {
            base: p.clone(),
            components: x,
        });
        frame.push(TangentVector {
            base: p.clone(),
            components: y,
        });
    }
    let mut t = vec![0.0; dim];
    t[dim - 1] = 1.0;
    frame.push(TangentVector {
        base: p.clone(),
        components: t,
    });
    frame
}

/// Contact form evaluated on raw coordinate components at a point with horizontal coordinates `z`.
pub(crate) fn contact_value(z: &[f64], v: &[f64]) -> f64 {
    let dt = v[v.len() - 1];
    let horizontal: f64 = z
        .chunks_exact(2)
        .zip(v.chunks_exact(2))
        .map(|(p, w)| p[0] * w[1] - p[1] * w[0])
        .sum();
    dt + 2.0 * horizontal
}

pub fn contact_form(p: &HeisPoint, v: &TangentVector) -> Result<f64> {
    if v.components.len() != 2 * p.n() + 1 {
        return Err(HopfError::DimensionMismatch {
            expected: 2 * p.n() + 1,
            found: v.components.len(),
        });
    }
    Ok(contact_value(&p.z, &v.components))
}

/// Length of a horizontal vector in the metric making `X_j, Y_j` orthonormal.
///
/// Vectors whose contact residual exceeds `tol * |v|` have no defined length.
pub fn horizontal_norm_with_tol(p: &HeisPoint, v: &TangentVector, tol: f64) -> Result<f64> {
    let residual = contact_form(p, v)?;
    if residual.abs() > tol * v.norm() {
        return Err(HopfError::NonHorizontal { residual, tol });
    }
    // the frame coefficients of a horizontal vector are its dx_j, dy_j components
    let n2 = 2 * p.n();
    Ok(v.components[..n2].iter().map(|c| c * c).sum::<f64>().sqrt())
}

pub fn horizontal_norm(p: &HeisPoint, v: &TangentVector) -> Result<f64> {
    horizontal_norm_with_tol(p, v, CONTACT_TOL)
}

/// Jacobian of the left translation `L_g(p) = g * p` in coordinates.
///
/// `L_g` is affine, so the Jacobian does not depend on `p`.
pub fn left_translation_differential(g: &HeisPoint) -> DMatrix<f64> {
    let n = g.n();
    let dim = 2 * n + 1;
    let mut m = DMatrix::identity(dim, dim);
    for j in 0..n {
        m[(dim - 1, 2 * j)] = 2.0 * g.y(j);
        m[(dim - 1, 2 * j + 1)] = -2.0 * g.x(j);
    }
    m
}

/// Push a tangent vector forward along `L_g`.
pub fn push_forward(g: &HeisPoint, v: &TangentVector) -> Result<TangentVector> {
    let base = group_mul(g, &v.base)?;
    let m = left_translation_differential(g);
    let comps = &m * nalgebra::DVector::from_column_slice(&v.components);
    TangentVector::new(base, comps.iter().copied().collect())
}
