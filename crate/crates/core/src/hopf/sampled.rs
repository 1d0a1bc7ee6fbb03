use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dec::SimplicialComplex;
use crate::error::{HopfError, Result};
use crate::maps::BuiltinMap;

/// Below this, a domain simplex counts as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferentialKind {
    /// Differential of the piecewise-affine interpolant of the vertex values.
    Affine,
    /// Exact differential of the underlying smooth map at each barycenter.
    Analytic,
}

/// A map sampled at the vertices of a simplicial complex, with one
/// differential per top simplex.
///
/// Differentials are `m x dim` matrices written in an orthonormal frame of the
/// simplex's tangent space, so their singular values do not depend on the
/// frame.
#[derive(Clone, Debug)]
pub struct SampledMap {
    mesh: Arc<SimplicialComplex>,
    codim: usize,
    values: Vec<f64>,
    differentials: Vec<DMatrix<f64>>,
    kind: DifferentialKind,
    excluded: Vec<bool>,
    degenerate: usize,
    builtin: Option<BuiltinMap>,
}

/// Orthonormal tangent frame `q` (`ambient x dim`) and the triangular factor
/// `r` with `edges = q r`.
fn tangent_frame(mesh: &SimplicialComplex, i: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let e = mesh.edge_matrix(mesh.dim(), i);
    let qr = e.qr();
    (qr.q(), qr.r())
}

fn is_degenerate(r: &DMatrix<f64>) -> bool {
    (0..r.ncols()).any(|j| r[(j, j)].abs() < DEGENERATE_TOL)
}

impl SampledMap {
    /// Map given by vertex values (`codim` numbers per vertex, vertex-major),
    /// with affine differentials.
    pub fn from_values(
        mesh: Arc<SimplicialComplex>,
        codim: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if codim == 0 || values.len() != codim * mesh.vertex_count() {
            return Err(HopfError::DimensionMismatch {
                expected: codim * mesh.vertex_count(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HopfError::Precondition("map values must be finite".into()));
        }
        let dim = mesh.dim();
        let results: Vec<(DMatrix<f64>, bool)> = (0..mesh.count(dim))
            .into_par_iter()
            .map(|i| affine_differential(&mesh, codim, &values, i))
            .collect();
        let degenerate = results.iter().filter(|(_, d)| *d).count();
        let excluded = results.iter().map(|(_, d)| *d).collect();
        let differentials = results.into_iter().map(|(d, _)| d).collect();
        Ok(Self {
            mesh,
            codim,
            values,
            differentials,
            kind: DifferentialKind::Affine,
            excluded,
            degenerate,
            builtin: None,
        })
    }

    /// Map with values and analytic differentials drawn from a builtin.
    ///
    /// The domain point of each vertex and barycenter is first projected to
    /// the unit sphere, so on a cone mesh this samples the radial extension.
    pub fn from_builtin(mesh: Arc<SimplicialComplex>, map: BuiltinMap) -> Result<Self> {
        if map.domain_dim() != mesh.ambient_dim() {
            return Err(HopfError::DimensionMismatch {
                expected: map.domain_dim(),
                found: mesh.ambient_dim(),
            });
        }
        let codim = map.codim();
        let mut values = Vec::with_capacity(codim * mesh.vertex_count());
        for v in 0..mesh.vertex_count() {
            values.extend(map.eval_radial(mesh.vertex(v)));
        }
        let dim = mesh.dim();
        let results: Vec<(DMatrix<f64>, bool)> = (0..mesh.count(dim))
            .into_par_iter()
            .map(|i| {
                let (q, r) = tangent_frame(&mesh, i);
                if is_degenerate(&r) {
                    return (DMatrix::zeros(codim, dim), true);
                }
                let s = mesh.simplices(dim).get(i);
                let mut bary = vec![0.0; mesh.ambient_dim()];
                for &v in s {
                    for (b, x) in bary.iter_mut().zip(mesh.vertex(v as usize)) {
                        *b += x / s.len() as f64;
                    }
                }
                match map.jacobian_radial(&bary) {
                    Some(j) => (j * q, false),
                    None => (DMatrix::zeros(codim, dim), true),
                }
            })
            .collect();
        let degenerate = results.iter().filter(|(_, d)| *d).count();
        let excluded = results.iter().map(|(_, d)| *d).collect();
        let differentials = results.into_iter().map(|(d, _)| d).collect();
        Ok(Self {
            mesh,
            codim,
            values,
            differentials,
            kind: DifferentialKind::Analytic,
            excluded,
            degenerate,
            builtin: Some(map),
        })
    }

    pub fn mesh(&self) -> &Arc<SimplicialComplex> {
        &self.mesh
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: usize) -> &[f64] {
        &self.values[v * self.codim..(v + 1) * self.codim]
    }

    pub fn differentials(&self) -> &[DMatrix<f64>] {
        &self.differentials
    }

    pub fn differential(&self, i: usize) -> &DMatrix<f64> {
        &self.differentials[i]
    }

    pub fn kind(&self) -> DifferentialKind {
        self.kind
    }

    pub fn builtin(&self) -> Option<&BuiltinMap> {
        self.builtin.as_ref()
    }

    /// Top simplices left out of rank and energy statistics.
    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate
    }

    /// Also exclude the simplices flagged in `mask`.
    pub fn exclude(mut self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.excluded.len() {
            return Err(HopfError::DimensionMismatch {
                expected: self.excluded.len(),
                found: mask.len(),
            });
        }
        self.excluded
            .iter_mut()
            .zip(mask)
            .for_each(|(e, m)| *e |= m);
        Ok(self)
    }

    /// Affine differential of simplex `i`, whatever the stored kind.
    pub fn affine_differential(&self, i: usize) -> DMatrix<f64> {
        affine_differential(&self.mesh, self.codim, &self.values, i).0
    }

    /// Largest operator norm of the differentials over included simplices.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.differentials
            .par_iter()
            .zip(&self.excluded)
            .filter(|(_, e)| !**e)
            .map(|(d, _)| spectral_norm(d))
            .reduce(|| 0.0, f64::max)
    }

    /// Largest `|D_i - D_i^affine|` (Frobenius) over included simplices; zero
    /// for affine maps and `O(h)` for analytic ones.
    pub fn consistency_gap(&self) -> f64 {
        if self.kind == DifferentialKind::Affine {
            return 0.0;
        }
        (0..self.differentials.len())
            .into_par_iter()
            .filter(|&i| !self.excluded[i])
            .map(|i| (&self.differentials[i] - self.affine_differential(i)).norm())
            .reduce(|| 0.0, f64::max)
    }

    /// `A . f` for a linear map `A` (`m' x m`).
    pub fn post_compose(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.ncols() != self.codim {
            return Err(HopfError::DimensionMismatch {
                expected: self.codim,
                found: a.ncols(),
            });
        }
        let codim = a.nrows();
        let mut values = Vec::with_capacity(codim * self.mesh.vertex_count());
        for v in 0..self.mesh.vertex_count() {
            let y = a * DVector::from_column_slice(self.value(v));
            values.extend(y.iter());
        }
        let builtin = self.builtin.as_ref().and_then(|b| b.post_composed(a));
        Ok(Self {
            mesh: self.mesh.clone(),
            codim,
            values,
            differentials: self.differentials.iter().map(|d| a * d).collect(),
            kind: self.kind,
            excluded: self.excluded.clone(),
            degenerate: self.degenerate,
            builtin,
        })
    }

    /// Replace the vertex values, keeping differentials and provenance.
    pub(crate) fn with_values(mut self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        self.values = values;
        self
    }

    /// Same values on another complex with identical combinatorics.
    pub(crate) fn transplant(
        &self,
        mesh: Arc<SimplicialComplex>,
        values: Vec<f64>,
    ) -> Result<Self> {
        match &self.builtin {
            Some(b) => Self::from_builtin(mesh, b.clone()),
            None => Self::from_values(mesh, self.codim, values),
        }
    }
}

fn affine_differential(
    mesh: &SimplicialComplex,
    codim: usize,
    values: &[f64],
    i: usize,
) -> (DMatrix<f64>, bool) {
    let dim = mesh.dim();
    let (_, r) = tangent_frame(mesh, i);
    if is_degenerate(&r) {
        return (DMatrix::zeros(codim, dim), true);
    }
    let s = mesh.simplices(dim).get(i);
    let v0 = s[0] as usize;
    let image = DMatrix::from_fn(codim, dim, |row, c| {
        values[s[c + 1] as usize * codim + row] - values[v0 * codim + row]
    });
    // image = D r, so D = image r^{-1}
    let rt = r.transpose();
    let d = rt
        .solve_lower_triangular(&image.transpose())
        .expect("nondegenerate simplex")
        .transpose();
    (d, false)
}

fn spectral_norm(d: &DMatrix<f64>) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    d.clone().svd(false, false).singular_values.max()
}
