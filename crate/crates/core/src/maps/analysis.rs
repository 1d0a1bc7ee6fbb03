use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};
use crate::hopf::SampledMap;

/// Default relative threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 0.05;

fn singular_values(d: &DMatrix<f64>) -> Vec<f64> {
    if d.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = d
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn numerical_rank(s: &[f64], tol_relative: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x >= tol_relative * top).count(),
        _ => 0,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankProfile {
    pub tol_relative: f64,
    /// Nonincreasing singular values per top simplex; empty when excluded.
    pub singular_values: Vec<Vec<f64>>,
    /// Numerical rank per top simplex; `None` when excluded.
    pub ranks: Vec<Option<usize>>,
    /// Number of simplices of each rank.
    pub histogram: Vec<usize>,
    /// Volume fraction of each rank among included simplices.
    pub fractions: Vec<f64>,
    pub excluded: usize,
}

impl RankProfile {
    pub fn fraction_above(&self, r: usize) -> f64 {
        self.fractions.iter().skip(r + 1).sum()
    }

    pub fn fraction_at_most(&self, r: usize) -> f64 {
        self.fractions.iter().take(r + 1).sum()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Numerical rank of every per-simplex differential, weighted by volume.
pub fn rank_profile(f: &SampledMap, tol_relative: f64) -> RankProfile {
    let mesh = f.mesh();
    let dim = mesh.dim();
    let vol = mesh.volumes(dim);
    let per: Vec<(Vec<f64>, Option<usize>)> = (0..mesh.count(dim))
        .into_par_iter()
        .map(|i| {
            if f.excluded()[i] {
                return (Vec::new(), None);
            }
            let s = singular_values(f.differential(i));
            let r = numerical_rank(&s, tol_relative);
            (s, Some(r))
        })
        .collect();
    let max_rank = f.codim().min(dim);
    let mut histogram = vec![0; max_rank + 1];
    let mut weight = vec![0.0; max_rank + 1];
    let mut excluded = 0;
    for (i, (_, r)) in per.iter().enumerate() {
        match r {
            Some(r) => {
                histogram[*r] += 1;
                weight[*r] += vol[i];
            }
            None => excluded += 1,
        }
    }
    let total: f64 = weight.iter().sum();
    let fractions = weight
        .iter()
        .map(|w| if total > 0.0 { w / total } else { 0.0 })
        .collect();
    let (singular_values, ranks) = per.into_iter().unzip();
    RankProfile {
        tol_relative,
        singular_values,
        ranks,
        histogram,
        fractions,
        excluded,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContactReport {
    /// `|dt - 2 sum_j (y_j dx_j - x_j dy_j)|` per top simplex, with the
    /// coefficients averaged over the simplex vertices.
    pub per_simplex_residual: Vec<f64>,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// `sum_i vol_i |horizontal part of df|^p`.
    pub horizontal_energy: f64,
    pub p: f64,
}

fn heisenberg_index(codim: usize) -> Result<usize> {
    if codim < 3 || codim.is_multiple_of(2) {
        return Err(HopfError::Precondition(format!(
            "Heisenberg-valued maps need odd codimension >= 3, got {codim}"
        )));
    }
    Ok((codim - 1) / 2)
}

/// Contact equation residuals of a map into `H_n` coordinates
/// `(x_1, y_1, ..., x_n, y_n, t)`.
pub fn contact_check(f: &SampledMap, p: f64) -> Result<ContactReport> {
    let n = heisenberg_index(f.codim())?;
    let mesh = f.mesh();
    let dim = mesh.dim();
    let vol = mesh.volumes(dim);
    let per: Vec<(f64, f64)> = (0..mesh.count(dim))
        .into_par_iter()
        .map(|i| {
            if f.excluded()[i] {
                return (0.0, 0.0);
            }
            let s = mesh.simplices(dim).get(i);
            let mut avg = vec![0.0; 2 * n];
            for &v in s {
                for (a, c) in avg.iter_mut().zip(f.value(v as usize)) {
                    *a += c / s.len() as f64;
                }
            }
            let d = f.differential(i);
            let mut violation = d.row(2 * n).clone_owned();
            let mut horizontal = 0.0;
            for j in 0..n {
                let (dx, dy) = (d.row(2 * j), d.row(2 * j + 1));
                violation -= dx * (2.0 * avg[2 * j + 1]) - dy * (2.0 * avg[2 * j]);
                horizontal += dx.norm_squared() + dy.norm_squared();
            }
            (violation.norm(), vol[i] * horizontal.sqrt().powf(p))
        })
        .collect();
    let included: Vec<f64> = per
        .iter()
        .zip(f.excluded())
        .filter(|(_, e)| !**e)
        .map(|(r, _)| r.0)
        .collect();
    let max_residual = included.iter().copied().fold(0.0, f64::max);
    let mean_residual = if included.is_empty() {
        0.0
    } else {
        included.iter().sum::<f64>() / included.len() as f64
    };
    Ok(ContactReport {
        per_simplex_residual: per.iter().map(|r| r.0).collect(),
        max_residual,
        mean_residual,
        horizontal_energy: per.iter().map(|r| r.1).sum(),
        p,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymplecticReport {
    pub n: usize,
    /// `|F* omega|` per top simplex, `omega = sum_j dx_j ^ dy_j`.
    pub per_simplex_pullback: Vec<f64>,
    pub per_simplex_rank: Vec<usize>,
    /// Simplices whose pullback is small relative to `sigma_1^2`.
    pub isotropic: usize,
    /// Isotropic simplices of rank above `n`; the linear algebra forbids them.
    pub violators: Vec<usize>,
}

/// Check that a small symplectic pullback forces rank at most `n`.
pub fn symplectic_rank_check(f: &SampledMap, tol: f64) -> Result<SymplecticReport> {
    let codim = f.codim();
    if codim == 0 || !codim.is_multiple_of(2) {
        return Err(HopfError::Precondition(format!(
            "symplectic check needs even codimension, got {codim}"
        )));
    }
    let n = codim / 2;
    let mesh = f.mesh();
    let dim = mesh.dim();
    let per: Vec<(f64, usize, bool)> = (0..mesh.count(dim))
        .into_par_iter()
        .map(|i| {
            let d = f.differential(i);
            let mut w = DMatrix::<f64>::zeros(dim, dim);
            for j in 0..n {
                let dx = d.row(2 * j);
                let dy = d.row(2 * j + 1);
                w += dx.transpose() * dy - dy.transpose() * dx;
            }
            let pull = w.norm() / std::f64::consts::SQRT_2;
            let s = singular_values(d);
            let rank = numerical_rank(&s, tol);
            let top = s.first().copied().unwrap_or(0.0);
            let isotropic = !f.excluded()[i] && pull <= tol * top * top;
            (pull, rank, isotropic)
        })
        .collect();
    let violators = per
        .iter()
        .enumerate()
        .filter(|(_, (_, r, iso))| *iso && *r > n)
        .map(|(i, _)| i)
        .collect();
    Ok(SymplecticReport {
        n,
        isotropic: per.iter().filter(|x| x.2).count(),
        per_simplex_pullback: per.iter().map(|x| x.0).collect(),
        per_simplex_rank: per.iter().map(|x| x.1).collect(),
        violators,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CenterReport {
    /// Vertices where `g^{-1} f` lies within `tol` of the center.
    pub qualifying_vertices: usize,
    /// Top simplices all of whose vertices qualify.
    pub qualifying_simplices: Vec<usize>,
    /// `|df - dg|` on the qualifying simplices.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub lipschitz: f64,
}

/// Where two `H_n`-valued maps differ by a central element, their
/// differentials should agree.
pub fn center_difference_check(f: &SampledMap, g: &SampledMap, tol: f64) -> Result<CenterReport> {
    let n = heisenberg_index(f.codim())?;
    if g.codim() != f.codim() {
        return Err(HopfError::DimensionMismatch {
            expected: f.codim(),
            found: g.codim(),
        });
    }
    if g.mesh().vertex_count() != f.mesh().vertex_count() || g.mesh().dim() != f.mesh().dim() {
        return Err(HopfError::ComplexMismatch);
    }
    let mesh = f.mesh();
    // the z-part of g^{-1} f is z_f - z_g
    let qualifies: Vec<bool> = (0..mesh.vertex_count())
        .map(|v| {
            let (a, b) = (f.value(v), g.value(v));
            let gap2: f64 = (0..2 * n).map(|j| (a[j] - b[j]).powi(2)).sum();
            gap2.sqrt() <= tol
        })
        .collect();
    let dim = mesh.dim();
    let mut qualifying_simplices = Vec::new();
    let mut gaps = Vec::new();
    for (i, s) in mesh.simplices(dim).iter().enumerate() {
        if s.iter().all(|&v| qualifies[v as usize]) {
            qualifying_simplices.push(i);
            gaps.push((f.differential(i) - g.differential(i)).norm());
        }
    }
    Ok(CenterReport {
        qualifying_vertices: qualifies.iter().filter(|q| **q).count(),
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        qualifying_simplices,
        gaps,
        lipschitz: f.lipschitz_estimate().max(g.lipschitz_estimate()),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dec::{build_circle_mesh, build_sphere3_mesh, build_square_mesh};
    use crate::maps::BuiltinMap;

    #[test]
    fn constant_map_has_rank_zero() {
        let m = Arc::new(build_sphere3_mesh(1).unwrap());
        let f = SampledMap::from_builtin(m, BuiltinMap::constant(vec![1.0, 2.0, 3.0], 4)).unwrap();
        let prof = rank_profile(&f, DEFAULT_RANK_TOL);
        assert_eq!(prof.max_rank(), 0);
        assert!((prof.fractions[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inclusion_has_rank_three() {
        let m = Arc::new(build_sphere3_mesh(1).unwrap());
        let f = SampledMap::from_values(m.clone(), 4, m.coords().to_vec()).unwrap();
        let prof = rank_profile(&f, DEFAULT_RANK_TOL);
        assert!((prof.fractions[3] - 1.0).abs() < 1e-12);
        assert_eq!(prof.fraction_above(2), prof.fractions[3]);
        for s in &prof.singular_values {
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn vertical_segment_violates_contact() {
        // (x, y, t) = (s, 0, s) along [0, 1]
        let coords: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let edges: Vec<Vec<u32>> = (0..4).map(|i| vec![i, i + 1]).collect();
        let m = Arc::new(
            crate::dec::SimplicialComplex::from_top_simplices(1, 1, coords.clone(), &edges, None)
                .unwrap(),
        );
        let values: Vec<f64> = coords.iter().flat_map(|&s| [s, 0.0, s]).collect();
        let f = SampledMap::from_values(m, 3, values).unwrap();
        let rep = contact_check(&f, 2.0).unwrap();
        assert!(rep
            .per_simplex_residual
            .iter()
            .all(|r| (r - 1.0).abs() < 1e-12));
        assert!((rep.horizontal_energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_contact_residual_is_zero() {
        let m = Arc::new(build_circle_mesh(12).unwrap());
        let f = SampledMap::from_values(m, 3, vec![0.5; 36]).unwrap();
        let rep = contact_check(&f, 2.0).unwrap();
        assert_eq!(rep.max_residual, 0.0);
        assert!(contact_check(
            &SampledMap::from_values(f.mesh().clone(), 2, vec![0.0; 24]).unwrap(),
            2.0
        )
        .is_err());
    }

    #[test]
    fn symplectic_cases() {
        let m = Arc::new(build_square_mesh(3).unwrap());
        // image in the x-axis
        let line: Vec<f64> = (0..m.vertex_count())
            .flat_map(|v| [m.vertex(v)[0] + 2.0 * m.vertex(v)[1], 0.0])
            .collect();
        let rep =
            symplectic_rank_check(&SampledMap::from_values(m.clone(), 2, line).unwrap(), 1e-6)
                .unwrap();
        assert!(rep.per_simplex_pullback.iter().all(|p| p.abs() < 1e-12));
        assert!(rep.per_simplex_rank.iter().all(|r| *r <= 1));
        assert!(rep.violators.is_empty());
        // identity: area form, rank 2, not isotropic
        let id = SampledMap::from_values(m.clone(), 2, m.coords().to_vec()).unwrap();
        let rep = symplectic_rank_check(&id, 1e-6).unwrap();
        assert!(rep
            .per_simplex_pullback
            .iter()
            .all(|p| (p - 1.0).abs() < 1e-12));
        assert!(rep.per_simplex_rank.iter().all(|r| *r == 2));
        assert_eq!(rep.isotropic, 0);
    }

    #[test]
    fn center_shift_cases() {
        let m = Arc::new(build_square_mesh(2).unwrap());
        let f: Vec<f64> = (0..m.vertex_count())
            .flat_map(|v| {
                let (x, y) = (m.vertex(v)[0], m.vertex(v)[1]);
                [x, y, x * y]
            })
            .collect();
        let fm = SampledMap::from_values(m.clone(), 3, f.clone()).unwrap();
        let same = center_difference_check(&fm, &fm, 1e-9).unwrap();
        assert_eq!(same.qualifying_simplices.len(), m.count(2));
        assert_eq!(same.max_gap, 0.0);

        let up: Vec<f64> = f.chunks(3).flat_map(|c| [c[0], c[1], c[2] + 3.0]).collect();
        let gm = SampledMap::from_values(m.clone(), 3, up).unwrap();
        let shifted = center_difference_check(&fm, &gm, 1e-9).unwrap();
        assert_eq!(shifted.qualifying_simplices.len(), m.count(2));
        assert!(shifted.max_gap < 1e-12);

        let side: Vec<f64> = f.chunks(3).flat_map(|c| [c[0] + 0.1, c[1], c[2]]).collect();
        let sm = SampledMap::from_values(m.clone(), 3, side).unwrap();
        let moved = center_difference_check(&fm, &sm, 1e-9).unwrap();
        assert!(moved.qualifying_simplices.is_empty());
    }
}
