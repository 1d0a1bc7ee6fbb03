use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::form::FormSpec;
use super::linking::linking_oracle;
use super::sampled::SampledMap;
use crate::dec::{
    closedness, coboundary, cup_with, integrate_top, solve_primitive_with, Cochain, ConeMesh,
    CupProduct, PrimitiveOptions,
};
use crate::error::{HopfError, Result};
use crate::maps::BuiltinMap;

/// Default closedness budget, calibrated on the Hopf fibration at level 3.
pub const DEFAULT_CLOSEDNESS_BUDGET: f64 = 0.05;

/// Longest edge of the level-3 sphere mesh, where the budget is calibrated.
pub const REFERENCE_MESH_SIZE: f64 = 0.43802251362528366;

/// The budget `b` at the reference mesh size, scaled linearly to mesh size `h`.
pub fn scaled_budget(b: f64, h: f64) -> f64 {
    b * h / REFERENCE_MESH_SIZE
}

/// Pullback `f* alpha` with the count of simplices whose quadrature was not
/// finite (those get value 0).
#[derive(Clone, Debug)]
pub struct Pullback {
    pub cochain: Cochain,
    pub nonfinite: usize,
}

fn check_dims(f: &SampledMap, alpha: &FormSpec) -> Result<()> {
    alpha.validate()?;
    if alpha.ambient_dim() != f.codim() {
        return Err(HopfError::DimensionMismatch {
            expected: alpha.ambient_dim(),
            found: f.codim(),
        });
    }
    if alpha.degree() > f.mesh().dim() {
        return Err(HopfError::DegreeOutOfRange {
            degree: alpha.degree(),
            dim: f.mesh().dim(),
        });
    }
    Ok(())
}

pub fn pullback_with_warnings(f: &SampledMap, alpha: &FormSpec) -> Result<Pullback> {
    check_dims(f, alpha)?;
    let k = alpha.degree();
    let mesh = f.mesh();
    let m = f.codim();
    let nonfinite = AtomicUsize::new(0);
    let values: Vec<f64> = (0..mesh.count(k))
        .into_par_iter()
        .map(|i| {
            let s = mesh.simplices(k).get(i);
            let verts = DMatrix::from_fn(m, k + 1, |r, c| f.value(s[c] as usize)[r]);
            let v = alpha.integrate_simplex(&verts);
            if v.is_finite() {
                v
            } else {
                nonfinite.fetch_add(1, Ordering::Relaxed);
                0.0
            }
        })
        .collect();
    Ok(Pullback {
        cochain: Cochain::from_values(mesh.clone(), k, values)?,
        nonfinite: nonfinite.into_inner(),
    })
}

/// `f* alpha` as a cochain: each `k`-simplex gets the integral of `alpha` over
/// its affine image.
pub fn pullback(f: &SampledMap, alpha: &FormSpec) -> Result<Cochain> {
    Ok(pullback_with_warnings(f, alpha)?.cochain)
}

/// `|d(f* alpha)| / (1 + |f* alpha|)` in the lumped metric norms.
pub fn closedness_residual(f: &SampledMap, alpha: &FormSpec) -> Result<f64> {
    closedness(&pullback(f, alpha)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HopfOptions {
    /// Relative tolerance of the primitive solver.
    pub solver_tol: f64,
    /// Closedness budget at the reference mesh size; the gate applies it
    /// scaled linearly with the mesh size. `None` disables the gate.
    pub closedness_budget: Option<f64>,
    /// Random gauge shifts used for `gauge_check`.
    pub gauge_trials: usize,
    pub seed: u64,
    pub cup: CupProduct,
    /// Compute the linking-number cross-check when the map allows it.
    pub oracle: bool,
}

impl Default for HopfOptions {
    fn default() -> Self {
        Self {
            solver_tol: 1e-10,
            closedness_budget: Some(DEFAULT_CLOSEDNESS_BUDGET),
            gauge_trials: 3,
            seed: 0,
            cup: CupProduct::AlexanderWhitney,
            oracle: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HopfReport {
    pub value: f64,
    pub closedness_residual: f64,
    pub primitive_residual: f64,
    /// Longest edge of the domain mesh.
    pub mesh_h: f64,
    /// Largest change of the value under random gauge shifts.
    pub gauge_check: f64,
    pub oracle_value: Option<i64>,
    /// Metric norms of the primitive and of the pulled-back form.
    pub omega_norm: f64,
    pub eta_norm: f64,
    pub solver_iterations: usize,
    pub warnings: Vec<String>,
}

impl HopfReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Generalized Hopf invariant with default options and solver tolerance `tol`.
pub fn hopf(f: &SampledMap, alpha: &FormSpec, tol: f64) -> Result<HopfReport> {
    hopf_with(
        f,
        alpha,
        &HopfOptions {
            solver_tol: tol,
            ..Default::default()
        },
    )
}

fn invariant_of(omega: &Cochain, d_omega: &Cochain, cup: CupProduct) -> Result<f64> {
    integrate_top(&cup_with(omega, d_omega, cup)?)
}

fn gauge_shifts(omega: &Cochain, d_omega: &Cochain, opts: &HopfOptions, base: f64) -> Result<f64> {
    if omega.degree() == 0 || opts.gauge_trials == 0 {
        return Ok(0.0);
    }
    let scale = omega.max_abs().max(1.0);
    let shifts: Result<Vec<f64>> = (0..opts.gauge_trials)
        .into_par_iter()
        .map(|trial| {
            let beta = Cochain::random(
                omega.complex().clone(),
                omega.degree() - 1,
                opts.seed.wrapping_add(trial as u64 + 1),
            )?
            .scaled(scale);
            let shifted = omega.add_scaled(&coboundary(&beta)?, 1.0)?;
            Ok((invariant_of(&shifted, d_omega, opts.cup)? - base).abs())
        })
        .collect();
    Ok(shifts?.into_iter().fold(0.0, f64::max))
}

pub fn hopf_with(f: &SampledMap, alpha: &FormSpec, opts: &HopfOptions) -> Result<HopfReport> {
    check_dims(f, alpha)?;
    let mesh = f.mesh();
    if mesh.dim() + 1 != 2 * alpha.degree() {
        return Err(HopfError::Precondition(format!(
            "a {}-form needs a {}-dimensional domain, got {}",
            alpha.degree(),
            2 * alpha.degree() - 1,
            mesh.dim()
        )));
    }
    let mut warnings = Vec::new();
    let pb = pullback_with_warnings(f, alpha)?;
    if pb.nonfinite > 0 {
        warnings.push(format!(
            "{} simplices had non-finite quadrature and were set to 0",
            pb.nonfinite
        ));
    }
    let eta = pb.cochain;
    let closedness_residual = closedness(&eta)?;
    if let Some(b) = opts.closedness_budget {
        let budget = scaled_budget(b, mesh.mesh_size());
        if closedness_residual > budget {
            return Err(HopfError::NotClosed {
                residual: closedness_residual,
                budget,
            });
        }
    }
    let primitive = solve_primitive_with(
        &eta,
        &PrimitiveOptions {
            tol: opts.solver_tol,
            closedness_budget: None,
            max_iterations: None,
        },
    )?;
    let omega = primitive.omega;
    let d_omega = coboundary(&omega)?;
    let value = invariant_of(&omega, &d_omega, opts.cup)?;
    let gauge_check = gauge_shifts(&omega, &d_omega, opts, value)?;

    let oracle_value = if opts.oracle && *alpha == FormSpec::S2AreaExtended {
        match f.builtin() {
            Some(b) => hopf_oracle(b)?,
            None => None,
        }
    } else {
        None
    };

    Ok(HopfReport {
        value,
        closedness_residual,
        primitive_residual: primitive.residual,
        mesh_h: mesh.mesh_size(),
        gauge_check,
        oracle_value,
        omega_norm: omega.metric_norm(),
        eta_norm: eta.metric_norm(),
        solver_iterations: primitive.iterations,
        warnings,
    })
}

/// Linking number of two fibers of `f = A . h` with `A` orthogonal.
fn hopf_oracle(map: &BuiltinMap) -> Result<Option<i64>> {
    let Some(post) = map.hopf_post() else {
        return Ok(None);
    };
    let a = Matrix3::from_fn(|r, c| post[r][c]);
    if (a.transpose() * a - Matrix3::identity()).norm() > 1e-9 {
        return Ok(None);
    }
    // the fiber of f over a value p is the h-fiber over A^T p
    let p = a.transpose() * Vector3::new(0.6, 0.0, 0.8);
    let q = a.transpose() * Vector3::new(0.0, 0.6, -0.8);
    linking_oracle([p.x, p.y, p.z], [q.x, q.y, q.z]).map(Some)
}

/// Generalized Hopf invariant of `x -> f(r x)` on the unit sphere, for `f`
/// sampled on a cone mesh. `r` is snapped to the nearest vertex ring.
pub fn hopf_scaled(
    f_on_ball: &SampledMap,
    cone: &ConeMesh,
    r: f64,
    alpha: &FormSpec,
    opts: &HopfOptions,
) -> Result<HopfReport> {
    if !Arc::ptr_eq(f_on_ball.mesh(), &cone.complex)
        && f_on_ball.mesh().vertex_count() != cone.complex.vertex_count()
    {
        return Err(HopfError::ComplexMismatch);
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(HopfError::Precondition(format!(
            "radius {r} outside (0, 1]"
        )));
    }
    let (ring, snap) = cone.nearest_ring(r);
    let nb = cone.base.vertex_count();
    let m = f_on_ball.codim();
    let mut values = Vec::with_capacity(m * nb);
    for v in 0..nb {
        values.extend_from_slice(f_on_ball.value(cone.ring_vertex(ring, v)));
    }
    let restricted = f_on_ball.transplant(cone.base.clone(), values)?;
    let mut report = hopf_with(&restricted, alpha, opts)?;
    if snap > 1e-12 {
        report.warnings.push(format!(
            "radius {r} snapped to ring {ring} at radius {}",
            cone.ring_radius(ring)
        ));
    }
    Ok(report)
}

/// Largest `|HI(omega) - HI(omega + d beta)|` over random `beta`.
pub fn gauge_independence_check(
    f: &SampledMap,
    alpha: &FormSpec,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Ok(0.0);
    }
    let opts = HopfOptions {
        gauge_trials: trials,
        seed,
        oracle: false,
        closedness_budget: None,
        ..Default::default()
    };
    Ok(hopf_with(f, alpha, &opts)?.gauge_check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::{build_sphere2_mesh, build_sphere3_mesh};

    fn s3(level: usize) -> Arc<crate::dec::SimplicialComplex> {
        Arc::new(build_sphere3_mesh(level).unwrap())
    }

    #[test]
    fn constant_map_pulls_back_to_zero() {
        let m = s3(1);
        let f = SampledMap::from_builtin(m, BuiltinMap::constant(vec![0.0, 0.6, 0.8], 4)).unwrap();
        let eta = pullback(&f, &FormSpec::S2AreaExtended).unwrap();
        assert_eq!(eta.max_abs(), 0.0);
        assert_eq!(
            closedness_residual(&f, &FormSpec::S2AreaExtended).unwrap(),
            0.0
        );
        let report = hopf(&f, &FormSpec::S2AreaExtended, 1e-10).unwrap();
        assert_eq!(report.value, 0.0);
        assert_eq!(report.oracle_value, None);
    }

    #[test]
    fn inclusion_of_sphere_patch() {
        // identity on S^2 recovers the normalized area of each patch
        let m = Arc::new(build_sphere2_mesh(3).unwrap());
        let values: Vec<f64> = m.coords().to_vec();
        let f = SampledMap::from_values(m.clone(), 3, values).unwrap();
        let eta = pullback(&f, &FormSpec::S2AreaExtended).unwrap();
        // one octant: triangles with all vertices in x,y,z >= 0
        let mut patch = 0.0;
        for (i, s) in m.simplices(2).iter().enumerate() {
            if s.iter()
                .all(|&v| m.vertex(v as usize).iter().all(|c| *c >= -1e-12))
            {
                patch += m.orientation()[i] as f64 * eta.values()[i];
            }
        }
        assert!((patch - 0.125).abs() < 2e-3, "patch {patch}");
    }

    #[test]
    fn pullback_is_linear_in_the_form() {
        let m = s3(1);
        let f = SampledMap::from_builtin(m, BuiltinMap::hopf()).unwrap();
        let a1 = FormSpec::S2AreaExtended;
        let a2 = FormSpec::ConstantCoefficient {
            ambient_dim: 3,
            degree: 2,
            terms: vec![(vec![0, 2], 0.5), (vec![1, 2], -1.0)],
        };
        let sum = FormSpec::Sum(vec![a1.clone(), a2.clone()]);
        let lhs = pullback(&f, &sum).unwrap();
        let rhs = pullback(&f, &a1)
            .unwrap()
            .add_scaled(&pullback(&f, &a2).unwrap(), 1.0)
            .unwrap();
        assert!(lhs.add_scaled(&rhs, -1.0).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn codimension_mismatch() {
        let m = s3(0);
        let f = SampledMap::from_values(m, 2, vec![0.0; 16]).unwrap();
        assert!(matches!(
            pullback(&f, &FormSpec::S2AreaExtended),
            Err(HopfError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hopf_fibration_level_two() {
        let f = SampledMap::from_builtin(s3(2), BuiltinMap::hopf()).unwrap();
        let opts = HopfOptions {
            closedness_budget: None,
            ..Default::default()
        };
        let report = hopf_with(&f, &FormSpec::S2AreaExtended, &opts).unwrap();
        assert!((report.value - 1.0).abs() < 0.2, "value {}", report.value);
        assert_eq!(report.oracle_value, Some(1));
        assert!(report.gauge_check < 1e-8);
    }

    #[test]
    fn reference_mesh_size_matches_level_three() {
        assert!((s3(3).mesh_size() - REFERENCE_MESH_SIZE).abs() < 1e-12);
        assert_eq!(scaled_budget(0.05, REFERENCE_MESH_SIZE), 0.05);
    }

    #[test]
    fn full_rank_control_fails_the_gate() {
        let f = SampledMap::from_builtin(s3(2), BuiltinMap::full_rank_control(1)).unwrap();
        assert!(matches!(
            hopf(&f, &FormSpec::S2AreaExtended, 1e-10),
            Err(HopfError::NotClosed { .. })
        ));
    }

    #[test]
    fn zero_gauge_trials() {
        let f = SampledMap::from_builtin(s3(1), BuiltinMap::hopf()).unwrap();
        assert_eq!(
            gauge_independence_check(&f, &FormSpec::S2AreaExtended, 0, 1).unwrap(),
            0.0
        );
    }
}
