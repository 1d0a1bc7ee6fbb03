use std::sync::Arc;

use nalgebra::DMatrix;

use super::builtin::{z_rotation, BuiltinMap};
use crate::dec::ConeMesh;
use crate::error::{HopfError, Result};
use crate::hopf::SampledMap;

/// Tolerance on `|f(v)| = 1` for maps that must land in `S^2`.
pub const SPHERE_TOL: f64 = 1e-9;

fn check_on_sphere(f: &SampledMap) -> Result<()> {
    if f.codim() != 3 {
        return Err(HopfError::DimensionMismatch {
            expected: 3,
            found: f.codim(),
        });
    }
    for v in 0..f.mesh().vertex_count() {
        let n = f.value(v).iter().map(|c| c * c).sum::<f64>().sqrt();
        if (n - 1.0).abs() > SPHERE_TOL {
            return Err(HopfError::Precondition(format!(
                "value at vertex {v} has norm {n}, not on S^2"
            )));
        }
    }
    Ok(())
}

/// `t -> R_{t pi} . f` on `steps` uniform times in `[0, 1]`, with `R` the
/// rotation about the z-axis.
pub fn rotation_homotopy(f: &SampledMap, steps: usize) -> Result<Vec<(f64, SampledMap)>> {
    if steps == 0 {
        return Err(HopfError::TooFewSamples { needed: 1, got: 0 });
    }
    check_on_sphere(f)?;
    if steps == 1 {
        return Ok(vec![(0.0, f.clone())]);
    }
    (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            let r = z_rotation(t * std::f64::consts::PI);
            let a = DMatrix::from_fn(3, 3, |i, j| r[i][j]);
            Ok((t, f.post_compose(&a)?))
        })
        .collect()
}

/// `D_lambda . f` where `D_lambda` scales stereographic coordinates (from the
/// south pole) by `lambda`. A degree-one self-map of `S^2` that is not an
/// isometry, so unlike a rotation it moves `f* alpha`.
pub fn sphere_dilation(f: &SampledMap, lambda: f64) -> Result<SampledMap> {
    check_on_sphere(f)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(HopfError::Precondition(format!(
            "dilation factor {lambda} must be positive"
        )));
    }
    let values = f
        .values()
        .chunks(3)
        .flat_map(|p| {
            let d = 1.0 + p[2];
            if d < 1e-12 {
                return [0.0, 0.0, -1.0];
            }
            let (u, w) = (lambda * p[0] / d, lambda * p[1] / d);
            let r2 = u * u + w * w;
            [
                2.0 * u / (1.0 + r2),
                2.0 * w / (1.0 + r2),
                (1.0 - r2) / (1.0 + r2),
            ]
        })
        .collect();
    SampledMap::from_values(f.mesh().clone(), 3, values)
}

/// `s -> (1 - s) from + s to` on `steps` uniform parameters, sampled on `mesh`.
pub fn interpolation_family(
    mesh: Arc<crate::dec::SimplicialComplex>,
    from: &BuiltinMap,
    to: &BuiltinMap,
    steps: usize,
) -> Result<Vec<(f64, SampledMap)>> {
    if steps < 2 {
        return Err(HopfError::TooFewSamples {
            needed: 2,
            got: steps,
        });
    }
    (0..steps)
        .map(|i| {
            let s = i as f64 / (steps - 1) as f64;
            let map = BuiltinMap::blend(s, from.clone(), to.clone())?;
            Ok((s, SampledMap::from_builtin(mesh.clone(), map)?))
        })
        .collect()
}

/// `f(x) = f_0(x/|x|)` on the cone over `f_0`'s domain.
///
/// Ring vertices copy the boundary value of their radial projection and the
/// apex takes the value at base vertex 0. The star of the apex, where the map
/// is not Lipschitz, is excluded from rank and energy statistics.
pub fn radial_extension(boundary_map: &SampledMap, cone: &ConeMesh) -> Result<SampledMap> {
    let base = &cone.base;
    if !Arc::ptr_eq(boundary_map.mesh(), base)
        && (boundary_map.mesh().vertex_count() != base.vertex_count()
            || boundary_map.mesh().count(3) != base.count(3))
    {
        return Err(HopfError::ComplexMismatch);
    }
    let m = boundary_map.codim();
    let nb = base.vertex_count();
    let mut values = Vec::with_capacity(m * (1 + cone.layers * nb));
    values.extend_from_slice(boundary_map.value(0));
    for _ in 1..=cone.layers {
        values.extend_from_slice(boundary_map.values());
    }
    let map = match boundary_map.builtin() {
        Some(b) => SampledMap::from_builtin(cone.complex.clone(), b.clone())?.with_values(values),
        None => SampledMap::from_values(cone.complex.clone(), m, values)?,
    };
    let dim = cone.complex.dim();
    let apex_star: Vec<bool> = cone
        .complex
        .simplices(dim)
        .iter()
        .map(|s| s[0] as usize == ConeMesh::APEX)
        .collect();
    map.exclude(&apex_star)
}
