//! Validating a user-supplied sphere in H_2 through the embedding plug point,
//! using the lifted Whitney sphere
//! `(x0, x1, x2) -> (x1, x0 x1, x2, x0 x2, -2 x0) / (1 + x0^2)`.
//! The two points over the Whitney double point sit at heights -1 and 1.
//! Sampled affinely, the contact residual decays like `h^2`.

use std::sync::Arc;

use hopfdec::dec::build_sphere2_mesh;
use hopfdec::hopf::SampledMap;
use hopfdec::maps::{sphere2_embedding_into_h2, symplectic_rank_check};

fn main() -> hopfdec::error::Result<()> {
    for level in 3..=5 {
        let mesh = Arc::new(build_sphere2_mesh(level)?);
        let values: Vec<f64> = (0..mesh.vertex_count())
            .flat_map(|v| {
                let p = mesh.vertex(v);
                let w = 1.0 + p[0] * p[0];
                [
                    p[1] / w,
                    p[0] * p[1] / w,
                    p[2] / w,
                    p[0] * p[2] / w,
                    -2.0 * p[0] / w,
                ]
            })
            .collect();
        let f = SampledMap::from_values(mesh.clone(), 5, values.clone())?;
        let h = mesh.mesh_size();
        let e = sphere2_embedding_into_h2(f, 0.1, 1e-9)?;
        // the horizontal projection is Lagrangian in R^4
        let planar: Vec<f64> = values.chunks(5).flat_map(|c| c[..4].to_vec()).collect();
        let s = symplectic_rank_check(&SampledMap::from_values(mesh, 4, planar)?, 0.05)?;
        println!(
            "level {level} (h = {h:.3}): contact residual max {:.3e}, min separation {:.3e}, isotropic {}/{}, violators {}",
            e.report.contact.max_residual,
            e.report.min_separation,
            s.isotropic,
            s.per_simplex_rank.len(),
            s.violators.len()
        );
    }
    Ok(())
}
