//! Numerical rank of sampled differentials: the Hopf map factors through a
//! 2-sphere, the control map does not, and a horizontal loop has rank one.

use std::sync::Arc;

use hopfdec::dec::build_sphere3_mesh;
use hopfdec::hopf::{closedness_residual, FormSpec, SampledMap};
use hopfdec::maps::{
    contact_check, figure_eight_on_circle, rank_profile, BuiltinMap, DEFAULT_RANK_TOL,
};

fn main() -> hopfdec::error::Result<()> {
    let mesh = Arc::new(build_sphere3_mesh(3)?);
    for (name, map) in [
        ("hopf", BuiltinMap::hopf()),
        ("full_rank", BuiltinMap::full_rank_control(1)),
    ] {
        let f = SampledMap::from_builtin(mesh.clone(), map)?;
        let affine = SampledMap::from_values(mesh.clone(), 3, f.values().to_vec())?;
        let a = rank_profile(&f, DEFAULT_RANK_TOL);
        let p = rank_profile(&affine, DEFAULT_RANK_TOL);
        println!(
            "{name}: rank <= 2 on {:.4} of the volume (analytic), {:.4} (affine); closedness {:.3e}",
            a.fraction_at_most(2),
            p.fraction_at_most(2),
            closedness_residual(&f, &FormSpec::S2AreaExtended)?
        );
    }

    let loop_map = figure_eight_on_circle(256, 16)?;
    let contact = contact_check(&loop_map, 2.0)?;
    println!(
        "figure eight: max rank {}, contact residual max {:.2e} mean {:.2e}",
        rank_profile(&loop_map, DEFAULT_RANK_TOL).max_rank(),
        contact.max_residual,
        contact.mean_residual
    );
    Ok(())
}
