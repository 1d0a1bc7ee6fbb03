//! Hopf invariants of the Hopf map, its mirror image, a constant map, and a
//! full-rank map that the closedness gate rejects.

use std::sync::Arc;

use hopfdec::dec::build_sphere3_mesh;
use hopfdec::hopf::{hopf_with, FormSpec, HopfOptions, SampledMap};
use hopfdec::maps::BuiltinMap;

fn main() -> hopfdec::error::Result<()> {
    let mesh = Arc::new(build_sphere3_mesh(3)?);
    let alpha = FormSpec::S2AreaExtended;
    let opts = HopfOptions {
        gauge_trials: 10,
        ..HopfOptions::default()
    };
    let maps = [
        ("hopf", BuiltinMap::hopf()),
        ("hopf_reflected", BuiltinMap::hopf_reflected()),
        ("constant", BuiltinMap::constant(vec![0.0, 0.0, 1.0], 4)),
        ("full_rank", BuiltinMap::full_rank_control(1)),
    ];
    for (name, map) in maps {
        let f = SampledMap::from_builtin(mesh.clone(), map)?;
        match hopf_with(&f, &alpha, &opts) {
            Ok(r) => println!(
                "{name:>15}: HI = {:.6}, oracle {:?}, closedness {:.3e}, gauge shift {:.1e}",
                r.value, r.oracle_value, r.closedness_residual, r.gauge_check
            ),
            Err(e) => println!("{name:>15}: {e} (exit code {})", e.exit_code()),
        }
    }
    Ok(())
}
