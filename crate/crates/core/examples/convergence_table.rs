//! Convergence of pullbacks and Hopf invariants along two sequences tending
//! to the Hopf map: rotations (isometries of the target, so the pullback does
//! not move) and stereographic dilations (which do move it).

use hopfdec::commands::convergence_sequence;
use hopfdec::config::ConvergenceFamily;
use hopfdec::dec::build_sphere3_mesh;
use hopfdec::hopf::{convergence_experiment, FormSpec, HopfOptions, SampledMap};
use hopfdec::maps::BuiltinMap;

fn main() -> hopfdec::error::Result<()> {
    let mesh = std::sync::Arc::new(build_sphere3_mesh(3)?);
    let g = SampledMap::from_builtin(mesh, BuiltinMap::hopf())?;
    let alpha = FormSpec::S2AreaExtended;
    for family in [ConvergenceFamily::Rotation, ConvergenceFamily::Dilation] {
        let seq = convergence_sequence(&g, family, 8)?;
        let table = convergence_experiment(&seq, &g, &alpha, 2.0, &HopfOptions::default())?;
        table.write_csv(std::io::stdout(), Some(&format!("{family:?}")))?;
        println!("monotone: {}\n", table.is_monotone(1e-10));
    }
    Ok(())
}
