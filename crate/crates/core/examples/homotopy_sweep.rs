//! Hopf invariant along the rotation homotopy and on concentric spheres of
//! the radial extension to the 4-ball.

use std::sync::Arc;

use hopfdec::dec::{build_cone_mesh, build_sphere3_mesh};
use hopfdec::hopf::{homotopy_sweep, radial_sweep, FormSpec, HopfOptions, SampledMap};
use hopfdec::maps::{radial_extension, rotation_homotopy, BuiltinMap};

fn main() -> hopfdec::error::Result<()> {
    let base = Arc::new(build_sphere3_mesh(3)?);
    let f = SampledMap::from_builtin(base.clone(), BuiltinMap::hopf())?;
    let alpha = FormSpec::S2AreaExtended;
    let opts = HopfOptions::default();

    let sweep = homotopy_sweep(rotation_homotopy(&f, 9)?, &alpha, &opts)?;
    sweep.write_csv(std::io::stdout(), Some("rotation sweep"))?;
    println!("max deviation {:.3e}\n", sweep.max_deviation);

    let cone = build_cone_mesh(base, 4)?;
    let ball = radial_extension(&f, &cone)?;
    let radial = radial_sweep(&ball, &cone, &[0.25, 0.5, 0.75], &alpha, &opts)?;
    radial.write_csv(std::io::stdout(), Some("radial sweep"))?;
    println!("spread {:.3e}", radial.spread);
    Ok(())
}
