//! Triangulated 3-spheres, cochain algebra, and the harmonic spaces of the mesh.

use std::sync::Arc;

use hopfdec::dec::{
    build_sphere3_mesh, coboundary, cup, harmonic_dimension, integrate_top, Cochain,
};

fn main() -> hopfdec::error::Result<()> {
    for level in 0..=3 {
        let m = build_sphere3_mesh(level)?;
        println!(
            "level {level}: f-vector {:?}, h = {:.6}, closed oriented {}",
            m.f_vector(),
            m.mesh_size(),
            m.is_closed_oriented_manifold()
        );
    }

    let m = Arc::new(build_sphere3_mesh(1)?);
    let a = Cochain::random(m.clone(), 1, 1)?;
    let b = Cochain::random(m.clone(), 1, 2)?;
    println!(
        "max |dd a| = {:.1e}",
        coboundary(&coboundary(&a)?)?.max_abs()
    );

    // d(a u b) = da u b - a u db
    let lhs = coboundary(&cup(&a, &b)?)?;
    let rhs = cup(&coboundary(&a)?, &b)?.add_scaled(&cup(&a, &coboundary(&b)?)?, -1.0)?;
    println!(
        "Leibniz residual {:.1e}",
        lhs.add_scaled(&rhs, -1.0)?.max_abs()
    );

    let c = Cochain::random(m.clone(), 2, 3)?;
    println!(
        "integral of d(2-cochain) = {:.1e}",
        integrate_top(&coboundary(&c)?)?
    );

    let dims: Vec<usize> = (0..=3)
        .map(|k| harmonic_dimension(&m, k, 1e-9))
        .collect::<Result<_, _>>()?;
    println!("harmonic dimensions {dims:?}");
    Ok(())
}
