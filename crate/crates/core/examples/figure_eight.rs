//! The horizontal figure eight in H_1: the lift closes up, and the two
//! passes over the planar crossing are separated by 8/3.

use hopfdec::maps::{figure_eight_embedding, injectivity_margin};

fn main() -> hopfdec::error::Result<()> {
    for samples in [101, 1_001, 10_001, 100_001] {
        let c = figure_eight_embedding(samples)?;
        println!(
            "{samples:>7} samples: closing gap {:.2e}, separation {:.9}, contact residual {:.1e}",
            c.vertical_gap(),
            injectivity_margin(&c),
            c.contact_residual()
        );
    }
    println!("exact separation {:.9}", 8.0 / 3.0);
    Ok(())
}
