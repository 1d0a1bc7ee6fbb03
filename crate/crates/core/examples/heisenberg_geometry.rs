//! Group law, horizontal lifts, and Carnot-Caratheodory distance estimates in H_1.

use std::f64::consts::{PI, TAU};

use hopfdec::commands::random_pairs;
use hopfdec::heisenberg::{
    cc_distance, cc_length, contact_form, frame_at, group_inv, group_mul, lift_curve,
    metric_comparison_check, CcBudget, HeisPoint,
};

fn main() -> hopfdec::error::Result<()> {
    let p = HeisPoint::h1(1.0, 0.5, -0.25);
    let q = HeisPoint::h1(-0.3, 2.0, 1.0);
    let pq = group_mul(&p, &q)?;
    println!("p * q = {:?}", pq.coords());
    println!("p^-1 * p = {:?}", group_mul(&group_inv(&p), &p)?.coords());
    for v in frame_at(&p) {
        println!(
            "frame vector {:?}, contact form {:.1e}",
            v.components,
            contact_form(&p, &v)?
        );
    }

    // a counterclockwise unit circle lifts to a curve that drops by 4 pi
    let n = 10_000;
    let circle: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            let s = TAU * i as f64 / n as f64;
            vec![s.cos(), s.sin()]
        })
        .collect();
    let lift = lift_curve(&circle, 0.0)?;
    println!(
        "circle lift: vertical gap {:.9} (-4 pi = {:.9}), length {:.6}",
        lift.vertical_gap(),
        -4.0 * PI,
        cc_length(&lift)
    );

    let budget = CcBudget::default();
    let o = HeisPoint::identity(1);
    for target in [
        HeisPoint::h1(1.0, 0.0, 0.0),
        HeisPoint::h1(0.0, 0.0, 1.0),
        q.clone(),
    ] {
        let r = cc_distance(&o, &target, &budget)?;
        println!(
            "d_cc(0, {:?}) in [{:.6}, {:.6}], converged {}",
            target.coords(),
            r.certified_lower(),
            r.distance_upper,
            r.converged
        );
    }

    for seed in 0..2 {
        let pairs = random_pairs(100, 1.0, seed);
        let c = metric_comparison_check(&pairs, (-1.0, 1.0), &budget)?;
        println!(
            "batch {seed}: |p-q|/{:.3} <= d_cc <= {:.3} |p-q|^(1/2)",
            c.c_lower, c.c_upper
        );
    }
    Ok(())
}
