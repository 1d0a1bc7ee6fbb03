use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, Vector3, Vector4};

use crate::error::{HopfError, Result};

/// Largest allowed distance of the Gauss integral from an integer.
pub const ORACLE_TOL: f64 = 0.1;

/// Point and velocity of the Hopf fiber over `p` at angle `theta`.
///
/// With `w = p_x + i p_y` and `c = p_z` the fiber is
/// `(sqrt((1+c)/2) e^{i(theta + arg w)}, sqrt((1-c)/2) e^{i theta})`.
fn fiber(p: &Vector3<f64>, theta: f64) -> (Vector4<f64>, Vector4<f64>) {
    let phase = p.y.atan2(p.x);
    let c = p.z.clamp(-1.0, 1.0);
    let (r1, r2) = (((1.0 + c) / 2.0).sqrt(), ((1.0 - c) / 2.0).sqrt());
    let (a, b) = (theta + phase, theta);
    (
        Vector4::new(r1 * a.cos(), r1 * a.sin(), r2 * b.cos(), r2 * b.sin()),
        Vector4::new(-r1 * a.sin(), r1 * a.cos(), -r2 * b.sin(), r2 * b.cos()),
    )
}

fn unit(p: [f64; 3]) -> Result<Vector3<f64>> {
    let v = Vector3::from(p);
    let n = v.norm();
    if !n.is_finite() || n < 1e-12 {
        return Err(HopfError::Precondition(format!(
            "{p:?} is not a point of S^2"
        )));
    }
    Ok(v / n)
}

/// A point of `S^2` far from both `a` and `b`.
fn third_value(a: &Vector3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    let mut candidates = Vec::with_capacity(14);
    for i in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = Vector3::zeros();
            v[i] = s;
            candidates.push(v);
        }
    }
    for bits in 0..8 {
        let v = Vector3::new(
            if bits & 1 == 0 { 1.0 } else { -1.0 },
            if bits & 2 == 0 { 1.0 } else { -1.0 },
            if bits & 4 == 0 { 1.0 } else { -1.0 },
        );
        candidates.push(v.normalize());
    }
    candidates
        .into_iter()
        .max_by(|u, v| {
            let du = (u - a).norm().min((u - b).norm());
            let dv = (v - a).norm().min((v - b).norm());
            du.total_cmp(&dv)
        })
        .expect("non-empty")
}

/// Orthonormal `u_1, u_2, u_3` spanning the complement of `pole`, with
/// `det[u_1, u_2, u_3, pole] = 1`.
fn complement_basis(pole: &Vector4<f64>) -> [Vector4<f64>; 3] {
    let mut basis: Vec<Vector4<f64>> = Vec::with_capacity(3);
    for i in 0..4 {
        let mut v = Vector4::zeros();
        v[i] = 1.0;
        v -= pole * pole.dot(&v);
        for u in &basis {
            v -= u * u.dot(&v);
        }
        if v.norm() > 0.5 && basis.len() < 3 {
            basis.push(v.normalize());
        }
    }
    let det = Matrix4::from_columns(&[basis[0], basis[1], basis[2], *pole]).determinant();
    if det < 0.0 {
        basis[2] = -basis[2];
    }
    [basis[0], basis[1], basis[2]]
}

/// Linking number of the Hopf fibers over two distinct points of `S^2`.
///
/// Both fibers are mapped to `R^3` by stereographic projection from a point
/// on a third fiber, which preserves orientation, and the Gauss integral is
/// evaluated by the trapezoid rule (spectrally accurate for these periodic
/// integrands). The result is rounded and returned when it lies within
/// [`ORACLE_TOL`] of an integer.
pub fn linking_oracle(value_a: [f64; 3], value_b: [f64; 3]) -> Result<i64> {
    let a = unit(value_a)?;
    let b = unit(value_b)?;
    let gap = (a - b).norm();
    if gap < 1e-9 {
        return Err(HopfError::Precondition(
            "linking oracle needs two distinct values".into(),
        ));
    }
    let (pole, _) = fiber(&third_value(&a, &b), 0.0);
    let basis = complement_basis(&pole);
    let project = |x: &Vector4<f64>, dx: &Vector4<f64>| {
        let d = 1.0 - x.dot(&pole);
        let dd = -dx.dot(&pole);
        let mut y = Vector3::zeros();
        let mut dy = Vector3::zeros();
        for i in 0..3 {
            let xi = x.dot(&basis[i]);
            y[i] = xi / d;
            dy[i] = dx.dot(&basis[i]) / d - xi * dd / (d * d);
        }
        (y, dy)
    };
    // fibers of nearby values are close; resolve their separation
    let n = ((40.0 / gap).ceil() as usize).clamp(400, 4000);
    let sample = |p: &Vector3<f64>| -> Vec<(Vector3<f64>, Vector3<f64>)> {
        (0..n)
            .map(|i| {
                let (x, dx) = fiber(p, TAU * i as f64 / n as f64);
                project(&x, &dx)
            })
            .collect()
    };
    let ca = sample(&a);
    let cb = sample(&b);
    let mut total = 0.0;
    for (ya, dya) in &ca {
        for (yb, dyb) in &cb {
            let diff = ya - yb;
            let r = diff.norm();
            total += diff.dot(&dya.cross(dyb)) / (r * r * r);
        }
    }
    let h = TAU / n as f64;
    let value = total * h * h / (4.0 * PI);
    let rounded = value.round();
    let distance = (value - rounded).abs();
    if !value.is_finite() || distance > ORACLE_TOL {
        return Err(HopfError::OracleInconclusive { value, distance });
    }
    Ok(rounded as i64)
}
