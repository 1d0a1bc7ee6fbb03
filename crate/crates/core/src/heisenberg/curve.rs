use serde::{Deserialize, Serialize};

use super::{contact_value, HeisPoint};
use crate::error::{HopfError, Result};

/// A horizontal polyline in `H_n`: a planar path together with its lifted
/// vertical coordinate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HorizontalCurve {
    base_samples: Vec<Vec<f64>>,
    t0: f64,
    t_samples: Vec<f64>,
    parameter_values: Vec<f64>,
}

impl HorizontalCurve {
    pub fn base_samples(&self) -> &[Vec<f64>] {
        &self.base_samples
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_samples(&self) -> &[f64] {
        &self.t_samples
    }

    pub fn parameter_values(&self) -> &[f64] {
        &self.parameter_values
    }

    pub fn len(&self) -> usize {
        self.t_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_samples.is_empty()
    }

    pub fn n(&self) -> usize {
        self.base_samples[0].len() / 2
    }

    pub fn point(&self, i: usize) -> HeisPoint {
        HeisPoint::new(self.base_samples[i].clone(), self.t_samples[i])
            .expect("lifted samples are finite")
    }

    /// Total vertical displacement `t_last - t_first`.
    pub fn vertical_gap(&self) -> f64 {
        self.t_samples[self.t_samples.len() - 1] - self.t0
    }

    /// Euclidean length of the planar projection.
    pub fn planar_length(&self) -> f64 {
        self.base_samples
            .windows(2)
            .map(|w| dist(&w[0], &w[1]))
            .sum()
    }

    /// Largest contact residual `|alpha(mid)(chord)| / |chord|` over the segments,
    /// evaluated at segment midpoints.
    pub fn contact_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() - 1 {
            let (mid, chord) = self.segment(i);
            let norm = chord.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.0 {
                worst = worst.max(contact_value(&mid, &chord).abs() / norm);
            }
        }
        worst
    }

    /// Midpoint horizontal coordinates and full chord of segment `i`.
    fn segment(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let a = &self.base_samples[i];
        let b = &self.base_samples[i + 1];
        let mid: Vec<f64> = a.iter().zip(b).map(|(u, v)| 0.5 * (u + v)).collect();
        let mut chord: Vec<f64> = a.iter().zip(b).map(|(u, v)| v - u).collect();
        chord.push(self.t_samples[i + 1] - self.t_samples[i]);
        (mid, chord)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

/// Lift a planar path to a horizontal curve starting at height `t0`.
///
/// The vertical increments integrate `t' = 2 sum_j (y_j x_j' - x_j y_j')` by the
/// trapezoid rule, which is exact on every straight segment of the polyline.
pub fn lift_curve(base: &[Vec<f64>], t0: f64) -> Result<HorizontalCurve> {
    let params: Vec<f64> = (0..base.len()).map(|i| i as f64).collect();
    lift_curve_with_parameters(base, &params, t0)
}

pub fn lift_curve_with_parameters(
    base: &[Vec<f64>],
    parameter_values: &[f64],
    t0: f64,
) -> Result<HorizontalCurve> {
    if base.len() < 2 {
        return Err(HopfError::TooFewSamples {
            needed: 2,
            got: base.len(),
        });
    }
    let width = base[0].len();
    if width == 0 || !width.is_multiple_of(2) {
        return Err(HopfError::Precondition(format!(
            "planar samples must have even positive dimension, got {width}"
        )));
    }
    if let Some(bad) = base.iter().find(|s| s.len() != width) {
        return Err(HopfError::DimensionMismatch {
            expected: width,
            found: bad.len(),
        });
    }
    if parameter_values.len() != base.len() {
        return Err(HopfError::DimensionMismatch {
            expected: base.len(),
            found: parameter_values.len(),
        });
    }
    if parameter_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HopfError::Precondition(
            "parameter values must be strictly increasing".into(),
        ));
    }

    let mut t_samples = Vec::with_capacity(base.len());
    t_samples.push(t0);
    let mut t = t0;
    for w in base.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let mut dt = 0.0;
        for j in 0..width / 2 {
            let (xa, ya, xb, yb) = (a[2 * j], a[2 * j + 1], b[2 * j], b[2 * j + 1]);
            // trapezoid of y dx - x dy over the segment
            dt += (ya + yb) * (xb - xa) - (xa + xb) * (yb - ya);
        }
        t += dt;
        t_samples.push(t);
    }
    Ok(HorizontalCurve {
        base_samples: base.to_vec(),
        t0,
        t_samples,
        parameter_values: parameter_values.to_vec(),
    })
}

/// Sub-Riemannian length: the horizontal norm of each chord measured in the
/// frame at the segment midpoint.
pub fn cc_length(curve: &HorizontalCurve) -> f64 {
    let mut total = 0.0;
    for i in 0..curve.len() - 1 {
        let (mid, chord) = curve.segment(i);
        let n2 = mid.len();
        // frame coefficients: a_j = dx_j, b_j = dy_j; the T coefficient is the
        // contact residual, zero for a lifted polyline
        debug_assert!(
            contact_value(&mid, &chord).abs()
                <= 1e-9 * (1.0 + chord.iter().map(|c| c.abs()).sum::<f64>())
        );
        total += chord[..n2].iter().map(|c| c * c).sum::<f64>().sqrt();
    }
    total
}
