//! Upper and lower estimates for the Carnot-Caratheodory distance.
//!
//! The upper estimate optimizes over a family of explicit horizontal curves:
//! a planar polyline from `z_p` to `z_q` with `K` free interior vertices,
//! followed by a circular loop at `z_q`. Lifting the polyline fixes the height
//! it reaches; the loop encloses exactly the signed area still needed to reach
//! `t_q`, so every candidate joins `p` to `q` and the problem is unconstrained.
//! A loop enclosing area `A` raises `t` by `4A` and has length `sqrt(4 pi A)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{group_inv, group_mul, HeisPoint};
use crate::error::{HopfError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CcBudget {
    /// Free interior vertices of the planar polyline.
    pub interior_vertices: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once the relative improvement per iteration stays below this.
    pub relative_tolerance: f64,
    pub seed: u64,
}

impl Default for CcBudget {
    fn default() -> Self {
        Self {
            interior_vertices: 8,
            restarts: 6,
            max_iterations: 4000,
            relative_tolerance: 1e-6,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricReport {
    /// Length of the best horizontal curve found.
    pub distance_upper: f64,
    /// `|z_p - z_q|`: projecting to the plane does not increase horizontal length.
    pub lower_bound: f64,
    /// `sqrt(pi |tau|) / 2` where `tau` is the height of `p^{-1} * q`.
    pub isoperimetric_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MetricReport {
    /// Largest certified lower bound available.
    pub fn certified_lower(&self) -> f64 {
        self.lower_bound.max(self.isoperimetric_bound)
    }
}

/// Lower bound from the isoperimetric inequality.
///
/// A horizontal curve of length `L` from `0` to `(w, tau)` projects to a planar
/// path that, closed by the radial segment back to `0`, has length at most `2L`
/// and encloses signed area `-tau / 4`; hence `|tau| <= 4 L^2 / pi`.
pub fn isoperimetric_lower_bound(p: &HeisPoint, q: &HeisPoint) -> Result<f64> {
    let rel = group_mul(&group_inv(p), q)?;
    Ok((PI * rel.t().abs()).sqrt() / 2.0)
}

struct PathProblem {
    start: Vec<f64>,
    end: Vec<f64>,
    gap: f64,
    k: usize,
    width: usize,
}

impl PathProblem {
    fn vertex<'a>(&'a self, x: &'a [f64], i: usize) -> &'a [f64] {
        if i == 0 {
            &self.start
        } else if i == self.k + 1 {
            &self.end
        } else {
            &x[(i - 1) * self.width..i * self.width]
        }
    }

    /// Height gained by lifting the polyline through `x`.
    fn lifted_rise(&self, x: &[f64]) -> f64 {
        (0..=self.k)
            .map(|i| rise(self.vertex(x, i), self.vertex(x, i + 1)))
            .sum()
    }

    /// Exact length of the realized curve.
    fn length(&self, x: &[f64]) -> f64 {
        let poly: f64 = (0..=self.k)
            .map(|i| norm_diff(self.vertex(x, i), self.vertex(x, i + 1)))
            .sum();
        let residual = self.gap - self.lifted_rise(x);
        poly + (PI * residual.abs()).sqrt()
    }

    /// Smoothed objective and gradient.
    fn smooth(&self, x: &[f64]) -> (f64, Vec<f64>) {
        const EPS: f64 = 1e-10;
        let mut grad = vec![0.0; x.len()];
        let mut value = 0.0;
        for i in 0..=self.k {
            let a = self.vertex(x, i);
            let b = self.vertex(x, i + 1);
            let d2: f64 = a.iter().zip(b).map(|(u, v)| (v - u) * (v - u)).sum();
            let len = (d2 + EPS * EPS).sqrt();
            value += len;
            for c in 0..self.width {
                let g = (b[c] - a[c]) / len;
                if i >= 1 {
                    grad[(i - 1) * self.width + c] -= g;
                }
                if i < self.k {
                    grad[i * self.width + c] += g;
                }
            }
        }
        let residual = self.gap - self.lifted_rise(x);
        let smooth_abs = (residual * residual + EPS * EPS).sqrt();
        value += (PI * smooth_abs).sqrt();
        // d/dr sqrt(pi |r|) with |r| smoothed
        let dres = 0.5 * (PI / smooth_abs).sqrt() * residual / smooth_abs;
        for i in 1..=self.k {
            let prev = self.vertex(x, i - 1);
            let next = self.vertex(x, i + 1);
            for j in 0..self.width / 2 {
                // derivative of the lifted rise wrt (x_i, y_i)
                let drx = 2.0 * (prev[2 * j + 1] - next[2 * j + 1]);
                let dry = 2.0 * (next[2 * j] - prev[2 * j]);
                grad[(i - 1) * self.width + 2 * j] -= dres * drx;
                grad[(i - 1) * self.width + 2 * j + 1] -= dres * dry;
            }
        }
        (value, grad)
    }
}

/// `2 sum_j (y_a x_b - x_a y_b)`, the height gained along the segment `a -> b`.
fn rise(a: &[f64], b: &[f64]) -> f64 {
    2.0 * a
        .chunks_exact(2)
        .zip(b.chunks_exact(2))
        .map(|(u, v)| u[1] * v[0] - u[0] * v[1])
        .sum::<f64>()
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

struct Outcome {
    length: f64,
    iterations: usize,
    converged: bool,
}

/// BFGS with Armijo backtracking on the smoothed objective.
fn minimize(problem: &PathProblem, x0: Vec<f64>, budget: &CcBudget) -> Outcome {
    let dim = x0.len();
    if dim == 0 {
        return Outcome {
            length: problem.length(&x0),
            iterations: 0,
            converged: true,
        };
    }
    let mut x = DVector::from_vec(x0);
    let (mut f, g) = problem.smooth(x.as_slice());
    let mut g = DVector::from_vec(g);
    let mut h = DMatrix::<f64>::identity(dim, dim);
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..budget.max_iterations {
        iterations = it + 1;
        if g.norm() < 1e-13 {
            converged = true;
            break;
        }
        let mut dir = -(&h * &g);
        if dir.dot(&g) >= 0.0 {
            h = DMatrix::identity(dim, dim);
            dir = -g.clone();
        }
        let slope = dir.dot(&g);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + &dir * step;
            let (ft, gt) = problem.smooth(trial.as_slice());
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, DVector::from_vec(gt)));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            // no descent possible along any scaled direction
            converged = true;
            break;
        };
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-16 * s.norm() * y.norm() && sy > 0.0 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        } else {
            h = DMatrix::identity(dim, dim);
        }
        let improvement = (f - fnew) / f.abs().max(1e-300);
        x = xn;
        f = fnew;
        g = gn;
        if improvement < budget.relative_tolerance {
            quiet += 1;
            if quiet >= 3 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Outcome {
        length: problem.length(x.as_slice()),
        iterations,
        converged,
    }
}

/// Estimate `d_cc(p, q)` from above by optimized horizontal curves and from
/// below by certified bounds.
pub fn cc_distance(p: &HeisPoint, q: &HeisPoint, budget: &CcBudget) -> Result<MetricReport> {
    if p.n() != q.n() {
        return Err(HopfError::DimensionMismatch {
            expected: 2 * p.n() + 1,
            found: 2 * q.n() + 1,
        });
    }
    let lower_bound = p.planar_distance(q);
    let isoperimetric_bound = isoperimetric_lower_bound(p, q)?;
    if p == q {
        return Ok(MetricReport {
            distance_upper: 0.0,
            lower_bound: 0.0,
            isoperimetric_bound: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let width = 2 * p.n();
    let k = budget.interior_vertices;
    let problem = PathProblem {
        start: p.z().to_vec(),
        end: q.z().to_vec(),
        gap: q.t() - p.t(),
        k,
        width,
    };
    let scale = lower_bound + (q.t() - p.t()).abs().sqrt() + 1e-3;
    let restarts = budget.restarts.max(1);
    let outcomes: Vec<Outcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(r as u64));
            let mut x0 = Vec::with_capacity(k * width);
            for i in 1..=k {
                let s = i as f64 / (k + 1) as f64;
                for c in 0..width {
                    let straight = (1.0 - s) * problem.start[c] + s * problem.end[c];
                    let jitter = if r == 0 {
                        0.0
                    } else {
                        0.5 * scale * rng.gen_range(-1.0..1.0)
                    };
                    x0.push(straight + jitter);
                }
            }
            minimize(&problem, x0, budget)
        })
        .collect();
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let best = outcomes
        .iter()
        .min_by(|a, b| a.length.total_cmp(&b.length))
        .expect("at least one restart");
    Ok(MetricReport {
        distance_upper: best.length.max(lower_bound),
        lower_bound,
        isoperimetric_bound,
        iterations,
        converged: best.converged,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricComparison {
    /// Smallest `C` with `|p - q| / C <= d_cc` on the sample (via certified lower bounds).
    pub c_lower: f64,
    /// Smallest `C` with `d_cc <= C |p - q|^{1/2}` on the sample (via upper estimates).
    pub c_upper: f64,
    pub pairs: usize,
    pub all_converged: bool,
}

/// Empirical constants in `|p-q| / C <= d_cc(p,q) <= C |p-q|^{1/2}` over a
/// sample of pairs whose coordinates all lie in `[lo, hi]`.
pub fn metric_comparison_check(
    pairs: &[(HeisPoint, HeisPoint)],
    bounds: (f64, f64),
    budget: &CcBudget,
) -> Result<MetricComparison> {
    if pairs.is_empty() {
        return Err(HopfError::EmptySample);
    }
    let (lo, hi) = bounds;
    for (p, q) in pairs {
        if p.coords()
            .iter()
            .chain(q.coords().iter())
            .any(|c| *c < lo || *c > hi)
        {
            return Err(HopfError::Precondition(format!(
                "pair outside the declared box [{lo}, {hi}]"
            )));
        }
    }
    let reports: Vec<Result<(f64, MetricReport)>> = pairs
        .par_iter()
        .map(|(p, q)| Ok((p.euclidean_distance(q), cc_distance(p, q, budget)?)))
        .collect();
    let mut c_lower: f64 = 0.0;
    let mut c_upper: f64 = 0.0;
    let mut all_converged = true;
    for r in reports {
        let (euclid, report) = r?;
        all_converged &= report.converged;
        if euclid == 0.0 {
            continue;
        }
        c_lower = c_lower.max(euclid / report.certified_lower());
        c_upper = c_upper.max(report.distance_upper / euclid.sqrt());
    }
    Ok(MetricComparison {
        c_lower,
        c_upper,
        pairs: pairs.len(),
        all_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_point_is_zero() {
        let p = HeisPoint::h1(0.4, -0.1, 0.3);
        let r = cc_distance(&p, &p, &CcBudget::default()).unwrap();
        assert_eq!(r.distance_upper, 0.0);
        assert_eq!(r.lower_bound, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn planar_unit_step() {
        let r = cc_distance(
            &HeisPoint::identity(1),
            &HeisPoint::h1(1.0, 0.0, 0.0),
            &CcBudget::default(),
        )
        .unwrap();
        assert_eq!(r.lower_bound, 1.0);
        assert!(r.distance_upper >= r.lower_bound);
        assert!((r.distance_upper - 1.0).abs() <= 0.01);
    }

    #[test]
    fn vertical_unit_step() {
        let r = cc_distance(
            &HeisPoint::identity(1),
            &HeisPoint::h1(0.0, 0.0, 1.0),
            &CcBudget::default(),
        )
        .unwrap();
        assert_eq!(r.lower_bound, 0.0);
        assert!(r.distance_upper.is_finite());
        // a single circle enclosing area 1/4 is optimal for a vertical step
        assert!((r.distance_upper - PI.sqrt()).abs() < 1e-6);
        assert!((r.isoperimetric_bound - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_mixed_groups() {
        let r = cc_distance(
            &HeisPoint::identity(1),
            &HeisPoint::identity(2),
            &CcBudget::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn comparison_needs_pairs() {
        assert!(matches!(
            metric_comparison_check(&[], (0.0, 1.0), &CcBudget::default()),
            Err(HopfError::EmptySample)
        ));
    }

    #[test]
    fn comparison_z_only_pairs() {
        let pairs = vec![
            (HeisPoint::h1(0.0, 0.0, 0.5), HeisPoint::h1(0.5, 0.0, 0.5)),
            (HeisPoint::h1(0.2, 0.1, 0.0), HeisPoint::h1(0.2, 0.9, 0.0)),
            (HeisPoint::h1(0.3, 0.3, 0.3), HeisPoint::h1(0.3, 0.3, 0.3)),
        ];
        let c = metric_comparison_check(&pairs, (0.0, 1.0), &CcBudget::default()).unwrap();
        assert!(c.c_lower.is_finite() && c.c_lower >= 1.0);
        assert!(c.c_upper.is_finite() && c.c_upper > 0.0);
    }
}
