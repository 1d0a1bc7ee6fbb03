use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::form::FormSpec;
use super::invariant::{hopf_scaled, hopf_with, pullback, HopfOptions, HopfReport};
use super::sampled::SampledMap;
use crate::dec::ConeMesh;
use crate::error::{HopfError, Result};

/// Fixed precision of every float written to CSV.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.12}")
}

fn write_provenance<W: Write>(out: &mut W, provenance: Option<&str>) -> Result<()> {
    if let Some(line) = provenance {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out)
}

#[derive(Clone, Debug)]
pub struct HomotopySweep {
    pub times: Vec<f64>,
    pub maps: Vec<SampledMap>,
    pub reports: Vec<HopfReport>,
    pub values: Vec<f64>,
    pub max_deviation: f64,
}

/// Hopf invariant along a family `f_t`; every member must pass the
/// closedness gate.
pub fn homotopy_sweep(
    family: Vec<(f64, SampledMap)>,
    alpha: &FormSpec,
    opts: &HopfOptions,
) -> Result<HomotopySweep> {
    if family.is_empty() {
        return Err(HopfError::EmptySample);
    }
    if family.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(HopfError::Precondition("sweep times must be sorted".into()));
    }
    let opts = HopfOptions {
        oracle: false,
        ..opts.clone()
    };
    let results: Vec<Result<HopfReport>> = family
        .par_iter()
        .map(|(_, f)| hopf_with(f, alpha, &opts))
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    for ((t, _), r) in family.iter().zip(results) {
        match r {
            Ok(rep) => reports.push(rep),
            Err(HopfError::NotClosed { residual, budget }) => {
                return Err(HopfError::SweepAborted {
                    t: *t,
                    residual,
                    budget,
                })
            }
            Err(e) => return Err(e),
        }
    }
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let max_deviation = values
        .iter()
        .map(|v| (v - values[0]).abs())
        .fold(0.0, f64::max);
    let (times, maps) = family.into_iter().unzip();
    Ok(HomotopySweep {
        times,
        maps,
        reports,
        values,
        max_deviation,
    })
}

impl HomotopySweep {
    /// Columns `t, value, deviation, closedness_residual, primitive_residual`.
    pub fn write_csv<W: Write>(&self, mut out: W, provenance: Option<&str>) -> Result<()> {
        write_provenance(&mut out, provenance)?;
        let mut w = csv_writer(out);
        w.write_record([
            "t",
            "value",
            "deviation",
            "closedness_residual",
            "primitive_residual",
        ])?;
        for (t, r) in self.times.iter().zip(&self.reports) {
            w.write_record([
                fmt_float(*t),
                fmt_float(r.value),
                fmt_float((r.value - self.values[0]).abs()),
                fmt_float(r.closedness_residual),
                fmt_float(r.primitive_residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialRow {
    pub requested_radius: f64,
    pub ring: usize,
    pub radius: f64,
    pub report: HopfReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialSweep {
    pub rows: Vec<RadialRow>,
    /// Largest pairwise difference of the values.
    pub spread: f64,
}

/// Hopf invariant of `x -> f(r x)` for each requested radius.
pub fn radial_sweep(
    f_on_ball: &SampledMap,
    cone: &ConeMesh,
    radii: &[f64],
    alpha: &FormSpec,
    opts: &HopfOptions,
) -> Result<RadialSweep> {
    if radii.is_empty() {
        return Err(HopfError::EmptySample);
    }
    let rows: Result<Vec<RadialRow>> = radii
        .par_iter()
        .map(|&r| {
            let report = hopf_scaled(f_on_ball, cone, r, alpha, opts)?;
            let (ring, _) = cone.nearest_ring(r);
            Ok(RadialRow {
                requested_radius: r,
                ring,
                radius: cone.ring_radius(ring),
                report,
            })
        })
        .collect();
    let rows = rows?;
    let values: Vec<f64> = rows.iter().map(|r| r.report.value).collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RadialSweep {
        rows,
        spread: hi - lo,
    })
}

impl RadialSweep {
    /// Columns `r, ring, ring_radius, value, closedness_residual, primitive_residual`.
    pub fn write_csv<W: Write>(&self, mut out: W, provenance: Option<&str>) -> Result<()> {
        write_provenance(&mut out, provenance)?;
        let mut w = csv_writer(out);
        w.write_record([
            "r",
            "ring",
            "ring_radius",
            "value",
            "closedness_residual",
            "primitive_residual",
        ])?;
        for row in &self.rows {
            w.write_record([
                fmt_float(row.requested_radius),
                row.ring.to_string(),
                fmt_float(row.radius),
                fmt_float(row.report.value),
                fmt_float(row.report.closedness_residual),
                fmt_float(row.report.primitive_residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: usize,
    /// `|g_k* alpha - g* alpha|` in the discrete `L^p` norm.
    pub pullback_difference: f64,
    pub hi_difference: f64,
    /// `|g_k* alpha|_p + |g* alpha|_p`.
    pub pullback_norm_sum: f64,
    /// `hi_difference / (pullback_norm_sum * pullback_difference)`, the
    /// constant the bilinear estimate needs for this row; absent when the
    /// pullbacks agree to roundoff.
    pub bound_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub p: f64,
    pub hi_limit: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Smallest admissible exponent for a `(4n-1)`-dimensional domain.
pub fn minimal_exponent(n: usize) -> f64 {
    2.0 - 1.0 / (2.0 * n as f64)
}

/// Compare `g_k` against `g` in pullback norm and Hopf invariant. Row `k` is
/// 1-based.
pub fn convergence_experiment(
    g_seq: &[SampledMap],
    g: &SampledMap,
    alpha: &FormSpec,
    p: f64,
    opts: &HopfOptions,
) -> Result<ConvergenceTable> {
    let n = alpha.degree() / 2;
    if n == 0 || p < minimal_exponent(n) {
        return Err(HopfError::Precondition(format!(
            "exponent {p} below the admissible {}",
            minimal_exponent(n.max(1))
        )));
    }
    let opts = HopfOptions {
        oracle: false,
        gauge_trials: 0,
        ..opts.clone()
    };
    let limit_eta = pullback(g, alpha)?;
    let hi_limit = hopf_with(g, alpha, &opts)?.value;
    let rows: Result<Vec<ConvergenceRow>> = g_seq
        .par_iter()
        .enumerate()
        .map(|(i, gk)| {
            if gk.mesh().vertex_count() != g.mesh().vertex_count() {
                return Err(HopfError::ComplexMismatch);
            }
            let eta = pullback(gk, alpha)?;
            let eta = crate::dec::Cochain::from_values(
                limit_eta.complex().clone(),
                eta.degree(),
                eta.into_values(),
            )?;
            let pullback_difference = eta.add_scaled(&limit_eta, -1.0)?.lp_norm(p);
            let hi = hopf_with(gk, alpha, &opts)?.value;
            let hi_difference = (hi - hi_limit).abs();
            let pullback_norm_sum = eta.lp_norm(p) + limit_eta.lp_norm(p);
            let denom = pullback_norm_sum * pullback_difference;
            // below roundoff the ratio carries no information
            let resolved = pullback_difference > 1e-12 * pullback_norm_sum;
            Ok(ConvergenceRow {
                k: i + 1,
                pullback_difference,
                hi_difference,
                pullback_norm_sum,
                bound_ratio: resolved.then(|| hi_difference / denom),
            })
        })
        .collect();
    Ok(ConvergenceTable {
        p,
        hi_limit,
        rows: rows?,
    })
}

impl ConvergenceTable {
    /// Columns `k, pullback_difference, hi_difference, pullback_norm_sum, bound_ratio`.
    pub fn write_csv<W: Write>(&self, mut out: W, provenance: Option<&str>) -> Result<()> {
        write_provenance(&mut out, provenance)?;
        let mut w = csv_writer(out);
        w.write_record([
            "k",
            "pullback_difference",
            "hi_difference",
            "pullback_norm_sum",
            "bound_ratio",
        ])?;
        for row in &self.rows {
            w.write_record([
                row.k.to_string(),
                fmt_float(row.pullback_difference),
                fmt_float(row.hi_difference),
                fmt_float(row.pullback_norm_sum),
                row.bound_ratio.map(fmt_float).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Whether both difference columns are non-increasing, allowing
    /// fluctuations up to `floor`.
    pub fn is_monotone(&self, floor: f64) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].pullback_difference <= w[0].pullback_difference + floor
                && w[1].hi_difference <= w[0].hi_difference + floor
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dec::build_sphere3_mesh;
    use crate::maps::BuiltinMap;

    #[test]
    fn constant_family_is_zero() {
        let m = Arc::new(build_sphere3_mesh(1).unwrap());
        let family: Vec<(f64, SampledMap)> = (0..3)
            .map(|i| {
                let f = SampledMap::from_builtin(
                    m.clone(),
                    BuiltinMap::constant(vec![0.0, 0.0, 1.0], 4),
                )
                .unwrap();
                (i as f64 / 2.0, f)
            })
            .collect();
        let sweep =
            homotopy_sweep(family, &FormSpec::S2AreaExtended, &HopfOptions::default()).unwrap();
        assert!(sweep.values.iter().all(|v| *v == 0.0));
        assert_eq!(sweep.max_deviation, 0.0);
        let mut buf = Vec::new();
        sweep.write_csv(&mut buf, Some("config_hash=abc")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# config_hash=abc"));
        assert_eq!(
            lines.next(),
            Some("t,value,deviation,closedness_residual,primitive_residual")
        );
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn identical_sequence_gives_zero_rows() {
        let m = Arc::new(build_sphere3_mesh(1).unwrap());
        let g = SampledMap::from_builtin(m, BuiltinMap::hopf()).unwrap();
        let opts = HopfOptions {
            closedness_budget: None,
            ..Default::default()
        };
        let table = convergence_experiment(
            &[g.clone(), g.clone()],
            &g,
            &FormSpec::S2AreaExtended,
            2.0,
            &opts,
        )
        .unwrap();
        for row in &table.rows {
            assert_eq!(row.pullback_difference, 0.0);
            assert_eq!(row.hi_difference, 0.0);
            assert_eq!(row.bound_ratio, None);
        }
        assert!(table.is_monotone(0.0));
    }

    #[test]
    fn small_exponent_rejected() {
        let m = Arc::new(build_sphere3_mesh(0).unwrap());
        let g = SampledMap::from_builtin(m, BuiltinMap::hopf()).unwrap();
        let err = convergence_experiment(
            &[],
            &g,
            &FormSpec::S2AreaExtended,
            1.2,
            &HopfOptions::default(),
        );
        assert!(matches!(err, Err(HopfError::Precondition(_))));
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(-2.0), "-2.000000000000");
    }
}
