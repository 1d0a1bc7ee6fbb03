use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::analysis::{contact_check, ContactReport};
use crate::dec::build_circle_mesh;
use crate::error::{HopfError, Result};
use crate::heisenberg::{lift_curve_with_parameters, HorizontalCurve};
use crate::hopf::SampledMap;

/// Horizontal lift to `H_1` of the figure-eight `s -> (sin s, sin s cos s)`,
/// `s in [0, 2 pi]`, starting at height 0.
///
/// The two lobes enclose opposite signed areas, so the lift closes up, while
/// the two passes through the planar crossing sit at heights that differ by
/// four times the area of one lobe.
pub fn figure_eight_embedding(samples: usize) -> Result<HorizontalCurve> {
    if samples < 8 {
        return Err(HopfError::TooFewSamples {
            needed: 8,
            got: samples,
        });
    }
    let params: Vec<f64> = (0..samples)
        .map(|i| TAU * i as f64 / (samples - 1) as f64)
        .collect();
    let base: Vec<Vec<f64>> = params
        .iter()
        .map(|&s| vec![s.sin(), s.sin() * s.cos()])
        .collect();
    lift_curve_with_parameters(&base, &params, 0.0)
}

/// Height at parameter `s` by linear interpolation between samples.
fn height_at(curve: &HorizontalCurve, s: f64) -> f64 {
    let p = curve.parameter_values();
    let t = curve.t_samples();
    let i = p.partition_point(|&x| x <= s).clamp(1, p.len() - 1);
    let w = (s - p[i - 1]) / (p[i] - p[i - 1]);
    t[i - 1] + w * (t[i] - t[i - 1])
}

/// `|t(pi) - t(0)|`: vertical separation of the two points over the crossing.
pub fn injectivity_margin(curve: &HorizontalCurve) -> f64 {
    (height_at(curve, PI) - height_at(curve, 0.0)).abs()
}

/// The figure-eight lift sampled on a circle mesh with `segments` edges,
/// vertex `i` at angle `2 pi i / segments`, as a map into `H_1`.
pub fn figure_eight_on_circle(segments: usize, oversample: usize) -> Result<SampledMap> {
    let mesh = Arc::new(build_circle_mesh(segments)?);
    let fine = figure_eight_embedding(segments * oversample.max(1) + 1)?;
    let step = oversample.max(1);
    let values: Vec<f64> = (0..segments)
        .flat_map(|i| {
            let p = fine.point(i * step);
            [p.x(0), p.y(0), p.t()]
        })
        .collect();
    SampledMap::from_values(mesh, 3, values)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub contact: ContactReport,
    /// Smallest distance between values at distinct vertices.
    pub min_separation: f64,
}

#[derive(Clone, Debug)]
pub struct ValidatedEmbedding {
    pub map: SampledMap,
    pub report: EmbeddingReport,
}

/// Validate user-supplied values of a map `S^2 -> H_2 = R^5`: the contact
/// residual must stay below `contact_tol`, and no two vertices may share a
/// value up to `separation_tol`.
pub fn sphere2_embedding_into_h2(
    map: SampledMap,
    contact_tol: f64,
    separation_tol: f64,
) -> Result<ValidatedEmbedding> {
    if map.mesh().dim() != 2 {
        return Err(HopfError::Precondition(format!(
            "expected a triangulated 2-sphere, got a {}-complex",
            map.mesh().dim()
        )));
    }
    if map.codim() != 5 {
        return Err(HopfError::DimensionMismatch {
            expected: 5,
            found: map.codim(),
        });
    }
    let contact = contact_check(&map, 2.0)?;
    if contact.max_residual > contact_tol {
        return Err(HopfError::NonHorizontal {
            residual: contact.max_residual,
            tol: contact_tol,
        });
    }
    let nv = map.mesh().vertex_count();
    let mut min_separation = f64::INFINITY;
    let mut duplicates = 0;
    for a in 0..nv {
        for b in a + 1..nv {
            let d = map
                .value(a)
                .iter()
                .zip(map.value(b))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            min_separation = min_separation.min(d);
            if d <= separation_tol {
                duplicates += 1;
            }
        }
    }
    if duplicates > 0 {
        return Err(HopfError::NotInjective { duplicates });
    }
    Ok(ValidatedEmbedding {
        map,
        report: EmbeddingReport {
            contact,
            min_separation,
        },
    })
}
