//! The experiments behind each command-line subcommand, callable as a library.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{
    cached_mesh_path, sphere3_mesh, ConvergenceFamily, ExperimentConfig, SweepKind,
};
use crate::dec::build_cone_mesh;
use crate::error::Result;
use crate::heisenberg::{
    cc_distance, metric_comparison_check, HeisPoint, MetricComparison, MetricReport,
};
use crate::hopf::{
    convergence_experiment, homotopy_sweep, hopf_with, radial_sweep, ConvergenceTable,
    HomotopySweep, HopfReport, RadialSweep, SampledMap,
};
use crate::maps::{
    contact_check, figure_eight_embedding, figure_eight_on_circle, injectivity_margin,
    radial_extension, rank_profile, rotation_homotopy, sphere_dilation, z_rotation,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshSummary {
    pub level: usize,
    pub path: PathBuf,
    pub f_vector: Vec<usize>,
    pub euler_characteristic: i64,
    pub mesh_size: f64,
    pub content_hash: String,
}

/// Write the level-`mesh_level` 3-sphere mesh to the configured output path,
/// else into `cache`, else to `s3_level{N}.json` in the working directory.
pub fn cmd_mesh(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<MeshSummary> {
    let mesh = sphere3_mesh(cfg.mesh_level, cache)?;
    let path = match (&cfg.output_path, cache) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => cached_mesh_path(dir, cfg.mesh_level),
        (None, None) => PathBuf::from(format!("s3_level{}.json", cfg.mesh_level)),
    };
    let file = mesh.to_file();
    file.write(&path)?;
    Ok(MeshSummary {
        level: cfg.mesh_level,
        path,
        f_vector: mesh.f_vector(),
        euler_characteristic: mesh.euler_characteristic(),
        mesh_size: mesh.mesh_size(),
        content_hash: file.content_hash(),
    })
}

fn resolve_map(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<SampledMap> {
    let mesh = sphere3_mesh(cfg.mesh_level, cache)?;
    cfg.map.resolve(mesh)
}

pub fn cmd_hopf(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<HopfReport> {
    let f = resolve_map(cfg, cache)?;
    hopf_with(&f, &cfg.form()?, &cfg.hopf_options())
}

#[derive(Clone, Debug)]
pub enum SweepOutcome {
    Rotation(HomotopySweep),
    Radial(RadialSweep),
}

impl SweepOutcome {
    /// Largest deviation from the first member (rotation) or pairwise spread (radial).
    pub fn spread(&self) -> f64 {
        match self {
            Self::Rotation(s) => s.max_deviation,
            Self::Radial(s) => s.spread,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W, provenance: Option<&str>) -> Result<()> {
        match self {
            Self::Rotation(s) => s.write_csv(out, provenance),
            Self::Radial(s) => s.write_csv(out, provenance),
        }
    }
}

pub fn cmd_sweep(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<SweepOutcome> {
    let alpha = cfg.form()?;
    let opts = cfg.hopf_options();
    match cfg.sweep.kind {
        SweepKind::Rotation => {
            let f = resolve_map(cfg, cache)?;
            let family = rotation_homotopy(&f, cfg.sweep.steps)?;
            Ok(SweepOutcome::Rotation(homotopy_sweep(
                family, &alpha, &opts,
            )?))
        }
        SweepKind::Radial => {
            let base = sphere3_mesh(cfg.mesh_level, cache)?;
            let cone = build_cone_mesh(base.clone(), cfg.sweep.layers)?;
            let f0 = cfg.map.resolve(base)?;
            let f = radial_extension(&f0, &cone)?;
            Ok(SweepOutcome::Radial(radial_sweep(
                &f,
                &cone,
                &cfg.sweep.radii,
                &alpha,
                &opts,
            )?))
        }
    }
}

/// The sequence `g_k`, `k = 1..=terms`, converging to `g`.
pub fn convergence_sequence(
    g: &SampledMap,
    family: ConvergenceFamily,
    terms: usize,
) -> Result<Vec<SampledMap>> {
    (1..=terms)
        .map(|k| {
            let s = 1.0 / k as f64;
            match family {
                ConvergenceFamily::Rotation => {
                    let r = z_rotation(s);
                    g.post_compose(&nalgebra::DMatrix::from_fn(3, 3, |i, j| r[i][j]))
                }
                ConvergenceFamily::Dilation => sphere_dilation(g, 1.0 + s),
            }
        })
        .collect()
}

pub fn cmd_convergence(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<ConvergenceTable> {
    let g = resolve_map(cfg, cache)?;
    let seq = convergence_sequence(&g, cfg.convergence.family, cfg.convergence.terms)?;
    convergence_experiment(&seq, &g, &cfg.form()?, cfg.p_exponent, &cfg.hopf_options())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FigureEightSummary {
    pub segments: usize,
    pub max_contact_residual: f64,
    pub mean_contact_residual: f64,
    pub max_rank: usize,
    /// Vertical gap between the two passes over the planar crossing.
    pub injectivity_margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankSummary {
    pub map: String,
    pub level: usize,
    pub tol_relative: f64,
    pub histogram: Vec<usize>,
    /// Volume fraction of each rank.
    pub fractions: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometryReport {
    pub identity_pair: MetricReport,
    pub planar_pair: MetricReport,
    pub vertical_pair: MetricReport,
    pub batches: Vec<MetricComparison>,
    /// Largest relative change of either constant from the first batch.
    pub batch_variation: f64,
    pub figure_eight: FigureEightSummary,
    pub rank: RankSummary,
}

impl GeometryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `count` random pairs in `H_1` with coordinates uniform in `[-w, w]`.
pub fn random_pairs(count: usize, w: f64, seed: u64) -> Vec<(HeisPoint, HeisPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        HeisPoint::h1(
            rng.gen_range(-w..=w),
            rng.gen_range(-w..=w),
            rng.gen_range(-w..=w),
        )
    };
    (0..count)
        .map(|_| (point(&mut rng), point(&mut rng)))
        .collect()
}

pub fn cmd_geometry(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<GeometryReport> {
    let g = &cfg.geometry;
    let budget = &g.budget;
    let p = HeisPoint::h1(0.3, -0.2, 0.5);
    let identity_pair = cc_distance(&p, &p, budget)?;
    let planar_pair = cc_distance(
        &HeisPoint::identity(1),
        &HeisPoint::h1(1.0, 0.0, 0.0),
        budget,
    )?;
    let vertical_pair = cc_distance(
        &HeisPoint::identity(1),
        &HeisPoint::h1(0.0, 0.0, 1.0),
        budget,
    )?;

    let w = g.half_width;
    let batches: Vec<MetricComparison> = (0..g.batches)
        .map(|b| {
            let pairs = random_pairs(g.pairs, w, cfg.seed.wrapping_add(b as u64));
            metric_comparison_check(&pairs, (-w, w), budget)
        })
        .collect::<Result<_>>()?;
    let first = &batches[0];
    let batch_variation = batches
        .iter()
        .map(|c| {
            ((c.c_lower - first.c_lower) / first.c_lower)
                .abs()
                .max(((c.c_upper - first.c_upper) / first.c_upper).abs())
        })
        .fold(0.0, f64::max);

    let segments = g.figure_eight_segments;
    let loop_map = figure_eight_on_circle(segments, 16)?;
    let contact = contact_check(&loop_map, cfg.p_exponent)?;
    let figure_eight = FigureEightSummary {
        segments,
        max_contact_residual: contact.max_residual,
        mean_contact_residual: contact.mean_residual,
        max_rank: rank_profile(&loop_map, cfg.tolerances.rank).max_rank(),
        injectivity_margin: injectivity_margin(&figure_eight_embedding(16 * segments + 1)?),
    };

    let f = resolve_map(cfg, cache)?;
    let profile = rank_profile(&f, cfg.tolerances.rank);
    let rank = RankSummary {
        map: cfg.map.name.clone(),
        level: cfg.mesh_level,
        tol_relative: profile.tol_relative,
        histogram: profile.histogram,
        fractions: profile.fractions,
    };
    Ok(GeometryReport {
        identity_pair,
        planar_pair,
        vertical_pair,
        batches,
        batch_variation,
        figure_eight,
        rank,
    })
}
