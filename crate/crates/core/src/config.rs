//! Experiment configuration, provenance hashing, and the on-disk mesh cache.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dec::{build_sphere3_mesh, MeshFile, SimplicialComplex};
use crate::error::{HopfError, Result};
use crate::heisenberg::CcBudget;
use crate::hopf::{minimal_exponent, FormSpec, HopfOptions, DEFAULT_CLOSEDNESS_BUDGET};
use crate::maps::{MapSpec, DEFAULT_RANK_TOL};

/// Environment variable naming the mesh cache directory.
pub const CACHE_ENV: &str = "HOPFDEC_CACHE";

/// Finest refinement level accepted from a configuration.
pub const MAX_LEVEL: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Mesh,
    Hopf,
    Sweep,
    Geometry,
    Convergence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub solver: f64,
    /// `None` turns the closedness gate off.
    pub closedness_budget: Option<f64>,
    pub rank: f64,
    pub gauge_trials: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: 1e-10,
            closedness_budget: Some(DEFAULT_CLOSEDNESS_BUDGET),
            rank: DEFAULT_RANK_TOL,
            gauge_trials: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// `t -> R_{t pi} . f`.
    Rotation,
    /// `x -> f(r x)` on the cone over the mesh.
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub kind: SweepKind,
    pub steps: usize,
    pub radii: Vec<f64>,
    pub layers: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            kind: SweepKind::Rotation,
            steps: 9,
            radii: vec![0.25, 0.5, 0.75],
            layers: 4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometrySettings {
    pub pairs: usize,
    pub batches: usize,
    /// Sample coordinates are drawn from `[-half_width, half_width]`.
    pub half_width: f64,
    pub budget: CcBudget,
    pub figure_eight_segments: usize,
}

impl Default for GeometrySettings {
    fn default() -> Self {
        Self {
            pairs: 100,
            batches: 2,
            half_width: 1.0,
            budget: CcBudget {
                restarts: 3,
                ..CcBudget::default()
            },
            figure_eight_segments: 256,
        }
    }
}

impl PartialEq for GeometrySettings {
    fn eq(&self, other: &Self) -> bool {
        serde_json::to_value(self).ok() == serde_json::to_value(other).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceFamily {
    /// `g_k = R_{1/k} . g`.
    Rotation,
    /// `g_k = D_{1 + 1/k} . g` with `D` a stereographic dilation.
    Dilation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceSettings {
    pub family: ConvergenceFamily,
    pub terms: usize,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        Self {
            family: ConvergenceFamily::Rotation,
            terms: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub mesh_level: usize,
    pub map: MapSpec,
    pub alpha: String,
    pub tolerances: Tolerances,
    pub p_exponent: f64,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub sweep: SweepSettings,
    pub geometry: GeometrySettings,
    pub convergence: ConvergenceSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: None,
            mesh_level: 3,
            map: MapSpec::named("hopf"),
            alpha: "s2_area_extended".into(),
            tolerances: Tolerances::default(),
            p_exponent: 2.0,
            seed: 0,
            output_path: None,
            sweep: SweepSettings::default(),
            geometry: GeometrySettings::default(),
            convergence: ConvergenceSettings::default(),
        }
    }
}

/// Scalar overrides taken from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub level: Option<usize>,
    pub map: Option<String>,
    pub alpha: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Apply command-line overrides. Naming a different map drops its
    /// configured parameters.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(c) = o.command {
            self.command = Some(c);
        }
        if let Some(l) = o.level {
            self.mesh_level = l;
        }
        if let Some(m) = &o.map {
            if *m != self.map.name {
                self.map = MapSpec::named(m);
            }
        }
        if let Some(a) = &o.alpha {
            self.alpha = a.clone();
        }
        if let Some(p) = &o.out {
            self.output_path = Some(p.clone());
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    pub fn form(&self) -> Result<FormSpec> {
        FormSpec::by_name(&self.alpha)
    }

    /// Check the fields the configured command needs.
    pub fn validate(&self) -> Result<()> {
        let command = self
            .command
            .ok_or_else(|| HopfError::Precondition("no command given".into()))?;
        if self.mesh_level > MAX_LEVEL {
            return Err(HopfError::Precondition(format!(
                "mesh_level {} exceeds {MAX_LEVEL}",
                self.mesh_level
            )));
        }
        let t = &self.tolerances;
        if !(t.solver > 0.0 && t.solver < 1.0) {
            return Err(HopfError::Precondition(format!(
                "solver tolerance {} not in (0, 1)",
                t.solver
            )));
        }
        if t.closedness_budget.is_some_and(|b| b.is_nan() || b <= 0.0) {
            return Err(HopfError::Precondition(
                "closedness budget must be positive".into(),
            ));
        }
        if !(t.rank > 0.0 && t.rank < 1.0) {
            return Err(HopfError::Precondition(format!(
                "rank tolerance {} not in (0, 1)",
                t.rank
            )));
        }
        match command {
            Command::Mesh => {}
            Command::Hopf => {
                self.form()?;
            }
            Command::Sweep => {
                self.form()?;
                let s = &self.sweep;
                match s.kind {
                    SweepKind::Rotation if s.steps == 0 => {
                        return Err(HopfError::Precondition(
                            "sweep needs at least one step".into(),
                        ))
                    }
                    SweepKind::Radial if s.layers == 0 || s.radii.is_empty() => {
                        return Err(HopfError::Precondition(
                            "radial sweep needs layers and radii".into(),
                        ))
                    }
                    SweepKind::Radial if s.radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) => {
                        return Err(HopfError::Precondition("radii must lie in (0, 1]".into()))
                    }
                    _ => {}
                }
            }
            Command::Geometry => {
                let g = &self.geometry;
                if g.pairs == 0 || g.batches == 0 {
                    return Err(HopfError::Precondition(
                        "geometry needs pairs and batches".into(),
                    ));
                }
                if !(g.half_width > 0.0 && g.half_width.is_finite()) {
                    return Err(HopfError::Precondition(
                        "half_width must be positive".into(),
                    ));
                }
                if g.figure_eight_segments < 8 {
                    return Err(HopfError::Precondition(
                        "figure eight needs 8 segments".into(),
                    ));
                }
            }
            Command::Convergence => {
                let form = self.form()?;
                let n = (form.degree() / 2).max(1);
                if self.p_exponent.is_nan() || self.p_exponent < minimal_exponent(n) {
                    return Err(HopfError::Precondition(format!(
                        "p_exponent {} below {}",
                        self.p_exponent,
                        minimal_exponent(n)
                    )));
                }
                if self.convergence.terms == 0 {
                    return Err(HopfError::Precondition("convergence needs terms".into()));
                }
            }
        }
        Ok(())
    }

    pub fn hopf_options(&self) -> HopfOptions {
        HopfOptions {
            solver_tol: self.tolerances.solver,
            closedness_budget: self.tolerances.closedness_budget,
            gauge_trials: self.tolerances.gauge_trials,
            seed: self.seed,
            ..HopfOptions::default()
        }
    }

    /// SHA-256 of the canonical JSON of everything that affects results. The
    /// output path is left out so the same experiment hashes alike wherever
    /// it is written.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_path = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn provenance(&self) -> String {
        format!("config_hash={}", self.hash())
    }
}

/// Directory named by `HOPFDEC_CACHE`, if set and non-empty.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

pub fn cached_mesh_path(dir: &Path, level: usize) -> PathBuf {
    dir.join(format!("s3_level{level}.json"))
}

/// The level-`level` 3-sphere mesh, read from `cache` when a valid copy is
/// there and written to it otherwise. A stale or corrupt file is replaced.
pub fn sphere3_mesh(level: usize, cache: Option<&Path>) -> Result<Arc<SimplicialComplex>> {
    let Some(dir) = cache else {
        return Ok(Arc::new(build_sphere3_mesh(level)?));
    };
    let path = cached_mesh_path(dir, level);
    if path.exists() {
        if let Ok(mesh) = MeshFile::read(&path).and_then(|f| SimplicialComplex::from_file(&f)) {
            if mesh.dim() == 3 && mesh.count(3) == 16 << (3 * level) {
                return Ok(Arc::new(mesh));
            }
        }
    }
    let mesh = build_sphere3_mesh(level)?;
    std::fs::create_dir_all(dir)?;
    mesh.to_file().write(&path)?;
    Ok(Arc::new(mesh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c = ExperimentConfig::from_json(r#"{"command": "hopf", "mesh_level": 2}"#).unwrap();
        assert_eq!(c.command, Some(Command::Hopf));
        assert_eq!(c.mesh_level, 2);
        assert_eq!(c.map.name, "hopf");
        c.validate().unwrap();
    }

    #[test]
    fn overrides_replace_scalars() {
        let mut c = ExperimentConfig::from_json(
            r#"{"map": {"name": "hopf_rotated", "parameters": [0.5]}, "seed": 4}"#,
        )
        .unwrap();
        c.apply(&Overrides {
            level: Some(1),
            seed: Some(9),
            ..Default::default()
        });
        assert_eq!((c.mesh_level, c.seed), (1, 9));
        assert_eq!(c.map.parameters, vec![0.5]);
        c.apply(&Overrides {
            map: Some("constant".into()),
            ..Default::default()
        });
        assert!(c.map.parameters.is_empty());
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_path = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_err());
        c.command = Some(Command::Convergence);
        c.p_exponent = 1.2;
        assert!(c.validate().is_err());
        c.p_exponent = 1.5;
        c.validate().unwrap();
        c.command = Some(Command::Hopf);
        c.alpha = "nope".into();
        assert!(matches!(c.validate(), Err(HopfError::UnknownName(_))));
        c.alpha = "s2_area_extended".into();
        c.mesh_level = 9;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"command": "plot"}"#).is_err());
    }

    #[test]
    fn cache_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let a = sphere3_mesh(1, Some(dir.path())).unwrap();
        let path = cached_mesh_path(dir.path(), 1);
        let written = std::fs::read(&path).unwrap();
        let b = sphere3_mesh(1, Some(dir.path())).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(std::fs::read(&path).unwrap(), written);
        std::fs::write(&path, "garbage").unwrap();
        let c = sphere3_mesh(1, Some(dir.path())).unwrap();
        assert_eq!(c.content_hash(), a.content_hash());
    }
}
