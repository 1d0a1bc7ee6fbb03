//! Builtin maps, embeddings into the Heisenberg group, homotopies, and the
//! rank and contact analyzers applied to sampled maps.

mod analysis;
mod builtin;
mod embedding;
mod families;
mod tabulated;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use analysis::{
    center_difference_check, contact_check, rank_profile, symplectic_rank_check, CenterReport,
    ContactReport, RankProfile, SymplecticReport, DEFAULT_RANK_TOL,
};
pub use builtin::{z_rotation, BuiltinMap};
pub use embedding::{
    figure_eight_embedding, figure_eight_on_circle, injectivity_margin, sphere2_embedding_into_h2,
    EmbeddingReport, ValidatedEmbedding,
};
pub use families::{
    interpolation_family, radial_extension, rotation_homotopy, sphere_dilation, SPHERE_TOL,
};
pub use tabulated::{read_tabulated, write_tabulated};

use crate::dec::SimplicialComplex;
use crate::error::{HopfError, Result};
use crate::hopf::SampledMap;

/// A map named in a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub name: String,
    #[serde(default)]
    pub parameters: Vec<f64>,
    /// CSV source for `name = "tabulated"`.
    #[serde(default)]
    pub table: Option<PathBuf>,
}

impl MapSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            parameters: Vec::new(),
            table: None,
        }
    }

    /// Builtin names:
    ///
    /// | name | parameters |
    /// |---|---|
    /// | `hopf` | none |
    /// | `hopf_rotated` | angle in radians |
    /// | `hopf_reflected` | none |
    /// | `constant` | the value (default `(0, 0, 1)`) |
    /// | `full_rank` | seed (default 1) |
    /// | `identity` | none |
    pub fn builtin(&self, domain_dim: usize) -> Result<Option<BuiltinMap>> {
        let p = &self.parameters;
        let map = match self.name.as_str() {
            "hopf" => BuiltinMap::hopf(),
            "hopf_rotated" => BuiltinMap::hopf_rotated(p.first().copied().unwrap_or(0.0)),
            "hopf_reflected" => BuiltinMap::hopf_reflected(),
            "constant" => {
                let value = if p.is_empty() {
                    vec![0.0, 0.0, 1.0]
                } else {
                    p.clone()
                };
                BuiltinMap::constant(value, domain_dim)
            }
            "full_rank" => BuiltinMap::full_rank_control(p.first().copied().unwrap_or(1.0) as u64),
            "identity" => BuiltinMap::Inclusion { dim: domain_dim },
            "tabulated" => return Ok(None),
            other => return Err(HopfError::UnknownName(format!("map {other:?}"))),
        };
        Ok(Some(map))
    }

    pub fn resolve(&self, mesh: Arc<SimplicialComplex>) -> Result<SampledMap> {
        match self.builtin(mesh.ambient_dim())? {
            Some(map) => SampledMap::from_builtin(mesh, map),
            None => {
                let path = self.table.as_ref().ok_or_else(|| {
                    HopfError::Precondition("tabulated map needs a table path".into())
                })?;
                read_tabulated(path, mesh)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::build_sphere3_mesh;

    #[test]
    fn names_resolve() {
        let m = Arc::new(build_sphere3_mesh(0).unwrap());
        for name in [
            "hopf",
            "hopf_rotated",
            "hopf_reflected",
            "constant",
            "full_rank",
            "identity",
        ] {
            let f = MapSpec::named(name).resolve(m.clone()).unwrap();
            assert_eq!(f.mesh().vertex_count(), 8);
        }
        assert!(matches!(
            MapSpec::named("nope").resolve(m.clone()),
            Err(HopfError::UnknownName(_))
        ));
        assert!(MapSpec::named("tabulated").resolve(m).is_err());
    }
}
