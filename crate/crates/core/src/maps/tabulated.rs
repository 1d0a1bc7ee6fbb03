use std::path::Path;
use std::sync::Arc;

use crate::dec::SimplicialComplex;
use crate::error::{HopfError, Result};
use crate::hopf::{fmt_float, SampledMap};

/// Read a map from CSV rows `vertex_index, v_1, ..., v_m` (one header row).
/// Every vertex of `mesh` must appear exactly once, in any order.
pub fn read_tabulated(path: &Path, mesh: Arc<SimplicialComplex>) -> Result<SampledMap> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let codim = reader.headers()?.len().saturating_sub(1);
    if codim == 0 {
        return Err(HopfError::Precondition(
            "tabulated map needs at least one value column".into(),
        ));
    }
    let nv = mesh.vertex_count();
    let mut values = vec![f64::NAN; nv * codim];
    let mut seen = vec![false; nv];
    for record in reader.records() {
        let record = record?;
        if record.len() != codim + 1 {
            return Err(HopfError::DimensionMismatch {
                expected: codim + 1,
                found: record.len(),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| HopfError::Precondition(format!("bad number {s:?}: {e}")))
        };
        let v: usize = record[0].parse().map_err(|e| {
            HopfError::Precondition(format!("bad vertex index {:?}: {e}", &record[0]))
        })?;
        if v >= nv || seen[v] {
            return Err(HopfError::Precondition(format!(
                "vertex index {v} out of range or repeated"
            )));
        }
        seen[v] = true;
        for j in 0..codim {
            values[v * codim + j] = parse(&record[j + 1])?;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(HopfError::Precondition(format!(
            "vertex {missing} has no row"
        )));
    }
    SampledMap::from_values(mesh, codim, values)
}

pub fn write_tabulated(f: &SampledMap, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["vertex_index".to_string()];
    header.extend((1..=f.codim()).map(|j| format!("v{j}")));
    w.write_record(&header)?;
    for v in 0..f.mesh().vertex_count() {
        let mut row = vec![v.to_string()];
        row.extend(f.value(v).iter().map(|x| fmt_float(*x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
