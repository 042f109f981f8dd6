//! Reading and writing trajectories, tables and reports.
//!
//! Floats are written with `{:e}`, the shortest representation that reads
//! back to the same bits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compactness::DecayRow;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Trajectory};
use crate::model::{ConditionReport, ModelConfig};
use crate::young::EmpiricalMeasure;

pub const TRAJECTORY_HEADER: [&str; 4] = ["x", "rho", "m", "w"];
pub const DECAY_HEADER: [&str; 3] = ["epsilon", "functional", "value"];
pub const MEASURE_HEADER: [&str; 3] = ["rho_center", "w_center", "weight"];

#[inline]
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Index file of a written trajectory. Snapshot files are relative to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryIndex {
    pub t_values: Vec<f64>,
    pub dx: f64,
    pub epsilon: f64,
    pub model: ModelConfig,
    pub grid: Grid,
    pub files: Vec<String>,
}

/// Writes one field as CSV "x,rho,m,w".
pub fn write_field_csv(path: &Path, grid: &Grid, field: &Field) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for i in 0..field.len() {
        w.write_record([num(grid.center(i)), num(field.rho[i]), num(field.m[i]), num(field.w(i))])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `{stem}_NNNN.csv` per snapshot and `{stem}.json` as index.
/// Returns the index path.
pub fn write_trajectory(dir: &Path, stem: &str, traj: &Trajectory, model: &ModelConfig) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(traj.snapshots.len());
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let name = format!("{stem}_{k:04}.csv");
        write_field_csv(&dir.join(&name), &traj.grid, snap)?;
        files.push(name);
    }
    let index = TrajectoryIndex {
        t_values: traj.times(),
        dx: traj.grid.dx(),
        epsilon: traj.epsilon,
        model: model.clone(),
        grid: traj.grid,
        files,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &index)?;
    Ok(path)
}

pub fn read_index(path: &Path) -> Result<TrajectoryIndex> {
    let text = fs::read_to_string(path)?;
    let index: TrajectoryIndex = serde_json::from_str(&text)?;
    if index.files.len() != index.t_values.len() {
        return Err(Error::Input(format!(
            "index lists {} files for {} times",
            index.files.len(),
            index.t_values.len()
        )));
    }
    index.grid.validate()?;
    Ok(index)
}

/// Reads a field CSV; x and w columns are ignored (w is derived).
pub fn read_field_csv(path: &Path, n_cells: usize, t: f64) -> Result<Field> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("{} has no '{name}' column", path.display())))
    };
    let (ir, im) = (col("rho")?, col("m")?);
    let (mut rho, mut m) = (Vec::with_capacity(n_cells), Vec::with_capacity(n_cells));
    for rec in r.records() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        };
        rho.push(parse(ir)?);
        m.push(parse(im)?);
    }
    if rho.len() != n_cells {
        return Err(Error::GridMismatch(format!(
            "{} has {} rows, grid has {n_cells} cells",
            path.display(),
            rho.len()
        )));
    }
    Ok(Field { rho, m, t })
}

/// Loads a trajectory from its index. A missing snapshot file surfaces as
/// an I/O error of kind `NotFound`.
pub fn read_trajectory(index_path: &Path) -> Result<(TrajectoryIndex, Trajectory)> {
    let index = read_index(index_path)?;
    let dir = index_path.parent().unwrap_or(Path::new("."));
    let mut snaps = Vec::with_capacity(index.files.len());
    for (file, &t) in index.files.iter().zip(&index.t_values) {
        let p = dir.join(file);
        if !p.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("snapshot file {} not found", p.display()),
            )));
        }
        snaps.push(read_field_csv(&p, index.grid.n_cells, t)?);
    }
    let traj = Trajectory::from_snapshots(index.grid, index.epsilon, snaps)?;
    Ok((index, traj))
}

pub fn write_decay_csv(path: &Path, rows: &[DecayRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DECAY_HEADER)?;
    for r in rows {
        w.write_record([num(r.epsilon), r.functional.clone(), num(r.value)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_decay_csv(path: &Path) -> Result<Vec<DecayRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |j: usize| -> Result<f64> {
            rec.get(j)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        };
        out.push(DecayRow {
            epsilon: f(0)?,
            functional: rec.get(1).unwrap_or("").to_string(),
            value: f(2)?,
        });
    }
    Ok(out)
}

/// Nonzero bins only, in bin order.
pub fn write_measure_csv(path: &Path, measure: &EmpiricalMeasure) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MEASURE_HEADER)?;
    for (r, z, wt) in measure.atoms() {
        w.write_record([num(r), num(z), num(wt)])?;
    }
    w.flush()?;
    Ok(())
}

/// Generic CSV table with a header and numeric rows.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| num(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_audit_json(path: &Path, report: &ConditionReport) -> Result<()> {
    write_json(path, report)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
