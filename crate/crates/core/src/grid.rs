//! Uniform 1-D grids, cell fields and recorded trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    /// Zero-gradient ghost cells.
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        let g = Self { x_left, x_right, n_cells, boundary };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 8 {
            return Err(Error::Config(format!("n_cells must be at least 8, got {}", self.n_cells)));
        }
        if !(self.x_right > self.x_left) || !self.x_left.is_finite() || !self.x_right.is_finite() {
            return Err(Error::Config(format!("invalid grid extent [{}, {}]", self.x_left, self.x_right)));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n_cells as f64
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Index of the left neighbour, wrapping or clamping per boundary.
    #[inline]
    pub fn left(&self, i: usize) -> usize {
        match (i, self.boundary) {
            (0, Boundary::Periodic) => self.n_cells - 1,
            (0, Boundary::Outflow) => 0,
            _ => i - 1,
        }
    }

    #[inline]
    pub fn right(&self, i: usize) -> usize {
        if i + 1 < self.n_cells {
            i + 1
        } else {
            match self.boundary {
                Boundary::Periodic => 0,
                Boundary::Outflow => i,
            }
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n_cells == other.n_cells
            && self.boundary == other.boundary
            && (self.x_left - other.x_left).abs() <= 1e-12 * self.length()
            && (self.x_right - other.x_right).abs() <= 1e-12 * self.length()
    }
}

/// Conservative cell averages (ρ, m) at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    #[inline]
    pub fn w(&self, i: usize) -> f64 {
        self.m[i] / self.rho[i]
    }

    pub fn w_values(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.m).map(|(r, m)| m / r).collect()
    }

    pub fn mass(&self, dx: f64) -> f64 {
        self.rho.iter().sum::<f64>() * dx
    }

    pub fn momentum(&self, dx: f64) -> f64 {
        self.m.iter().sum::<f64>() * dx
    }
}

/// A cell whose density dropped below the model floor ρ_min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorEvent {
    pub t: f64,
    pub cell: usize,
    pub rho: f64,
}

/// Keep at most this many floor events in detail.
pub const MAX_FLOOR_EVENTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunStats {
    pub steps: usize,
    /// Extremes over every time step, not only the recorded snapshots.
    pub min_rho: f64,
    pub max_rho: f64,
    pub max_abs_w: f64,
    pub floor_events: Vec<FloorEvent>,
    pub floor_event_count: usize,
}

impl RunStats {
    pub(crate) fn start(field: &Field) -> Self {
        let mut s = Self {
            min_rho: f64::INFINITY,
            max_rho: f64::NEG_INFINITY,
            ..Default::default()
        };
        s.observe(field);
        s
    }

    pub(crate) fn observe(&mut self, field: &Field) {
        for i in 0..field.len() {
            let r = field.rho[i];
            self.min_rho = self.min_rho.min(r);
            self.max_rho = self.max_rho.max(r);
            self.max_abs_w = self.max_abs_w.max(field.w(i).abs());
        }
    }

    pub(crate) fn record_floor(&mut self, field: &Field, rho_min: f64) {
        for (i, &r) in field.rho.iter().enumerate() {
            if r < rho_min {
                self.floor_event_count += 1;
                if self.floor_events.len() < MAX_FLOOR_EVENTS {
                    self.floor_events.push(FloorEvent { t: field.t, cell: i, rho: r });
                }
            }
        }
    }
}

/// Recorded snapshots of one run. `epsilon` is 0 for inviscid runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub epsilon: f64,
    pub snapshots: Vec<Field>,
    pub stats: RunStats,
}

impl Trajectory {
    /// Builds a trajectory from given snapshots (fixtures, imports).
    pub fn from_snapshots(grid: Grid, epsilon: f64, snapshots: Vec<Field>) -> Result<Self> {
        for s in &snapshots {
            if s.rho.len() != grid.n_cells || s.m.len() != grid.n_cells {
                return Err(Error::GridMismatch(format!(
                    "snapshot at t = {} has {} cells, grid has {}",
                    s.t,
                    s.rho.len(),
                    grid.n_cells
                )));
            }
        }
        let mut stats = snapshots.first().map(RunStats::start).unwrap_or_default();
        for s in snapshots.iter().skip(1) {
            stats.observe(s);
        }
        Ok(Self { grid, epsilon, snapshots, stats })
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory has no snapshots")
    }

    pub fn t_end(&self) -> f64 {
        self.snapshots.last().map(|s| s.t).unwrap_or(0.0)
    }
}

/// A space-time patch [x_lo, x_hi] × [t_lo, t_hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    /// The whole grid over the whole run.
    pub fn full(traj: &Trajectory) -> Self {
        Self {
            x_lo: traj.grid.x_left,
            x_hi: traj.grid.x_right,
            t_lo: 0.0,
            t_hi: traj.t_end(),
        }
    }

    /// Cells whose centers lie in [x_lo, x_hi].
    pub fn cells(&self, grid: &Grid) -> Result<std::ops::Range<usize>> {
        if !(self.x_hi >= self.x_lo) || self.x_lo > grid.x_right || self.x_hi < grid.x_left {
            return Err(Error::EmptyWindow(format!(
                "[{}, {}] does not meet the grid [{}, {}]",
                self.x_lo, self.x_hi, grid.x_left, grid.x_right
            )));
        }
        let dx = grid.dx();
        let first = ((self.x_lo - grid.x_left) / dx - 0.5).ceil().max(0.0) as usize;
        let last = (((self.x_hi - grid.x_left) / dx - 0.5).floor() as i64).min(grid.n_cells as i64 - 1);
        if last < first as i64 {
            return Err(Error::EmptyWindow(format!("no cell center in [{}, {}]", self.x_lo, self.x_hi)));
        }
        Ok(first..last as usize + 1)
    }

    /// Indices of snapshots with t in [t_lo, t_hi].
    pub fn snapshots(&self, traj: &Trajectory) -> Result<Vec<usize>> {
        let eps = 1e-12 * traj.t_end().max(1.0);
        let idx: Vec<usize> = traj
            .snapshots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.t >= self.t_lo - eps && s.t <= self.t_hi + eps)
            .map(|(k, _)| k)
            .collect();
        if idx.is_empty() {
            return Err(Error::EmptyWindow(format!("no snapshot in [{}, {}]", self.t_lo, self.t_hi)));
        }
        Ok(idx)
    }

    pub fn area(&self) -> f64 {
        (self.x_hi - self.x_lo) * (self.t_hi - self.t_lo)
    }
}

/// Snapshot times 0, Δ, 2Δ, … with the horizon appended when it is not a
/// multiple of Δ.
pub fn snapshot_times(t_end: f64, record_every: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if !(record_every > 0.0) || !(t_end > 0.0) {
        if t_end > 0.0 {
            out.push(t_end);
        }
        return out;
    }
    let n = (t_end / record_every - 1e-9).ceil().max(1.0) as usize;
    for k in 1..n {
        out.push(k as f64 * record_every);
    }
    out.push(t_end);
    out
}

/// L¹ distance Σ|a − b|·dx.
pub fn l1_distance(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx
}
