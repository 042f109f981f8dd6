//! Nonnegative, compactly supported test functions ϕ(x, t) and the
//! quadrature used to pair them with trajectories.

use crate::error::{Error, Result};
use crate::grid::{Grid, Trajectory};

/// B(y) = (1 − y²)² on |y| < 1, zero elsewhere.
#[inline]
pub fn quartic(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - y * y;
        s * s
    }
}

#[inline]
pub fn quartic_d1(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        -4.0 * y * (1.0 - y * y)
    }
}

/// ∫₀^y B, clamped to the support.
#[inline]
pub fn quartic_integral(y: f64) -> f64 {
    let y = y.clamp(-1.0, 1.0);
    y - 2.0 * y.powi(3) / 3.0 + y.powi(5) / 5.0
}

/// An antiderivative of y·B(y), constant outside the support.
#[inline]
pub fn quartic_moment(y: f64) -> f64 {
    let y = y.clamp(-1.0, 1.0);
    -(1.0 - y * y).powi(3) / 6.0
}

/// ϕ(x, t) = B((x − x0)/lx)·B((t − t0)/lt).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub x0: f64,
    pub lx: f64,
    pub t0: f64,
    pub lt: f64,
}

impl Bump {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        quartic((x - self.x0) / self.lx) * quartic((t - self.t0) / self.lt)
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        quartic_d1((x - self.x0) / self.lx) / self.lx * quartic((t - self.t0) / self.lt)
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        quartic((x - self.x0) / self.lx) * quartic_d1((t - self.t0) / self.lt) / self.lt
    }

    /// Cell averages of the x-factor and of its derivative over cell i.
    pub fn cell_averages(&self, grid: &Grid, i: usize) -> (f64, f64) {
        let dx = grid.dx();
        let a = (grid.x_left + i as f64 * dx - self.x0) / self.lx;
        let b = (grid.x_left + (i + 1) as f64 * dx - self.x0) / self.lx;
        let avg = (quartic_integral(b) - quartic_integral(a)) * self.lx / dx;
        let avg_dx = (quartic(b) - quartic(a)) / dx;
        (avg, avg_dx)
    }

    /// Cells meeting the x-support.
    pub fn cell_range(&self, grid: &Grid) -> std::ops::Range<usize> {
        let dx = grid.dx();
        let lo = ((self.x0 - self.lx - grid.x_left) / dx - 0.5).floor().max(0.0) as usize;
        let hi = (((self.x0 + self.lx - grid.x_left) / dx + 0.5).ceil().max(0.0) as usize).min(grid.n_cells);
        lo.min(hi)..hi
    }

    pub fn touches_time(&self, t: f64) -> bool {
        (t - self.t0).abs() < self.lt
    }

    /// Weights (c, d) with Σ c_k a_k = ∫ a ψ dt and Σ d_k a_k = ∫ a ψ' dt
    /// for data a linear in t between snapshots, ψ the time factor.
    pub fn time_weights(&self, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = times.len();
        let (mut c, mut d) = (vec![0.0; n], vec![0.0; n]);
        let y = |t: f64| (t - self.t0) / self.lt;
        for k in 0..n.saturating_sub(1) {
            let (ta, tb) = (times[k], times[k + 1]);
            let h = tb - ta;
            if tb <= self.t0 - self.lt || ta >= self.t0 + self.lt || h <= 0.0 {
                continue;
            }
            let (ya, yb) = (y(ta), y(tb));
            let i0 = self.lt * (quartic_integral(yb) - quartic_integral(ya));
            let i1 = (self.t0 - ta) * i0 + self.lt * self.lt * (quartic_moment(yb) - quartic_moment(ya));
            c[k] += i0 - i1 / h;
            c[k + 1] += i1 / h;
            d[k] += -quartic(ya) + i0 / h;
            d[k + 1] += quartic(yb) - i0 / h;
        }
        (c, d)
    }
}

/// The fixed library: 3 widths × 8 centers × 4 time centers.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionLibrary {
    pub bumps: Vec<Bump>,
}

pub const WIDTH_DIVISORS: [f64; 3] = [8.0, 16.0, 32.0];
pub const N_X_CENTERS: usize = 8;
pub const N_T_CENTERS: usize = 4;

impl TestFunctionLibrary {
    /// Widths L/8, L/16, L/32 with 8 centers spread so that supports stay
    /// inside the domain; time centers T(k+1)/5 with half-width T/5.
    pub fn standard(grid: &Grid, t_end: f64) -> Self {
        let len = grid.length();
        let lt = t_end / 5.0;
        let mut bumps = Vec::with_capacity(WIDTH_DIVISORS.len() * N_X_CENTERS * N_T_CENTERS);
        for div in WIDTH_DIVISORS {
            let lx = len / div;
            for j in 0..N_X_CENTERS {
                let x0 = grid.x_left + lx + (len - 2.0 * lx) * j as f64 / (N_X_CENTERS - 1) as f64;
                for k in 0..N_T_CENTERS {
                    bumps.push(Bump {
                        x0,
                        lx,
                        t0: t_end * (k + 1) as f64 / 5.0,
                        lt,
                    });
                }
            }
        }
        Self { bumps }
    }

    pub fn len(&self) -> usize {
        self.bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty()
    }
}

/// Trapezoid weights for the snapshot times of a trajectory.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = times[k + 1] - times[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

/// Pointwise densities of a pairing ∫∫(a·ϕ_t + b·ϕ_x + s·ϕ) + ∫a(·,0)ϕ(·,0),
/// given per snapshot.
pub struct PairingDensities {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
}

/// Pairs every bump with the given densities. Fields are read as piecewise
/// constant in x and piecewise linear in t, and both integrals are exact for
/// that reading.
pub fn pairings(
    traj: &Trajectory,
    dens: &PairingDensities,
    library: &TestFunctionLibrary,
    with_initial_term: bool,
) -> Result<Vec<f64>> {
    if traj.snapshots.len() < 2 {
        return Err(Error::TooFewSnapshots {
            needed: 2,
            got: traj.snapshots.len(),
        });
    }
    let grid = &traj.grid;
    let dx = grid.dx();
    let times = traj.times();
    let out = library
        .bumps
        .iter()
        .map(|bump| {
            let cells = bump.cell_range(grid);
            let avgs: Vec<(f64, f64)> = cells.clone().map(|i| bump.cell_averages(grid, i)).collect();
            let (c, d) = bump.time_weights(&times);
            let mut total = 0.0;
            for k in 0..times.len() {
                if c[k] == 0.0 && d[k] == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for (i, &(ax, ax_d)) in cells.clone().zip(&avgs) {
                    row += dens.a[k][i] * ax * d[k] + (dens.b[k][i] * ax_d + dens.s[k][i] * ax) * c[k];
                }
                total += row * dx;
            }
            if with_initial_term && bump.touches_time(times[0]) {
                let bt = quartic((times[0] - bump.t0) / bump.lt);
                let init: f64 = cells.zip(&avgs).map(|(i, &(ax, _))| dens.a[0][i] * ax * bt).sum();
                total += init * dx;
            }
            total
        })
        .collect();
    Ok(out)
}
