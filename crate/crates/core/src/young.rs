//! Empirical Young measures over space-time patches and the Tartar
//! commutation residual
//!
//!   T = ⟨ν, η₁⟩⟨ν, q₂⟩ − ⟨ν, η₂⟩⟨ν, q₁⟩,  η₁ = ρ, q₁ = ρφ, η₂ = m, q₂ = mφ.
//!
//! Moments are taken at bin centers, which biases them by O(bin width).

use serde::{Deserialize, Serialize};

use crate::compactness::{check_common_grid, TartarRow};
use crate::entropy::{EntropyFluxPair, PrintedPair};
use crate::error::{Error, Result};
use crate::grid::{Trajectory, Window};
use crate::model::ModelSpec;
use crate::state::State;
use crate::testfn::trapezoid_weights;

/// Histogram layout over (ρ, w).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub w_lo: f64,
    pub w_hi: f64,
    pub n_rho: usize,
    pub n_w: usize,
}

impl BinSpec {
    /// Range spanning every value of every trajectory, padded by half a bin.
    pub fn covering(trajectories: &[Trajectory], n_rho: usize, n_w: usize) -> Result<Self> {
        let (mut rlo, mut rhi, mut wlo, mut whi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for t in trajectories {
            for s in &t.snapshots {
                for i in 0..s.len() {
                    rlo = rlo.min(s.rho[i]);
                    rhi = rhi.max(s.rho[i]);
                    wlo = wlo.min(s.w(i));
                    whi = whi.max(s.w(i));
                }
            }
        }
        if !rlo.is_finite() {
            return Err(Error::EmptyWindow("no values to bin".into()));
        }
        let pad = |lo: f64, hi: f64, n: usize| {
            let span = (hi - lo).max(1e-9 * lo.abs().max(1.0));
            let h = 0.5 * span / n as f64;
            (lo - h, hi + h)
        };
        let (rho_lo, rho_hi) = pad(rlo, rhi, n_rho);
        let (w_lo, w_hi) = pad(wlo, whi, n_w);
        let spec = Self { rho_lo, rho_hi, w_lo, w_hi, n_rho, n_w };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rho < 8 || self.n_w < 8 {
            return Err(Error::Config(format!(
                "need at least 8 bins per axis, got {} x {}",
                self.n_rho, self.n_w
            )));
        }
        if !(self.rho_hi > self.rho_lo) || !(self.w_hi > self.w_lo) {
            return Err(Error::Config("bin ranges must be nonempty".into()));
        }
        Ok(())
    }

    fn index(lo: f64, hi: f64, n: usize, v: f64) -> (usize, bool) {
        let k = ((v - lo) / (hi - lo) * n as f64).floor();
        if k < 0.0 {
            (0, true)
        } else if k >= n as f64 {
            // v == hi lands in the last bin without counting as clamped
            (n - 1, v > hi)
        } else {
            (k as usize, false)
        }
    }

    pub fn rho_center(&self, i: usize) -> f64 {
        self.rho_lo + (i as f64 + 0.5) * (self.rho_hi - self.rho_lo) / self.n_rho as f64
    }

    pub fn w_center(&self, j: usize) -> f64 {
        self.w_lo + (j as f64 + 0.5) * (self.w_hi - self.w_lo) / self.n_w as f64
    }
}

/// Normalized 2-D histogram; `weights[i * n_w + j]` belongs to
/// (rho_center(i), w_center(j)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub bins: BinSpec,
    pub weights: Vec<f64>,
    pub window: Window,
    pub epsilon: f64,
    /// Weight of samples that fell outside the ranges and went to edge bins.
    pub clamped_weight: f64,
}

impl EmpiricalMeasure {
    /// A measure assembled from explicit atoms (ρ, w, weight).
    pub fn from_atoms(bins: BinSpec, atoms: &[(f64, f64, f64)], window: Window) -> Result<Self> {
        bins.validate()?;
        let mut weights = vec![0.0; bins.n_rho * bins.n_w];
        let mut clamped = 0.0;
        let mut total = 0.0;
        for &(r, w, mass) in atoms {
            if !(mass >= 0.0) {
                return Err(Error::Input(format!("negative atom weight {mass}")));
            }
            let (i, ci) = BinSpec::index(bins.rho_lo, bins.rho_hi, bins.n_rho, r);
            let (j, cj) = BinSpec::index(bins.w_lo, bins.w_hi, bins.n_w, w);
            weights[i * bins.n_w + j] += mass;
            if ci || cj {
                clamped += mass;
            }
            total += mass;
        }
        if !(total > 0.0) {
            return Err(Error::EmptyWindow("measure has no mass".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            bins,
            weights,
            window,
            epsilon: 0.0,
            clamped_weight: clamped / total,
        })
    }

    /// (rho_center, w_center, weight) for every nonzero bin.
    pub fn atoms(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for i in 0..self.bins.n_rho {
            for j in 0..self.bins.n_w {
                let w = self.weights[i * self.bins.n_w + j];
                if w > 0.0 {
                    out.push((self.bins.rho_center(i), self.bins.w_center(j), w));
                }
            }
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Histograms each trajectory's cell values inside `window`, weighted by
/// dx times the trapezoid weight of the snapshot (dx alone for a single
/// snapshot).
pub fn empirical_measure(trajectories: &[Trajectory], window: &Window, bins: &BinSpec) -> Result<Vec<EmpiricalMeasure>> {
    check_common_grid(trajectories)?;
    bins.validate()?;
    trajectories
        .iter()
        .map(|traj| {
            let cells = window.cells(&traj.grid)?;
            let idx = window.snapshots(traj)?;
            let times: Vec<f64> = idx.iter().map(|&k| traj.snapshots[k].t).collect();
            let tw = if idx.len() == 1 { vec![1.0] } else { trapezoid_weights(&times) };
            let dx = traj.grid.dx();
            let mut atoms = Vec::with_capacity(idx.len() * cells.len());
            for (&k, &wt) in idx.iter().zip(&tw) {
                let s = &traj.snapshots[k];
                for i in cells.clone() {
                    atoms.push((s.rho[i], s.w(i), wt * dx));
                }
            }
            let mut m = EmpiricalMeasure::from_atoms(*bins, &atoms, *window)?;
            m.epsilon = traj.epsilon;
            Ok(m)
        })
        .collect()
}

/// ⟨ν, observable⟩ at bin centers.
pub fn moment(measure: &EmpiricalMeasure, observable: impl Fn(f64, f64) -> f64) -> f64 {
    let b = &measure.bins;
    let mut acc = 0.0;
    for i in 0..b.n_rho {
        let r = b.rho_center(i);
        for j in 0..b.n_w {
            let w = measure.weights[i * b.n_w + j];
            if w != 0.0 {
                acc += w * observable(r, b.w_center(j));
            }
        }
    }
    acc
}

/// |⟨ρ⟩⟨ρwφ⟩ − ⟨ρw⟩⟨ρφ⟩|.
pub fn tartar_residual(measure: &EmpiricalMeasure, model: &ModelSpec) -> f64 {
    let e1 = moment(measure, |r, _| r);
    let e2 = moment(measure, |r, w| r * w);
    let q1 = moment(measure, |r, w| r * model.phi(r, w));
    let q2 = moment(measure, |r, w| r * w * model.phi(r, w));
    (e1 * q2 - e2 * q1).abs()
}

/// Default patches: 16 slices of the domain × 8 slices of the horizon.
pub fn default_patches(traj: &Trajectory) -> Vec<Window> {
    patches(traj, 16, 8)
}

pub fn patches(traj: &Trajectory, nx: usize, nt: usize) -> Vec<Window> {
    let g = &traj.grid;
    let (lx, lt) = (g.length() / nx as f64, traj.t_end() / nt as f64);
    let mut out = Vec::with_capacity(nx * nt);
    for k in 0..nt {
        for j in 0..nx {
            out.push(Window {
                x_lo: g.x_left + j as f64 * lx,
                x_hi: g.x_left + (j + 1) as f64 * lx,
                t_lo: k as f64 * lt,
                t_hi: (k + 1) as f64 * lt,
            });
        }
    }
    out
}

/// Per-ε summary of |T| over the default patches.
pub fn tartar_table(trajectories: &[Trajectory], model: &ModelSpec, n_bins: usize) -> Result<Vec<TartarRow>> {
    let Some(first) = trajectories.first() else {
        return Ok(Vec::new());
    };
    let bins = BinSpec::covering(trajectories, n_bins, n_bins)?;
    let wins = default_patches(first);
    let mut per_eps: Vec<Vec<f64>> = vec![Vec::with_capacity(wins.len()); trajectories.len()];
    for w in &wins {
        // Patches holding no snapshot (coarse recording) are skipped.
        let ms = match empirical_measure(trajectories, w, &bins) {
            Err(Error::EmptyWindow(_)) => continue,
            other => other?,
        };
        for (k, m) in ms.iter().enumerate() {
            per_eps[k].push(tartar_residual(m, model));
        }
    }
    Ok(trajectories
        .iter()
        .zip(per_eps)
        .map(|(t, v)| TartarRow {
            epsilon: t.epsilon,
            max_abs: v.iter().copied().fold(0.0, f64::max),
            mean_abs: if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 },
            patches: v.len(),
        })
        .collect())
}

/// max over samples of |η₁q₂ − η₂q₁| relative to max(1, |η₁q₂|, |η₂q₁|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutationCheck {
    pub implemented: f64,
    pub printed: f64,
}

pub fn commutation_identity_check(model: &ModelSpec, samples: &[State]) -> CommutationCheck {
    let rel = |a: f64, b: f64| (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
    let mut out = CommutationCheck { implemented: 0.0, printed: 0.0 };
    for s in samples {
        let (r, m) = (s.rho, s.m);
        let phi = model.phi(r, m / r);
        let (e1, q1, e2, q2) = (r, r * phi, m, m * phi);
        out.implemented = out.implemented.max(rel(e1 * q2, e2 * q1));
        let (p1, p2) = (PrintedPair::First, PrintedPair::Second);
        let (e1, q1) = (p1.eta(r, m), p1.q(model, r, m));
        let (e2, q2) = (p2.eta(r, m), p2.q(model, r, m));
        out.printed = out.printed.max(rel(e1 * q2, e2 * q1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Field, Grid};
    use crate::model::SamplePlan;

    fn win() -> Window {
        Window { x_lo: 0.0, x_hi: 1.0, t_lo: 0.0, t_hi: 1.0 }
    }

    fn bins() -> BinSpec {
        BinSpec { rho_lo: 0.0, rho_hi: 4.0, w_lo: -2.0, w_hi: 2.0, n_rho: 16, n_w: 16 }
    }

    #[test]
    fn dirac_measure() {
        let m = EmpiricalMeasure::from_atoms(bins(), &[(1.1, 0.6, 3.0)], win()).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-12);
        assert_eq!(m.atoms().len(), 1);
        assert!((moment(&m, |_, _| 1.0) - 1.0).abs() < 1e-12);
        let (rc, wc, _) = m.atoms()[0];
        assert!((moment(&m, |r, w| r * w) - rc * wc).abs() < 1e-12);
        for model in crate::model::builtin_models() {
            assert!(tartar_residual(&m, &model) <= 1e-12);
        }
    }

    #[test]
    fn bimodal_moment() {
        let m = EmpiricalMeasure::from_atoms(bins(), &[(1.1, 0.1, 1.0), (2.1, 0.1, 1.0)], win()).unwrap();
        let mean = moment(&m, |r, _| r);
        assert!((mean - 1.6).abs() <= 0.25 + 1e-12);
    }

    #[test]
    fn frozen_w_and_phi_give_zero() {
        // Equal w, and without pressure also equal φ.
        let model = ModelSpec::transport(0.7);
        let m = EmpiricalMeasure::from_atoms(bins(), &[(0.6, 0.3, 1.0), (3.1, 0.3, 2.0)], win()).unwrap();
        assert!(tartar_residual(&m, &model) <= 1e-12);
    }

    #[test]
    fn out_of_range_values_go_to_edge_bins() {
        let m = EmpiricalMeasure::from_atoms(bins(), &[(10.0, 0.0, 1.0), (1.0, 0.0, 1.0)], win()).unwrap();
        assert!((m.clamped_weight - 0.5).abs() < 1e-15);
        assert!((m.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_bins_rejected() {
        let mut b = bins();
        b.n_w = 4;
        assert!(EmpiricalMeasure::from_atoms(b, &[(1.0, 0.0, 1.0)], win()).is_err());
    }

    #[test]
    fn contact_slice_masses_follow_geometry() {
        let g = Grid::new(0.0, 1.0, 100, Boundary::Outflow).unwrap();
        let rho: Vec<f64> = g.centers().iter().map(|&x| if x < 0.3 { 1.0 } else { 2.0 }).collect();
        let snap = Field { m: rho.iter().map(|r| r * 0.5).collect(), rho, t: 0.0 };
        let traj = Trajectory::from_snapshots(g, 0.0, vec![snap]).unwrap();
        let w = Window { x_lo: 0.0, x_hi: 1.0, t_lo: 0.0, t_hi: 0.0 };
        let b = BinSpec { rho_lo: 0.5, rho_hi: 2.5, w_lo: 0.0, w_hi: 1.0, n_rho: 8, n_w: 8 };
        let m = &empirical_measure(&[traj], &w, &b).unwrap()[0];
        let low: f64 = moment(m, |r, _| if r < 1.5 { 1.0 } else { 0.0 });
        assert!((low - 0.3).abs() < 1e-12);
    }

    #[test]
    fn commutation_identity_holds_for_both_versions() {
        for model in crate::model::builtin_models() {
            let plan = SamplePlan::for_model(&model, 1000);
            let states: Vec<State> = plan.points.iter().map(|&(r, w)| State::from_rho_w(r, w).unwrap()).collect();
            let c = commutation_identity_check(&model, &states);
            assert!(c.implemented <= 1e-12 && c.printed <= 1e-12, "{c:?}");
        }
    }
}
