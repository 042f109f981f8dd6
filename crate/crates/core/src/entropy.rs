//! Entropy pairs η = ρF(z), q = ηφ with z = m/ρ, their discrete production
//! along trajectories, and entropy-inequality pairings.
//!
//! With U = (ρ, m), ∇η = (F − zF', F') and ∇η·U = η, so
//! ∇η·dF = φ∇η + (∇η·U)∇φ = φ∇η + η∇φ = ∇q: every profile F yields a pair.

use serde::{Deserialize, Serialize};

use crate::characteristics::{jacobian_unchecked, phi_gradient};
use crate::error::{Error, Result};
use crate::grid::{Trajectory, Window};
use crate::model::{Interval, ModelSpec};
use crate::state::State;
use crate::testfn::{pairings, PairingDensities, TestFunctionLibrary};

/// The profile F(z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropyProfile {
    /// F = 1: η = ρ.
    One,
    /// F = z: η = m.
    Z,
    /// F = z².
    ZSquared,
    /// F = e^z.
    Exp,
    /// F = (z − c)².
    Shifted { c: f64 },
}

impl EntropyProfile {
    pub fn f(&self, z: f64) -> f64 {
        match *self {
            EntropyProfile::One => 1.0,
            EntropyProfile::Z => z,
            EntropyProfile::ZSquared => z * z,
            EntropyProfile::Exp => z.exp(),
            EntropyProfile::Shifted { c } => (z - c) * (z - c),
        }
    }

    pub fn d1(&self, z: f64) -> f64 {
        match *self {
            EntropyProfile::One => 0.0,
            EntropyProfile::Z => 1.0,
            EntropyProfile::ZSquared => 2.0 * z,
            EntropyProfile::Exp => z.exp(),
            EntropyProfile::Shifted { c } => 2.0 * (z - c),
        }
    }

    pub fn d2(&self, z: f64) -> f64 {
        match *self {
            EntropyProfile::One | EntropyProfile::Z => 0.0,
            EntropyProfile::ZSquared | EntropyProfile::Shifted { .. } => 2.0,
            EntropyProfile::Exp => z.exp(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            EntropyProfile::One => "F=1".into(),
            EntropyProfile::Z => "F=z".into(),
            EntropyProfile::ZSquared => "F=z^2".into(),
            EntropyProfile::Exp => "F=exp(z)".into(),
            EntropyProfile::Shifted { c } => format!("F=(z-{c})^2"),
        }
    }

    pub fn builtin() -> Vec<EntropyProfile> {
        vec![
            EntropyProfile::One,
            EntropyProfile::Z,
            EntropyProfile::ZSquared,
            EntropyProfile::Exp,
            EntropyProfile::Shifted { c: 1.0 },
        ]
    }
}

/// Anything with an entropy η, a flux q and their gradients in (ρ, m).
pub trait EntropyFluxPair {
    fn label(&self) -> String;
    fn eta(&self, rho: f64, m: f64) -> f64;
    fn q(&self, model: &ModelSpec, rho: f64, m: f64) -> f64;
    fn grad_eta(&self, rho: f64, m: f64) -> [f64; 2];
    fn grad_q(&self, model: &ModelSpec, rho: f64, m: f64) -> [f64; 2];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPair {
    pub profile: EntropyProfile,
    /// F'' ≥ 0 at every sampled point of the w-domain.
    pub convex: bool,
}

/// Builds the pair for `profile`, checking convexity on `w_domain`.
pub fn make_pair(profile: EntropyProfile, w_domain: Interval) -> EntropyPair {
    let n = 257;
    let convex = (0..n).all(|k| {
        let z = w_domain.lo + (w_domain.hi - w_domain.lo) * k as f64 / (n - 1) as f64;
        profile.d2(z) >= 0.0
    });
    EntropyPair { profile, convex }
}

impl EntropyFluxPair for EntropyPair {
    fn label(&self) -> String {
        self.profile.label()
    }

    fn eta(&self, rho: f64, m: f64) -> f64 {
        rho * self.profile.f(m / rho)
    }

    fn q(&self, model: &ModelSpec, rho: f64, m: f64) -> f64 {
        self.eta(rho, m) * model.phi(rho, m / rho)
    }

    fn grad_eta(&self, rho: f64, m: f64) -> [f64; 2] {
        let z = m / rho;
        let d1 = self.profile.d1(z);
        [self.profile.f(z) - z * d1, d1]
    }

    fn grad_q(&self, model: &ModelSpec, rho: f64, m: f64) -> [f64; 2] {
        let phi = model.phi(rho, m / rho);
        let eta = self.eta(rho, m);
        let ge = self.grad_eta(rho, m);
        let gp = phi_gradient(model, rho, m);
        [phi * ge[0] + eta * gp[0], phi * ge[1] + eta * gp[1]]
    }
}

impl EntropyPair {
    /// F''(z)/ρ · (zρ_x − m_x)².
    pub fn hessian_quadratic(&self, s: State, x: [f64; 2]) -> f64 {
        let z = s.w();
        let v = z * x[0] - x[1];
        self.profile.d2(z) / s.rho * v * v
    }

    fn dissipation_density(&self, rho: f64, m: f64, rho_x: f64, m_x: f64) -> f64 {
        let z = m / rho;
        let v = z * rho_x - m_x;
        self.profile.d2(z) / rho * v * v
    }
}

/// The printed special pairs (ρ, ρφ + w) and (ρw, ρwφ + w²).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrintedPair {
    First,
    Second,
}

impl EntropyFluxPair for PrintedPair {
    fn label(&self) -> String {
        match self {
            PrintedPair::First => "printed(rho, rho*phi+w)".into(),
            PrintedPair::Second => "printed(rho*w, rho*w*phi+w^2)".into(),
        }
    }

    fn eta(&self, rho: f64, m: f64) -> f64 {
        match self {
            PrintedPair::First => rho,
            PrintedPair::Second => m,
        }
    }

    fn q(&self, model: &ModelSpec, rho: f64, m: f64) -> f64 {
        let w = m / rho;
        let phi = model.phi(rho, w);
        match self {
            PrintedPair::First => rho * phi + w,
            PrintedPair::Second => m * phi + w * w,
        }
    }

    fn grad_eta(&self, _rho: f64, _m: f64) -> [f64; 2] {
        match self {
            PrintedPair::First => [1.0, 0.0],
            PrintedPair::Second => [0.0, 1.0],
        }
    }

    fn grad_q(&self, model: &ModelSpec, rho: f64, m: f64) -> [f64; 2] {
        let w = m / rho;
        let phi = model.phi(rho, w);
        let [pr, pm] = phi_gradient(model, rho, m);
        match self {
            PrintedPair::First => [phi + rho * pr - w / rho, rho * pm + 1.0 / rho],
            PrintedPair::Second => [m * pr - 2.0 * w * w / rho, phi + m * pm + 2.0 * w / rho],
        }
    }
}

/// ‖∇q − ∇η·dF‖ at `s`.
pub fn pair_residual(pair: &dyn EntropyFluxPair, model: &ModelSpec, s: State) -> Result<f64> {
    model.check_domain(s.rho, s.w())?;
    let (rho, m) = (s.rho, s.m);
    let ge = pair.grad_eta(rho, m);
    let gq = pair.grad_q(model, rho, m);
    let j = jacobian_unchecked(model, rho, m);
    let r0 = gq[0] - (ge[0] * j[0][0] + ge[1] * j[1][0]);
    let r1 = gq[1] - (ge[0] * j[0][1] + ge[1] * j[1][1]);
    Ok(r0.hypot(r1))
}

/// Result of [`entropy_production`].
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProduction {
    /// R = Δ_tη + Δ_xq − εΔ_xxη − ∇η·H per time interval and cell.
    pub residual: Vec<Vec<f64>>,
    /// ε·F''/ρ·(zρ_x − m_x)² at the left end of each interval.
    pub dissipation: Vec<Vec<f64>>,
    /// max |R + dissipation| over the window.
    pub balance_error: f64,
    /// max R over the window.
    pub max_residual: f64,
    /// ε∫∫F''/ρ·(zρ_x − m_x)² over the window.
    pub d: f64,
}

/// Discrete entropy balance along a viscous trajectory, with central
/// differences in x, forward differences between snapshots in t, and
/// right-endpoint sums in t for D.
pub fn entropy_production(
    traj: &Trajectory,
    pair: &EntropyPair,
    model: &ModelSpec,
    window: Option<Window>,
) -> Result<EntropyProduction> {
    let n_snap = traj.snapshots.len();
    if n_snap < 3 {
        return Err(Error::TooFewSnapshots { needed: 3, got: n_snap });
    }
    let window = window.unwrap_or_else(|| Window::full(traj));
    let cells = window.cells(&traj.grid)?;
    let grid = &traj.grid;
    let dx = grid.dx();
    let eps = traj.epsilon;
    let n = grid.n_cells;

    let eta_of = |k: usize| -> Vec<f64> {
        let s = &traj.snapshots[k];
        (0..n).map(|i| pair.eta(s.rho[i], s.m[i])).collect()
    };
    let dissipation_of = |k: usize| -> Vec<f64> {
        let s = &traj.snapshots[k];
        (0..n)
            .map(|i| {
                let (l, r) = (grid.left(i), grid.right(i));
                let rho_x = (s.rho[r] - s.rho[l]) / (2.0 * dx);
                let m_x = (s.m[r] - s.m[l]) / (2.0 * dx);
                eps * pair.dissipation_density(s.rho[i], s.m[i], rho_x, m_x)
            })
            .collect()
    };

    let mut residual = Vec::with_capacity(n_snap - 1);
    let mut dissipation = Vec::with_capacity(n_snap - 1);
    let mut balance_error: f64 = 0.0;
    let mut max_residual = f64::NEG_INFINITY;
    let mut d = 0.0;
    let mut eta_now = eta_of(0);
    let mut diss_now = dissipation_of(0);
    let t_eps = 1e-12 * traj.t_end().max(1.0);
    for k in 0..n_snap - 1 {
        let (s0, s1) = (&traj.snapshots[k], &traj.snapshots[k + 1]);
        let dt = s1.t - s0.t;
        let eta_next = eta_of(k + 1);
        let diss_next = dissipation_of(k + 1);
        let q: Vec<f64> = (0..n).map(|i| pair.q(model, s0.rho[i], s0.m[i])).collect();
        let in_time = s0.t >= window.t_lo - t_eps && s1.t <= window.t_hi + t_eps;
        let mut row = vec![0.0; n];
        for i in 0..n {
            let (l, r) = (grid.left(i), grid.right(i));
            let ge = pair.grad_eta(s0.rho[i], s0.m[i]);
            let w = s0.m[i] / s0.rho[i];
            let source = ge[0] * model.f(s0.rho[i], w) + ge[1] * model.g(s0.rho[i], w);
            row[i] = (eta_next[i] - eta_now[i]) / dt + (q[r] - q[l]) / (2.0 * dx)
                - eps * (eta_now[r] - 2.0 * eta_now[i] + eta_now[l]) / (dx * dx)
                - source;
        }
        if in_time {
            for i in cells.clone() {
                balance_error = balance_error.max((row[i] + diss_now[i]).abs());
                max_residual = max_residual.max(row[i]);
            }
            d += dt * cells.clone().map(|i| diss_next[i]).sum::<f64>() * dx;
        }
        residual.push(row);
        dissipation.push(diss_now);
        eta_now = eta_next;
        diss_now = diss_next;
    }
    if !max_residual.is_finite() {
        max_residual = 0.0;
    }
    Ok(EntropyProduction {
        residual,
        dissipation,
        balance_error,
        max_residual,
        d,
    })
}

/// Outcome of [`entropy_inequality`].
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub pairings: Vec<f64>,
    /// Most negative pairing and the index of its test function.
    pub worst: f64,
    pub worst_index: usize,
}

/// Pairs ∫∫(ηϕ_t + qϕ_x + ∇η·Hϕ) + ∫η(·,0)ϕ(·,0) with every test function.
/// Entropy solutions give values ≥ 0 up to discretization error.
pub fn entropy_inequality(
    traj: &Trajectory,
    pair: &EntropyPair,
    model: &ModelSpec,
    library: &TestFunctionLibrary,
) -> Result<InequalityReport> {
    if !pair.convex {
        return Err(Error::Config(format!("entropy profile {} is not convex", pair.label())));
    }
    if library.is_empty() {
        return Err(Error::Config("empty test-function library".into()));
    }
    let n = traj.grid.n_cells;
    let mut dens = PairingDensities {
        a: Vec::with_capacity(traj.snapshots.len()),
        b: Vec::with_capacity(traj.snapshots.len()),
        s: Vec::with_capacity(traj.snapshots.len()),
    };
    for snap in &traj.snapshots {
        let (mut a, mut b, mut s) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let (r, m) = (snap.rho[i], snap.m[i]);
            let w = m / r;
            a[i] = pair.eta(r, m);
            b[i] = pair.q(model, r, m);
            let ge = pair.grad_eta(r, m);
            s[i] = ge[0] * model.f(r, w) + ge[1] * model.g(r, w);
        }
        dens.a.push(a);
        dens.b.push(b);
        dens.s.push(s);
    }
    let values = pairings(traj, &dens, library, true)?;
    let (worst_index, worst) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    Ok(InequalityReport {
        pairings: values,
        worst,
        worst_index,
    })
}

/// Serialized entropy summary for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySummary {
    pub pair: String,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_pairing: Option<f64>,
    pub epsilon: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::flux;
    use crate::diff;
    use crate::grid::{Boundary, Field, Grid};
    use crate::viscous::{initialize, solve_from, ViscousConfig};

    fn states() -> Vec<State> {
        let mut out = Vec::new();
        for &rho in &[0.05, 0.3, 1.0, 2.5, 7.0] {
            for &w in &[-2.0, -0.3, 0.0, 0.9, 2.0] {
                out.push(State::from_rho_w(rho, w).unwrap());
            }
        }
        out
    }

    #[test]
    fn pair_examples() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let p = make_pair(EntropyProfile::ZSquared, gc.w_domain);
        assert_eq!(p.eta(1.0, 2.0), 4.0);
        assert_eq!(p.q(&gc, 1.0, 2.0), 4.0);
        let one = make_pair(EntropyProfile::One, gc.w_domain);
        assert_eq!(one.eta(1.7, 0.4), 1.7);
        assert_eq!(one.q(&gc, 1.7, 0.4), flux(&gc, 1.7, 0.4)[0]);
        let z = make_pair(EntropyProfile::Z, gc.w_domain);
        assert_eq!(z.eta(1.7, 0.4), 0.4);
        assert!(p.convex && one.convex);
    }

    #[test]
    fn builtin_pairs_satisfy_the_identity() {
        for model in crate::model::builtin_models() {
            for profile in EntropyProfile::builtin() {
                let pair = make_pair(profile, model.w_domain);
                for s in states() {
                    assert!(pair_residual(&pair, &model, s).unwrap() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let gc = ModelSpec::gc(1.0, 0.5);
        for profile in EntropyProfile::builtin() {
            let pair = make_pair(profile, gc.w_domain);
            for s in states() {
                let (hr, hm) = diff::steps(s.rho, s.m, 1e-6);
                let ge = diff::gradient2(|r, m| pair.eta(r, m), s.rho, s.m, hr, hm);
                let gq = diff::gradient2(|r, m| pair.q(&gc, r, m), s.rho, s.m, hr, hm);
                let ae = pair.grad_eta(s.rho, s.m);
                let aq = pair.grad_q(&gc, s.rho, s.m);
                for k in 0..2 {
                    assert!((ge[k] - ae[k]).abs() <= 1e-6 * (1.0 + ae[k].abs()));
                    assert!((gq[k] - aq[k]).abs() <= 1e-6 * (1.0 + aq[k].abs()));
                }
            }
        }
    }

    #[test]
    fn printed_pairs_fail_the_identity() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let s = State::from_rho_w(1.0, 2.0).unwrap();
        assert!(pair_residual(&PrintedPair::First, &gc, s).unwrap() > 0.1);
        assert!(pair_residual(&PrintedPair::Second, &gc, s).unwrap() > 0.1);
    }

    #[test]
    fn hessian_examples() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let p = make_pair(EntropyProfile::ZSquared, gc.w_domain);
        let s = State::new(1.0, 2.0).unwrap();
        assert_eq!(p.hessian_quadratic(s, [0.0, 1.0]), 2.0);
        assert_eq!(p.hessian_quadratic(s, [1.0, 2.0]), 0.0);
        let lin = make_pair(EntropyProfile::Z, gc.w_domain);
        assert_eq!(lin.hessian_quadratic(s, [0.3, -1.0]), 0.0);
    }

    #[test]
    fn constant_trajectory_has_no_production() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let g = Grid::new(0.0, 1.0, 32, Boundary::Periodic).unwrap();
        let snaps: Vec<Field> = (0..4)
            .map(|k| Field { rho: vec![1.0; 32], m: vec![2.0; 32], t: 0.1 * k as f64 })
            .collect();
        let traj = Trajectory::from_snapshots(g, 1e-2, snaps).unwrap();
        let pair = make_pair(EntropyProfile::ZSquared, gc.w_domain);
        let prod = entropy_production(&traj, &pair, &gc, None).unwrap();
        assert_eq!(prod.d, 0.0);
        assert!(prod.residual.iter().flatten().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn balance_matches_to_discretization_order() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let pair = make_pair(EntropyProfile::ZSquared, gc.w_domain);
        let g = Grid::new(0.0, 1.0, 128, Boundary::Periodic).unwrap();
        let rho0 = |x: f64| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).sin();
        let w0 = |x: f64| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).cos();
        let mut errs = Vec::new();
        for stride in [0.004, 0.002] {
            let f = initialize(&g, &rho0, &w0, 0.0).unwrap();
            let traj = solve_from(&gc, &g, f, &ViscousConfig::new(1e-2, 0.1, stride), None).unwrap();
            errs.push(entropy_production(&traj, &pair, &gc, None).unwrap().balance_error);
        }
        assert!(errs[1] < 0.7 * errs[0], "{errs:?}");
    }

    #[test]
    fn too_few_snapshots() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let g = Grid::new(0.0, 1.0, 16, Boundary::Periodic).unwrap();
        let f = initialize(&g, &|_| 1.0, &|_| 1.0, 0.0).unwrap();
        let traj = Trajectory::from_snapshots(g, 1e-2, vec![f]).unwrap();
        let pair = make_pair(EntropyProfile::ZSquared, gc.w_domain);
        assert!(matches!(
            entropy_production(&traj, &pair, &gc, None),
            Err(Error::TooFewSnapshots { .. })
        ));
    }
}
