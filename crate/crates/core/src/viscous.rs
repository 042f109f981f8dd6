//! Method-of-lines solver for the parabolic regularization
//!
//!   ρ_t + (ρφ)_x = ε ρ_xx + f,   m_t + (mφ)_x = ε m_xx + g,
//!
//! with central flux differences, the 3-point Laplacian and Heun's method.
//! Time steps are truncated so that every snapshot time is hit exactly.

use crate::characteristics::{region_margins, wave_speeds, RegionSpec};
use crate::error::{Error, Result};
use crate::grid::{snapshot_times, Field, Grid, RunStats, Trajectory};
use crate::model::ModelSpec;
use crate::profile::Profile;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscousConfig {
    pub epsilon: f64,
    pub cfl: f64,
    pub diff_fraction: f64,
    pub t_end: f64,
    /// Time between snapshots; 0 records only the endpoints.
    pub record_every: f64,
}

impl ViscousConfig {
    pub fn new(epsilon: f64, t_end: f64, record_every: f64) -> Self {
        Self {
            epsilon,
            cfl: 0.45,
            diff_fraction: 0.4,
            t_end,
            record_every,
        }
    }

    pub fn for_scenario(scenario: &Scenario, epsilon: f64) -> Self {
        Self {
            epsilon,
            cfl: scenario.cfl,
            diff_fraction: scenario.diff_fraction,
            t_end: scenario.t_end,
            record_every: scenario.record_every,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.diff_fraction > 0.0 && self.diff_fraction < 0.5) {
            return Err(Error::Config(format!(
                "diff_fraction must lie in (0, 0.5), got {}",
                self.diff_fraction
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// ρ = ρ₀ + ε and m = ρ·w₀ at cell centers.
pub fn initialize(grid: &Grid, rho0: &impl Profile, w0: &impl Profile, epsilon: f64) -> Result<Field> {
    let n = grid.n_cells;
    let mut rho = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.center(i);
        let r0 = rho0.at(x);
        let w = w0.at(x);
        if !(r0 >= 0.0) || !r0.is_finite() {
            return Err(Error::Input(format!("initial rho = {r0} at x = {x} must be >= 0")));
        }
        if !w.is_finite() {
            return Err(Error::Input(format!("initial w is not finite at x = {x}")));
        }
        let r = r0 + epsilon;
        rho.push(r);
        m.push(r * w);
    }
    Ok(Field { rho, m, t: 0.0 })
}

/// Largest max(|λ₁|, |λ₂|) over the field.
pub fn max_wave_speed(model: &ModelSpec, grid: &Grid, field: &Field) -> Result<f64> {
    let mut s_max: f64 = 0.0;
    for i in 0..field.len() {
        let (l1, l2) = wave_speeds(model, field.rho[i], field.m[i]);
        let s = l1.abs().max(l2.abs());
        if !s.is_finite() {
            return Err(Error::Blowup {
                t: field.t,
                cell: i,
                x: grid.center(i),
                reason: format!("non-finite wave speed at rho = {}, m = {}", field.rho[i], field.m[i]),
            });
        }
        s_max = s_max.max(s);
    }
    Ok(s_max)
}

/// min(cfl·dx/λ_max, diff_fraction·dx²/ε, t_end − t).
pub fn stable_dt(model: &ModelSpec, grid: &Grid, field: &Field, config: &ViscousConfig) -> Result<f64> {
    let dx = grid.dx();
    let s = max_wave_speed(model, grid, field)?;
    let advective = if s > 0.0 { config.cfl * dx / s } else { f64::INFINITY };
    let diffusive = config.diff_fraction * dx * dx / config.epsilon;
    let remaining = config.t_end - field.t;
    Ok(advective.min(diffusive).min(remaining))
}

fn rhs(model: &ModelSpec, grid: &Grid, rho: &[f64], m: &[f64], epsilon: f64, dr: &mut [f64], dm: &mut [f64]) {
    let n = rho.len();
    let dx = grid.dx();
    let inv2dx = 0.5 / dx;
    let nu = epsilon / (dx * dx);
    let mut fr = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for i in 0..n {
        let phi = model.phi(rho[i], m[i] / rho[i]);
        fr[i] = rho[i] * phi;
        fm[i] = m[i] * phi;
    }
    for i in 0..n {
        let (l, r) = (grid.left(i), grid.right(i));
        let w = m[i] / rho[i];
        dr[i] = -(fr[r] - fr[l]) * inv2dx + nu * (rho[r] - 2.0 * rho[i] + rho[l]) + model.f(rho[i], w);
        dm[i] = -(fm[r] - fm[l]) * inv2dx + nu * (m[r] - 2.0 * m[i] + m[l]) + model.g(rho[i], w);
    }
}

/// First cell with a non-finite entry or a non-positive density.
pub(crate) fn check_field(grid: &Grid, field: &Field) -> Result<()> {
    for i in 0..field.len() {
        let (r, m) = (field.rho[i], field.m[i]);
        let reason = if !r.is_finite() || !m.is_finite() {
            format!("non-finite state rho = {r}, m = {m}")
        } else if r <= 0.0 {
            format!("non-positive density rho = {r}")
        } else {
            continue;
        };
        return Err(Error::Blowup {
            t: field.t,
            cell: i,
            x: grid.center(i),
            reason,
        });
    }
    Ok(())
}

/// One Heun step of size `dt`.
pub fn step(model: &ModelSpec, grid: &Grid, field: &Field, dt: f64, epsilon: f64) -> Result<Field> {
    let n = field.len();
    let (mut k1r, mut k1m) = (vec![0.0; n], vec![0.0; n]);
    rhs(model, grid, &field.rho, &field.m, epsilon, &mut k1r, &mut k1m);
    let stage = Field {
        rho: (0..n).map(|i| field.rho[i] + dt * k1r[i]).collect(),
        m: (0..n).map(|i| field.m[i] + dt * k1m[i]).collect(),
        t: field.t + dt,
    };
    check_field(grid, &stage)?;
    let (mut k2r, mut k2m) = (vec![0.0; n], vec![0.0; n]);
    rhs(model, grid, &stage.rho, &stage.m, epsilon, &mut k2r, &mut k2m);
    let half = 0.5 * dt;
    let out = Field {
        rho: (0..n).map(|i| field.rho[i] + half * (k1r[i] + k2r[i])).collect(),
        m: (0..n).map(|i| field.m[i] + half * (k1m[i] + k2m[i])).collect(),
        t: field.t + dt,
    };
    check_field(grid, &out)?;
    Ok(out)
}

/// Tolerance used by the online invariant-region check.
pub fn region_tolerance(dx: f64) -> f64 {
    1e-6 + 10.0 * dx
}

/// Errors with the worst cell when a snapshot leaves the inflated region.
pub fn check_region(model: &ModelSpec, grid: &Grid, region: RegionSpec, field: &Field) -> Result<()> {
    let tol = region_tolerance(grid.dx());
    let mut worst: Option<(usize, f64, f64, f64)> = None;
    for i in 0..field.len() {
        let g = region_margins(model, region, field.rho[i], field.m[i]);
        let excess = g.g1.max(g.g2);
        if excess > tol && worst.is_none_or(|w| excess > w.3) {
            worst = Some((i, g.g1, g.g2, excess));
        }
    }
    match worst {
        Some((i, g1, g2, _)) => Err(Error::RegionViolation {
            t: field.t,
            x: grid.center(i),
            g1,
            g2,
            tolerance: tol,
        }),
        None => Ok(()),
    }
}

/// Integrates from `initial`, recording snapshots and checking the region
/// (when given) at each one.
pub fn solve_from(
    model: &ModelSpec,
    grid: &Grid,
    initial: Field,
    config: &ViscousConfig,
    region: Option<RegionSpec>,
) -> Result<Trajectory> {
    config.validate()?;
    grid.validate()?;
    check_field(grid, &initial)?;
    if let Some(r) = region {
        check_region(model, grid, r, &initial)?;
    }
    let times = snapshot_times(config.t_end, config.record_every);
    let mut stats = RunStats::start(&initial);
    stats.record_floor(&initial, model.rho_domain.lo);
    let mut snapshots = vec![initial.clone()];
    let mut field = initial;
    for &target in times.iter().skip(1) {
        while field.t < target {
            let mut dt = stable_dt(model, grid, &field, config)?;
            if field.t + dt >= target || target - (field.t + dt) < 1e-12 * target {
                dt = target - field.t;
            }
            let mut next = step(model, grid, &field, dt, config.epsilon)?;
            if (next.t - target).abs() <= 1e-12 * target.max(1.0) {
                next.t = target;
            }
            field = next;
            stats.steps += 1;
            stats.observe(&field);
            stats.record_floor(&field, model.rho_domain.lo);
        }
        if let Some(r) = region {
            check_region(model, grid, r, &field)?;
        }
        snapshots.push(field.clone());
    }
    Ok(Trajectory {
        grid: *grid,
        epsilon: config.epsilon,
        snapshots,
        stats,
    })
}

/// Lifts the scenario's initial data by ε and integrates to its horizon.
pub fn solve(model: &ModelSpec, scenario: &Scenario, config: &ViscousConfig) -> Result<Trajectory> {
    let field = initialize(&scenario.grid, &scenario.rho0, &scenario.w0, config.epsilon)?;
    solve_from(model, &scenario.grid, field, config, scenario.region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::model::laws::LinearSource;
    use std::f64::consts::PI;

    fn periodic(n: usize) -> Grid {
        Grid::new(0.0, 1.0, n, Boundary::Periodic).unwrap()
    }

    #[test]
    fn initialize_lifts_density() {
        let g = periodic(16);
        let f = initialize(&g, &|_| 1.0, &|_| 2.0, 0.01).unwrap();
        assert!(f.rho.iter().all(|&r| r == 1.01));
        assert!(f.m.iter().all(|&m| (m - 2.02).abs() < 1e-15));
        let vac = initialize(&g, &|x: f64| if x < 0.5 { 0.0 } else { 1.0 }, &|_| 0.0, 0.01).unwrap();
        assert_eq!(vac.rho[0], 0.01);
        assert!(initialize(&g, &|_| -1.0, &|_| 0.0, 0.01).is_err());
    }

    #[test]
    fn stable_dt_regimes() {
        // GC(1, 1/2) at ρ = 1, w = 2.5: λ₁ = 1.5, λ₂ = 2.
        let model = ModelSpec::gc(1.0, 0.5);
        let g = Grid::new(0.0, 1.0, 100, Boundary::Periodic).unwrap();
        let f = initialize(&g, &|_| 1.0, &|_| 2.5, 0.0).unwrap();
        let cfg = ViscousConfig::new(1e-3, 10.0, 0.0);
        let dt = stable_dt(&model, &g, &f, &cfg).unwrap();
        assert!((dt - 0.45 * 0.01 / 2.0).abs() < 1e-15);
        let cfg = ViscousConfig::new(1.0, 10.0, 0.0);
        let dt = stable_dt(&model, &g, &f, &cfg).unwrap();
        assert!((dt - 0.4 * 1e-4).abs() < 1e-15);
        let cfg = ViscousConfig::new(1e-3, 1e-5, 0.0);
        assert_eq!(stable_dt(&model, &g, &f, &cfg).unwrap(), 1e-5);
    }

    #[test]
    fn constant_state_is_a_fixed_point() {
        let model = ModelSpec::gc(1.0, 0.5);
        let g = periodic(32);
        let f = initialize(&g, &|_| 1.3, &|_| 0.7, 0.0).unwrap();
        let traj = solve_from(&model, &g, f.clone(), &ViscousConfig::new(1e-2, 0.2, 0.1), None).unwrap();
        for (a, b) in traj.last().rho.iter().zip(&f.rho) {
            assert!((a - b).abs() <= 1e-14);
        }
        assert_eq!(traj.snapshots.len(), 3);
        assert_eq!(traj.t_end(), 0.2);
    }

    #[test]
    fn constant_w_is_preserved_and_mass_conserved() {
        let model = ModelSpec::gc(1.0, 0.5);
        let g = periodic(128);
        let f = initialize(&g, &|x: f64| 1.0 + 0.3 * (2.0 * PI * x).sin(), &|_| 2.0, 0.0).unwrap();
        let mass0 = f.mass(g.dx());
        let traj = solve_from(&model, &g, f, &ViscousConfig::new(1e-2, 0.5, 0.25), None).unwrap();
        let last = traj.last();
        for i in 0..g.n_cells {
            assert!((last.w(i) - 2.0).abs() <= 1e-10);
        }
        assert!((last.mass(g.dx()) - mass0).abs() <= 1e-12 * traj.stats.steps as f64);
    }

    #[test]
    fn linear_source_mass_balance() {
        let model = ModelSpec::gc(1.0, 0.5).with_source(LinearSource::exit(0.1));
        let g = periodic(64);
        let f = initialize(&g, &|x: f64| 1.0 + 0.2 * (2.0 * PI * x).cos(), &|x: f64| 1.0 + 0.1 * (2.0 * PI * x).sin(), 0.0).unwrap();
        let mass0 = f.mass(g.dx());
        let traj = solve_from(&model, &g, f, &ViscousConfig::new(1e-2, 1.0, 0.0), None).unwrap();
        // d/dt ∫ρ = −0.1∫ρ exactly under the scheme up to O(dt²) per unit time.
        let expect = mass0 * (-0.1f64).exp();
        assert!((traj.last().mass(g.dx()) - expect).abs() < 1e-6);
    }

    #[test]
    fn region_violation_is_reported() {
        let model = ModelSpec::gc(1.0, 0.5);
        let g = periodic(16);
        let f = initialize(&g, &|_| 1.0, &|_| 2.0, 0.0).unwrap();
        let region = RegionSpec { c1_low: 0.0, c2_high: 1.0 };
        match solve_from(&model, &g, f, &ViscousConfig::new(1e-2, 0.1, 0.0), Some(region)) {
            Err(Error::RegionViolation { g2, .. }) => assert!((g2 - 1.0).abs() < 1e-12),
            other => panic!("expected region violation, got {other:?}"),
        }
    }

    #[test]
    fn blowup_names_the_cell() {
        let g = periodic(16);
        let mut f = initialize(&g, &|_| 1.0, &|_| 0.0, 0.0).unwrap();
        f.rho[5] = f64::NAN;
        match check_field(&g, &f) {
            Err(Error::Blowup { cell, .. }) => assert_eq!(cell, 5),
            other => panic!("{other:?}"),
        }
    }
}
