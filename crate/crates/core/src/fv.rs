//! First-order finite volumes for the inviscid balance system and for the
//! scalar balance law obtained by freezing w.
//!
//! Both use the Rusanov flux with face speed max(a_L, a_R), where a is
//! max(|λ₁|, |λ₂|) for the system and [`ScalarFlux::speed_bound`] for the
//! scalar law, and Strang splitting for sources.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{l1_distance, snapshot_times, Field, Grid, RunStats, Trajectory};
use crate::model::{ModelSpec, ScalarFlux};
use crate::profile::Profile;
use crate::scenario::Scenario;
use crate::viscous::{check_field, max_wave_speed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    #[default]
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FVConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub record_every: f64,
    pub splitting: Splitting,
}

impl FVConfig {
    pub fn new(t_end: f64, record_every: f64) -> Self {
        Self {
            cfl: 0.45,
            t_end,
            record_every,
            splitting: Splitting::Strang,
        }
    }

    pub fn for_scenario(scenario: &Scenario) -> Self {
        Self {
            cfl: scenario.cfl,
            ..Self::new(scenario.t_end, scenario.record_every)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// Initial field without the viscous lift: ρ = ρ₀, m = ρ₀·w₀.
pub fn initial_field(grid: &Grid, rho0: &impl Profile, w0: &impl Profile) -> Result<Field> {
    crate::viscous::initialize(grid, rho0, w0, 0.0)
}

fn next_dt(t: f64, target: f64, dt: f64) -> f64 {
    if t + dt >= target || target - (t + dt) < 1e-12 * target {
        target - t
    } else {
        dt
    }
}

fn snap_time(t: f64, target: f64) -> f64 {
    if (t - target).abs() <= 1e-12 * target.max(1.0) {
        target
    } else {
        t
    }
}

/// Exact for linear sources, Heun otherwise.
fn source_substep(model: &ModelSpec, field: &mut Field, tau: f64) {
    if let Some(rate) = model.source.linear_rate() {
        if rate == 0.0 {
            return;
        }
        let factor = (rate * tau).exp();
        for i in 0..field.len() {
            field.rho[i] *= factor;
            field.m[i] *= factor;
        }
        return;
    }
    for i in 0..field.len() {
        let (r, m) = (field.rho[i], field.m[i]);
        let (k1r, k1m) = (model.f(r, m / r), model.g(r, m / r));
        let (r1, m1) = (r + tau * k1r, m + tau * k1m);
        let (k2r, k2m) = (model.f(r1, m1 / r1), model.g(r1, m1 / r1));
        field.rho[i] = r + 0.5 * tau * (k1r + k2r);
        field.m[i] = m + 0.5 * tau * (k1m + k2m);
    }
}

fn rusanov_step(model: &ModelSpec, grid: &Grid, field: &Field, dt: f64) -> Field {
    let n = field.len();
    let mut fr = vec![0.0; n];
    let mut fm = vec![0.0; n];
    let mut a = vec![0.0; n];
    for i in 0..n {
        let (r, m) = (field.rho[i], field.m[i]);
        let phi = model.phi(r, m / r);
        fr[i] = r * phi;
        fm[i] = m * phi;
        let l2 = phi - r * model.pressure.d1(r);
        a[i] = phi.abs().max(l2.abs());
    }
    // Face k sits between cell k and its right neighbour.
    let mut hr = vec![0.0; n];
    let mut hm = vec![0.0; n];
    for k in 0..n {
        let j = grid.right(k);
        let s = a[k].max(a[j]);
        hr[k] = 0.5 * (fr[k] + fr[j]) - 0.5 * s * (field.rho[j] - field.rho[k]);
        hm[k] = 0.5 * (fm[k] + fm[j]) - 0.5 * s * (field.m[j] - field.m[k]);
    }
    let lam = dt / grid.dx();
    let mut out = Field {
        rho: vec![0.0; n],
        m: vec![0.0; n],
        t: field.t + dt,
    };
    for i in 0..n {
        let l = grid.left(i);
        // Outflow: the ghost face left of cell 0 carries the flux of cell 0.
        let (lr, lm) = if l == i { (fr[i], fm[i]) } else { (hr[l], hm[l]) };
        let (rr, rm) = if grid.right(i) == i { (fr[i], fm[i]) } else { (hr[i], hm[i]) };
        out.rho[i] = field.rho[i] - lam * (rr - lr);
        out.m[i] = field.m[i] - lam * (rm - lm);
    }
    out
}

/// Inviscid system run from a given field. Cells with ρ below the model floor
/// are recorded as floor events and left untouched.
pub fn solve_fv_from(model: &ModelSpec, grid: &Grid, initial: Field, config: &FVConfig) -> Result<Trajectory> {
    config.validate()?;
    grid.validate()?;
    check_field(grid, &initial)?;
    let rho_floor = model.rho_domain.lo;
    let times = snapshot_times(config.t_end, config.record_every);
    let mut stats = RunStats::start(&initial);
    stats.record_floor(&initial, rho_floor);
    let mut snapshots = vec![initial.clone()];
    let mut field = initial;
    for &target in times.iter().skip(1) {
        while field.t < target {
            let s = max_wave_speed(model, grid, &field)?;
            let dt_cfl = if s > 0.0 { config.cfl * grid.dx() / s } else { f64::INFINITY };
            let dt = next_dt(field.t, target, dt_cfl);
            debug_assert!(dt * s <= grid.dx() * (1.0 + 1e-12), "CFL violated");
            let mut work = field.clone();
            source_substep(model, &mut work, 0.5 * dt);
            let mut next = rusanov_step(model, grid, &work, dt);
            source_substep(model, &mut next, 0.5 * dt);
            next.t = snap_time(field.t + dt, target);
            check_field(grid, &next)?;
            field = next;
            stats.steps += 1;
            stats.observe(&field);
            stats.record_floor(&field, rho_floor);
        }
        snapshots.push(field.clone());
    }
    Ok(Trajectory {
        grid: *grid,
        epsilon: 0.0,
        snapshots,
        stats,
    })
}

pub fn solve_fv(model: &ModelSpec, scenario: &Scenario, config: &FVConfig) -> Result<Trajectory> {
    let field = initial_field(&scenario.grid, &scenario.rho0, &scenario.w0)?;
    solve_fv_from(model, &scenario.grid, field, config)
}

/// Source term of a scalar balance law.
#[derive(Clone)]
pub enum ScalarSource {
    None,
    /// f(ρ) = rate·ρ, integrated exactly.
    Linear(f64),
    General(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ScalarSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarSource::None => f.write_str("None"),
            ScalarSource::Linear(r) => write!(f, "Linear({r})"),
            ScalarSource::General(_) => f.write_str("General(..)"),
        }
    }
}

impl ScalarSource {
    /// The source of `model` at a frozen w.
    pub fn frozen(model: &ModelSpec, w: f64) -> Self {
        match model.source.linear_rate() {
            Some(0.0) => ScalarSource::None,
            Some(r) => ScalarSource::Linear(r),
            None => {
                let m = model.clone();
                ScalarSource::General(Arc::new(move |rho| m.f(rho, w)))
            }
        }
    }

    fn apply(&self, rho: &mut [f64], tau: f64) {
        match self {
            ScalarSource::None => {}
            ScalarSource::Linear(rate) => {
                let factor = (rate * tau).exp();
                rho.iter_mut().for_each(|r| *r *= factor);
            }
            ScalarSource::General(f) => {
                for r in rho.iter_mut() {
                    let k1 = f(*r);
                    let k2 = f(*r + tau * k1);
                    *r += 0.5 * tau * (k1 + k2);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub rho: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTrajectory {
    pub grid: Grid,
    pub snapshots: Vec<ScalarField>,
    pub steps: usize,
}

impl ScalarTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &ScalarField {
        self.snapshots.last().expect("scalar trajectory has no snapshots")
    }
}

fn scalar_rusanov(h: &dyn ScalarFlux, grid: &Grid, rho: &[f64], dt: f64) -> Vec<f64> {
    let n = rho.len();
    let flux: Vec<f64> = rho.iter().map(|&r| h.h(r)).collect();
    let a: Vec<f64> = rho.iter().map(|&r| h.speed_bound(r)).collect();
    let face: Vec<f64> = (0..n)
        .map(|k| {
            let j = grid.right(k);
            0.5 * (flux[k] + flux[j]) - 0.5 * a[k].max(a[j]) * (rho[j] - rho[k])
        })
        .collect();
    let lam = dt / grid.dx();
    (0..n)
        .map(|i| {
            let l = grid.left(i);
            let fl = if l == i { flux[i] } else { face[l] };
            let fr = if grid.right(i) == i { flux[i] } else { face[i] };
            rho[i] - lam * (fr - fl)
        })
        .collect()
}

/// Scalar Rusanov scheme for ρ_t + h(ρ)_x = f(ρ) with Strang splitting.
pub fn solve_scalar(
    h: &dyn ScalarFlux,
    source: &ScalarSource,
    rho0: &impl Profile,
    grid: &Grid,
    config: &FVConfig,
) -> Result<ScalarTrajectory> {
    config.validate()?;
    grid.validate()?;
    let mut rho: Vec<f64> = grid.centers().into_iter().map(|x| rho0.at(x)).collect();
    if let Some((i, r)) = rho.iter().enumerate().find(|(_, r)| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::Input(format!("initial rho = {r} at cell {i} must be >= 0")));
    }
    let times = snapshot_times(config.t_end, config.record_every);
    let mut t = 0.0;
    let mut steps = 0;
    let mut snapshots = vec![ScalarField { rho: rho.clone(), t }];
    for &target in times.iter().skip(1) {
        while t < target {
            let mut s: f64 = 0.0;
            for (i, &r) in rho.iter().enumerate() {
                let a = h.speed_bound(r);
                if !a.is_finite() {
                    return Err(Error::Blowup {
                        t,
                        cell: i,
                        x: grid.center(i),
                        reason: format!("non-finite scalar wave speed at rho = {r}"),
                    });
                }
                s = s.max(a);
            }
            let dt_cfl = if s > 0.0 { config.cfl * grid.dx() / s } else { f64::INFINITY };
            let dt = next_dt(t, target, dt_cfl);
            source.apply(&mut rho, 0.5 * dt);
            rho = scalar_rusanov(h, grid, &rho, dt);
            source.apply(&mut rho, 0.5 * dt);
            t = snap_time(t + dt, target);
            steps += 1;
            if let Some((i, r)) = rho.iter().enumerate().find(|(_, r)| !r.is_finite()) {
                return Err(Error::Blowup {
                    t,
                    cell: i,
                    x: grid.center(i),
                    reason: format!("non-finite density {r}"),
                });
            }
        }
        snapshots.push(ScalarField { rho: rho.clone(), t });
    }
    Ok(ScalarTrajectory {
        grid: *grid,
        snapshots,
        steps,
    })
}

/// Per-snapshot L¹ distance between the density of a system run with
/// w₀ ≡ `w_const` and a scalar run.
pub fn reduction_gap(
    model: &ModelSpec,
    w_const: f64,
    system: &Trajectory,
    scalar: &ScalarTrajectory,
) -> Result<Vec<f64>> {
    model.check_domain(model.rho_domain.lo, w_const)?;
    if !system.grid.same_as(&scalar.grid) {
        return Err(Error::GridMismatch(format!(
            "system grid {:?} differs from scalar grid {:?}",
            system.grid, scalar.grid
        )));
    }
    if system.snapshots.len() != scalar.snapshots.len() {
        return Err(Error::GridMismatch(format!(
            "{} system snapshots vs {} scalar snapshots",
            system.snapshots.len(),
            scalar.snapshots.len()
        )));
    }
    let dx = system.grid.dx();
    system
        .snapshots
        .iter()
        .zip(&scalar.snapshots)
        .map(|(a, b)| {
            if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
                return Err(Error::GridMismatch(format!("snapshot times {} and {} differ", a.t, b.t)));
            }
            Ok(l1_distance(&a.rho, &b.rho, dx))
        })
        .collect()
}
