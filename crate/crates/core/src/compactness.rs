//! Grid functionals used to watch an ε-sequence: √ε-weighted gradient norms,
//! variation of the Riemann invariants, weak residuals of selected balance
//! laws, and the product bound on ε·η_xx.
//!
//! Space-time integrals use right-endpoint sums over snapshot intervals, so
//! the t = 0 data never enters them.

use serde::{Deserialize, Serialize};

use crate::characteristics::invariants;
use crate::entropy::{make_pair, EntropyFluxPair, EntropyProfile, EntropySummary};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, Trajectory, Window};
use crate::model::ModelSpec;
use crate::testfn::{pairings, PairingDensities, TestFunctionLibrary};

/// Snapshot indices k ≥ 1 of the window together with the interval length
/// t_k − t_{k−1}.
fn interval_weights(traj: &Trajectory, window: &Window) -> Result<Vec<(usize, f64)>> {
    let idx = window.snapshots(traj)?;
    let out: Vec<(usize, f64)> = idx
        .into_iter()
        .filter(|&k| k > 0)
        .filter_map(|k| {
            let dt = traj.snapshots[k].t - traj.snapshots[k - 1].t;
            let lo_ok = traj.snapshots[k - 1].t >= window.t_lo - 1e-12 * traj.t_end().max(1.0);
            lo_ok.then_some((k, dt))
        })
        .collect();
    if out.is_empty() {
        return Err(Error::EmptyWindow(format!(
            "no snapshot interval inside [{}, {}]",
            window.t_lo, window.t_hi
        )));
    }
    Ok(out)
}

#[inline]
fn central(grid: &Grid, v: &[f64], i: usize) -> f64 {
    (v[grid.right(i)] - v[grid.left(i)]) / (2.0 * grid.dx())
}

/// (√ε‖ρ_x‖, √ε‖m_x‖) in L² of the space-time window.
pub fn grad_norms(traj: &Trajectory, window: &Window) -> Result<(f64, f64)> {
    let cells = window.cells(&traj.grid)?;
    let steps = interval_weights(traj, window)?;
    let dx = traj.grid.dx();
    let (mut sr, mut sm) = (0.0, 0.0);
    for (k, dt) in steps {
        let s = &traj.snapshots[k];
        let (mut rr, mut rm) = (0.0, 0.0);
        for i in cells.clone() {
            rr += central(&traj.grid, &s.rho, i).powi(2);
            rm += central(&traj.grid, &s.m, i).powi(2);
        }
        sr += dt * rr * dx;
        sm += dt * rm * dx;
    }
    let se = traj.epsilon.sqrt();
    Ok((se * sr.sqrt(), se * sm.sqrt()))
}

/// Per-snapshot √ε‖ρ_x(·, t)‖ in L² of the window's x-range.
pub fn grad_rho_series(traj: &Trajectory, window: &Window) -> Result<Vec<f64>> {
    let cells = window.cells(&traj.grid)?;
    let dx = traj.grid.dx();
    let se = traj.epsilon.sqrt();
    Ok(traj
        .snapshots
        .iter()
        .map(|s| {
            let sum: f64 = cells.clone().map(|i| central(&traj.grid, &s.rho, i).powi(2)).sum();
            se * (sum * dx).sqrt()
        })
        .collect())
}

/// Σ|v_{i+1} − v_i|, wrapping around on periodic grids.
pub fn total_variation(grid: &Grid, v: &[f64]) -> f64 {
    let n = v.len();
    let mut tv: f64 = v.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
    if grid.boundary == Boundary::Periodic && n > 1 {
        tv += (v[0] - v[n - 1]).abs();
    }
    tv
}

/// TV of W = Φ(w) − P(ρ) per snapshot.
pub fn tv_invariant(traj: &Trajectory, model: &ModelSpec) -> Vec<f64> {
    traj.snapshots
        .iter()
        .map(|s| {
            let w: Vec<f64> = (0..s.len()).map(|i| invariants(model, s.rho[i], s.m[i]).0).collect();
            total_variation(&traj.grid, &w)
        })
        .collect()
}

/// ‖w_x‖_{L¹} = Σ|Δw| per snapshot.
pub fn wx_l1(traj: &Trajectory) -> Vec<f64> {
    traj.snapshots
        .iter()
        .map(|s| total_variation(&traj.grid, &s.w_values()))
        .collect()
}

/// ∫∫ρ|w − w₀| over the window, together with the Hölder bound
/// max ρ · max|w − w₀| · |window|.
pub fn rho_w_deviation(traj: &Trajectory, w0: &[f64], window: &Window) -> Result<(f64, f64)> {
    if w0.len() != traj.grid.n_cells {
        return Err(Error::GridMismatch(format!(
            "w0 has {} entries, grid has {} cells",
            w0.len(),
            traj.grid.n_cells
        )));
    }
    let cells = window.cells(&traj.grid)?;
    let steps = interval_weights(traj, window)?;
    let dx = traj.grid.dx();
    let (mut total, mut max_rho, mut max_dev, mut area) = (0.0, 0.0f64, 0.0f64, 0.0);
    for (k, dt) in steps {
        let s = &traj.snapshots[k];
        let mut row = 0.0;
        for i in cells.clone() {
            let dev = (s.w(i) - w0[i]).abs();
            row += s.rho[i] * dev;
            max_rho = max_rho.max(s.rho[i]);
            max_dev = max_dev.max(dev);
        }
        total += dt * row * dx;
        area += dt * cells.len() as f64 * dx;
    }
    Ok((total, max_rho * max_dev * area))
}

/// The balance laws whose weak residuals are tracked across ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// ρ_t + (ρΦ(w) − ρP(ρ))_x = f.
    Mass,
    /// g(ρ)_t + (∫_{ρ_min}^ρ g'(s)k'(s)ds + g(ρ)Φ(w))_x = g'(ρ)f with
    /// g = ρ²/2 and k(s) = −sP(s), the pressure part of the flux.
    Weighted,
    /// (ρΦ(w))_t + (ρΦ(w)φ)_x = ∇η·H for η = ρΦ(w).
    Transport,
}

impl Functional {
    pub fn label(&self) -> &'static str {
        match self {
            Functional::Mass => "mass",
            Functional::Weighted => "weighted",
            Functional::Transport => "transport",
        }
    }

    pub fn all() -> [Functional; 3] {
        [Functional::Mass, Functional::Weighted, Functional::Transport]
    }
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * GL8.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// ∫_{ρ_min}^ρ s·(−P(s) − sP'(s)) ds on geometric panels [ρ_min·2^j, ρ_min·2^{j+1}].
struct WeightedPrimitive<'a> {
    model: &'a ModelSpec,
    lo: f64,
    cumulative: Vec<f64>,
}

impl<'a> WeightedPrimitive<'a> {
    fn new(model: &'a ModelSpec) -> Self {
        let lo = model.rho_domain.lo;
        let n_panels = ((model.rho_domain.hi / lo).log2().ceil() as usize).max(1) + 1;
        let mut cumulative = vec![0.0];
        let mut acc = 0.0;
        for j in 0..n_panels {
            let a = lo * 2f64.powi(j as i32);
            acc += gauss_legendre(&|s| Self::integrand(model, s), a, 2.0 * a);
            cumulative.push(acc);
        }
        Self { model, lo, cumulative }
    }

    fn integrand(model: &ModelSpec, s: f64) -> f64 {
        s * (-model.pressure.value(s) - s * model.pressure.d1(s))
    }

    fn at(&self, rho: f64) -> f64 {
        if rho <= self.lo {
            return -gauss_legendre(&|s| Self::integrand(self.model, s), rho, self.lo);
        }
        let j = ((rho / self.lo).log2().floor() as usize).min(self.cumulative.len() - 1);
        let a = self.lo * 2f64.powi(j as i32);
        self.cumulative[j] + gauss_legendre(&|s| Self::integrand(self.model, s), a, rho)
    }
}

/// Densities (A, B, S) of a functional on every snapshot.
fn functional_densities(traj: &Trajectory, model: &ModelSpec, functional: Functional) -> PairingDensities {
    let n = traj.grid.n_cells;
    let mut dens = PairingDensities {
        a: Vec::with_capacity(traj.snapshots.len()),
        b: Vec::with_capacity(traj.snapshots.len()),
        s: Vec::with_capacity(traj.snapshots.len()),
    };
    let primitive = (functional == Functional::Weighted).then(|| WeightedPrimitive::new(model));
    for snap in &traj.snapshots {
        let (mut a, mut b, mut s) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let (r, m) = (snap.rho[i], snap.m[i]);
            let w = m / r;
            let phi = model.phi(r, w);
            match functional {
                Functional::Mass => {
                    a[i] = r;
                    b[i] = r * phi;
                    s[i] = model.f(r, w);
                }
                Functional::Weighted => {
                    let g = 0.5 * r * r;
                    a[i] = g;
                    b[i] = primitive.as_ref().map_or(0.0, |p| p.at(r)) + g * model.velocity.value(w);
                    s[i] = r * model.f(r, w);
                }
                Functional::Transport => {
                    let big_phi = model.velocity.value(w);
                    let dphi = model.velocity.d1(w);
                    a[i] = r * big_phi;
                    b[i] = r * big_phi * phi;
                    // ∇(ρΦ(m/ρ)) = (Φ − wΦ', Φ')
                    s[i] = (big_phi - w * dphi) * model.f(r, w) + dphi * model.g(r, w);
                }
            }
        }
        dens.a.push(a);
        dens.b.push(b);
        dens.s.push(s);
    }
    dens
}

/// One row of a decay table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub epsilon: f64,
    pub functional: String,
    pub value: f64,
}

/// max_ϕ |∫∫(Aϕ_t + Bϕ_x + Sϕ) + ∫A(·,0)ϕ(·,0)| for one trajectory.
pub fn weak_residual(
    traj: &Trajectory,
    model: &ModelSpec,
    functional: Functional,
    library: &TestFunctionLibrary,
) -> Result<f64> {
    let dens = functional_densities(traj, model, functional);
    let values = pairings(traj, &dens, library, true)?;
    Ok(values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// Weak residuals of `functional` for each member of an ε-sequence.
pub fn weak_residual_decay(
    trajectories: &[Trajectory],
    model: &ModelSpec,
    functional: Functional,
    library: &TestFunctionLibrary,
) -> Result<Vec<DecayRow>> {
    check_common_grid(trajectories)?;
    trajectories
        .iter()
        .map(|t| {
            Ok(DecayRow {
                epsilon: t.epsilon,
                functional: functional.label().into(),
                value: weak_residual(t, model, functional, library)?,
            })
        })
        .collect()
}

/// Errors unless all trajectories share grid and snapshot times.
pub fn check_common_grid(trajectories: &[Trajectory]) -> Result<()> {
    let Some(first) = trajectories.first() else {
        return Ok(());
    };
    let times = first.times();
    for t in &trajectories[1..] {
        if !t.grid.same_as(&first.grid) {
            return Err(Error::GridMismatch(format!("grid {:?} differs from {:?}", t.grid, first.grid)));
        }
        let other = t.times();
        if other.len() != times.len() || other.iter().zip(&times).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0)) {
            return Err(Error::GridMismatch("snapshot times differ between trajectories".into()));
        }
    }
    Ok(())
}

/// √ε‖η‖_{L^∞} · ‖√ε η_x‖_{L²} over the window.
pub fn w12_decay(traj: &Trajectory, pair: &dyn EntropyFluxPair, window: &Window) -> Result<f64> {
    let cells = window.cells(&traj.grid)?;
    let steps = interval_weights(traj, window)?;
    let dx = traj.grid.dx();
    let n = traj.grid.n_cells;
    let (mut sup, mut l2) = (0.0f64, 0.0);
    for (k, dt) in steps {
        let s = &traj.snapshots[k];
        let eta: Vec<f64> = (0..n).map(|i| pair.eta(s.rho[i], s.m[i])).collect();
        let mut row = 0.0;
        for i in cells.clone() {
            sup = sup.max(eta[i].abs());
            row += central(&traj.grid, &eta, i).powi(2);
        }
        l2 += dt * row * dx;
    }
    let eps = traj.epsilon;
    Ok(eps.sqrt() * sup * (eps * l2).sqrt())
}

/// ‖∇η·H‖_{L^∞} over the window.
pub fn source_sup(traj: &Trajectory, pair: &dyn EntropyFluxPair, model: &ModelSpec, window: &Window) -> Result<f64> {
    let cells = window.cells(&traj.grid)?;
    let idx = window.snapshots(traj)?;
    let mut sup = 0.0f64;
    for k in idx {
        let s = &traj.snapshots[k];
        for i in cells.clone() {
            let (r, m) = (s.rho[i], s.m[i]);
            let w = m / r;
            let ge = pair.grad_eta(r, m);
            sup = sup.max((ge[0] * model.f(r, w) + ge[1] * model.g(r, w)).abs());
        }
    }
    Ok(sup)
}

/// One entry of the Tartar table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TartarRow {
    pub epsilon: f64,
    /// max over patches of |T|.
    pub max_abs: f64,
    /// mean over patches of |T|.
    pub mean_abs: f64,
    pub patches: usize,
}

/// w12 surrogate for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W12Row {
    pub pair: String,
    pub value: f64,
}

/// Every scalar functional for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub scenario: String,
    pub model: String,
    pub epsilon: f64,
    pub window: Window,
    pub grad_rho_l2: f64,
    pub grad_m_l2: f64,
    pub dissipation: Vec<EntropySummary>,
    pub w12: Vec<W12Row>,
    pub source_sup: f64,
    pub times: Vec<f64>,
    #[serde(rename = "tv_W")]
    pub tv_w: Vec<f64>,
    pub wx_l1: Vec<f64>,
    pub rho_w_integral: f64,
    pub rho_w_bound: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub max_abs_w: f64,
    pub floor_events: usize,
    pub weak_residuals: Vec<DecayRow>,
    pub tartar: Vec<TartarRow>,
    /// Reminders on how a functional is read.
    pub notes: Vec<String>,
}

pub const WEIGHTED_NOTE: &str =
    "weighted functional: g(rho) = rho^2/2, flux integrand g'(s)k'(s) with k(s) = -s P(s), lower limit rho_min";

/// Profiles whose D(ε) is reported in every diagnostics report.
pub fn report_profiles() -> Vec<EntropyProfile> {
    vec![EntropyProfile::ZSquared, EntropyProfile::Exp]
}

/// Builds the per-run report. Tartar rows are left empty for the caller.
pub fn diagnostics(
    scenario: &str,
    traj: &Trajectory,
    model: &ModelSpec,
    w0: &[f64],
    window: Option<Window>,
    library: &TestFunctionLibrary,
) -> Result<DiagnosticsReport> {
    let window = window.unwrap_or_else(|| Window::full(traj));
    let (grad_rho_l2, grad_m_l2) = grad_norms(traj, &window)?;
    let mut dissipation = Vec::new();
    let mut w12 = Vec::new();
    for profile in report_profiles() {
        let pair = make_pair(profile, model.w_domain);
        let prod = crate::entropy::entropy_production(traj, &pair, model, Some(window))?;
        dissipation.push(EntropySummary {
            pair: pair.label(),
            d: prod.d,
            worst_pairing: None,
            epsilon: traj.epsilon,
        });
        w12.push(W12Row {
            pair: pair.label(),
            value: w12_decay(traj, &pair, &window)?,
        });
    }
    let sq = make_pair(EntropyProfile::ZSquared, model.w_domain);
    let (rho_w_integral, rho_w_bound) = rho_w_deviation(traj, w0, &window)?;
    let mut weak_residuals = Vec::new();
    for f in Functional::all() {
        weak_residuals.push(DecayRow {
            epsilon: traj.epsilon,
            functional: f.label().into(),
            value: weak_residual(traj, model, f, library)?,
        });
    }
    Ok(DiagnosticsReport {
        scenario: scenario.into(),
        model: model.name.clone(),
        epsilon: traj.epsilon,
        window,
        grad_rho_l2,
        grad_m_l2,
        dissipation,
        w12,
        source_sup: source_sup(traj, &sq, model, &window)?,
        times: traj.times(),
        tv_w: tv_invariant(traj, model),
        wx_l1: wx_l1(traj),
        rho_w_integral,
        rho_w_bound,
        min_rho: traj.stats.min_rho,
        max_rho: traj.stats.max_rho,
        max_abs_w: traj.stats.max_abs_w,
        floor_events: traj.stats.floor_event_count,
        weak_residuals,
        tartar: Vec::new(),
        notes: vec![WEIGHTED_NOTE.into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::model::laws::{ConstantVelocity, NoPressure, NoSource};
    use crate::viscous::{initialize, solve_from, ViscousConfig};

    fn constant_traj(n: usize) -> Trajectory {
        let g = Grid::new(0.0, 1.0, n, Boundary::Periodic).unwrap();
        let snaps = (0..=40)
            .map(|k| Field { rho: vec![1.5; n], m: vec![3.0; n], t: 0.01 * k as f64 })
            .collect();
        Trajectory::from_snapshots(g, 1e-2, snaps).unwrap()
    }

    #[test]
    fn constant_trajectory_functionals_vanish() {
        let traj = constant_traj(32);
        let gc = ModelSpec::gc(1.0, 0.5);
        let win = Window::full(&traj);
        assert_eq!(grad_norms(&traj, &win).unwrap(), (0.0, 0.0));
        assert!(tv_invariant(&traj, &gc).iter().all(|&v| v == 0.0));
        assert!(wx_l1(&traj).iter().all(|&v| v == 0.0));
        let pair = make_pair(EntropyProfile::ZSquared, gc.w_domain);
        assert_eq!(w12_decay(&traj, &pair, &win).unwrap(), 0.0);
        let (dev, _) = rho_w_deviation(&traj, &vec![2.0; 32], &win).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn tv_of_monotone_profile() {
        let g = Grid::new(0.0, 1.0, 50, Boundary::Outflow).unwrap();
        let v: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        assert!((total_variation(&g, &v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heat_kernel_gradients_decay() {
        let heat = ModelSpec::new("heat", ConstantVelocity(0.0), NoPressure, NoSource);
        let g = Grid::new(0.0, 1.0, 128, Boundary::Periodic).unwrap();
        let f = initialize(&g, &|x: f64| if (0.3..0.6).contains(&x) { 2.0 } else { 1.0 }, &|_| 0.0, 0.0).unwrap();
        let traj = solve_from(&heat, &g, f, &ViscousConfig::new(1e-2, 0.2, 0.02), None).unwrap();
        let series = grad_rho_series(&traj, &Window::full(&traj)).unwrap();
        assert!(series.windows(2).all(|p| p[1] <= p[0] + 1e-14), "{series:?}");
    }

    #[test]
    fn window_shrinking_never_increases() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let g = Grid::new(0.0, 1.0, 128, Boundary::Periodic).unwrap();
        let f = initialize(&g, &|x: f64| 1.0 + 0.3 * (6.0 * x).sin(), &|x: f64| 1.0 + 0.2 * (6.0 * x).cos(), 0.0).unwrap();
        let traj = solve_from(&gc, &g, f, &ViscousConfig::new(1e-2, 0.1, 0.01), None).unwrap();
        let full = Window::full(&traj);
        let part = Window { x_lo: 0.2, x_hi: 0.6, t_lo: 0.02, t_hi: 0.08 };
        let (a, b) = (grad_norms(&traj, &full).unwrap(), grad_norms(&traj, &part).unwrap());
        assert!(b.0 <= a.0 && b.1 <= a.1);
        let pair = make_pair(EntropyProfile::ZSquared, gc.w_domain);
        assert!(w12_decay(&traj, &pair, &part).unwrap() <= w12_decay(&traj, &pair, &full).unwrap());
    }

    #[test]
    fn weighted_primitive_matches_closed_form() {
        // P = ρ^{-1/2}: −∫ s(P + sP') = −∫ (1/2)s^{1/2} = −(1/3)s^{3/2}.
        let gc = ModelSpec::gc(1.0, 0.5);
        let prim = WeightedPrimitive::new(&gc);
        let lo = gc.rho_domain.lo;
        for &r in &[2e-3f64, 0.7, 1.0, 3.3, 250.0] {
            let exact = -(r.powf(1.5) - lo.powf(1.5)) / 3.0;
            assert!((prim.at(r) - exact).abs() < 1e-12 * (1.0 + exact.abs()), "{r}");
        }
    }

    #[test]
    fn residuals_vanish_away_from_variation() {
        let traj = constant_traj(64);
        let gc = ModelSpec::gc(1.0, 0.5);
        let lib = TestFunctionLibrary::standard(&traj.grid, traj.t_end());
        for f in Functional::all() {
            assert!(weak_residual(&traj, &gc, f, &lib).unwrap() <= 1e-12);
        }
    }
}
