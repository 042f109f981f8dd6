use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

use kk_core::characteristics::{eigenstructure, riemann_invariants};
use kk_core::diff::{d1_5pt, d2_5pt};
use kk_core::entropy::{make_pair, pair_residual, EntropyProfile};
use kk_core::grid::{Boundary, Field, Grid, Trajectory, Window};
use kk_core::model::{audit_conditions, builtin_models, SamplePlan};
use kk_core::young::{empirical_measure, moment, tartar_residual, BinSpec, EmpiricalMeasure};
use kk_core::State;

fn model_index() -> impl Strategy<Value = usize> {
    0..builtin_models().len()
}

fn rho_w() -> impl Strategy<Value = (f64, f64)> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(lr, w)| (lr.exp(), w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn velocity_is_phi_minus_p(k in model_index(), (rho, w) in rho_w()) {
        let m = &builtin_models()[k];
        let v = m.velocity(rho, w).unwrap();
        prop_assert_eq!(v.to_bits(), (m.velocity.value(w) - m.pressure.value(rho)).to_bits());
    }

    #[test]
    fn analytic_derivatives_match_differences(k in model_index(), (rho, w) in rho_w()) {
        let m = &builtin_models()[k];
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
        let h = 1e-3 * rho;
        prop_assert!(rel(m.pressure.d1(rho), d1_5pt(|r| m.pressure.value(r), rho, h)) <= 1e-6);
        prop_assert!(rel(m.pressure.d2(rho), d2_5pt(|r| m.pressure.value(r), rho, h)) <= 1e-6);
        prop_assert!(rel(m.velocity.d1(w), d1_5pt(|z| m.velocity.value(z), w, 1e-3)) <= 1e-6);
        prop_assert!(rel(m.velocity.d2(w), d2_5pt(|z| m.velocity.value(z), w, 1e-3)) <= 1e-6);
    }

    #[test]
    fn z_is_constant_along_r2_and_w_along_r1(k in model_index(), (rho, w) in rho_w()) {
        let m = &builtin_models()[k];
        let s = State::from_rho_w(rho, w).unwrap();
        let es = eigenstructure(m, s).unwrap();
        let along = |r: [f64; 2], pick: fn((f64, f64)) -> f64| {
            let h = 1e-4 * rho / r[0].abs().max(r[1].abs());
            d1_5pt(|t| pick(riemann_invariants(m, State::new(rho + t * r[0], s.m + t * r[1]).unwrap()).unwrap()), 0.0, h)
        };
        // W is the invariant of the first family, Z of the second.
        prop_assert!(along(es.r1, |p| p.0).abs() <= 1e-7);
        prop_assert!(along(es.r2, |p| p.1).abs() <= 1e-7);
    }

    #[test]
    fn entropy_pairs_are_consistent(k in model_index(), (rho, w) in rho_w(), which in 0usize..4) {
        let m = &builtin_models()[k];
        let profile = [EntropyProfile::One, EntropyProfile::Z, EntropyProfile::ZSquared, EntropyProfile::Exp][which];
        let pair = make_pair(profile, m.w_domain);
        prop_assert!(pair_residual(&pair, m, State::from_rho_w(rho, w).unwrap()).unwrap() <= 1e-7);
    }

    #[test]
    fn dirac_measures_have_no_tartar_residual(k in model_index(), (rho, w) in rho_w()) {
        let bins = BinSpec { rho_lo: 0.0, rho_hi: 25.0, w_lo: -3.0, w_hi: 3.0, n_rho: 12, n_w: 12 };
        let win = Window { x_lo: 0.0, x_hi: 1.0, t_lo: 0.0, t_hi: 1.0 };
        let m = EmpiricalMeasure::from_atoms(bins, &[(rho, w, 0.7)], win).unwrap();
        prop_assert!(tartar_residual(&m, &builtin_models()[k]) <= 1e-12);
    }

    #[test]
    fn residual_ignores_atom_order(seed in any::<u64>()) {
        let bins = BinSpec { rho_lo: 0.0, rho_hi: 4.0, w_lo: -2.0, w_hi: 2.0, n_rho: 8, n_w: 8 };
        let win = Window { x_lo: 0.0, x_hi: 1.0, t_lo: 0.0, t_hi: 1.0 };
        let mut atoms: Vec<(f64, f64, f64)> = (0..9)
            .map(|i| {
                let u = ((seed >> (i * 3)) & 7) as f64;
                (0.3 + 0.4 * u, -1.5 + 0.35 * i as f64, 1.0 + u)
            })
            .collect();
        let model = &builtin_models()[0];
        let a = tartar_residual(&EmpiricalMeasure::from_atoms(bins, &atoms, win).unwrap(), model);
        atoms.reverse();
        atoms.rotate_left((seed % 9) as usize);
        let b = tartar_residual(&EmpiricalMeasure::from_atoms(bins, &atoms, win).unwrap(), model);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn audit_is_deterministic() {
    for m in builtin_models() {
        let plan = SamplePlan::for_model(&m, 1000);
        let a = audit_conditions(&m, &plan, 1.0).unwrap();
        let b = audit_conditions(&m, &SamplePlan::for_model(&m, 1000), 1.0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn measure_of_a_window_is_the_mixture_of_its_halves() {
    let g = Grid::new(0.0, 1.0, 32, Boundary::Periodic).unwrap();
    let snaps: Vec<Field> = (0..5)
        .map(|k| Field {
            rho: (0..32).map(|i| 1.0 + 0.5 * ((i * 7 + k * 3) % 11) as f64 / 11.0).collect(),
            m: (0..32).map(|i| 0.3 * ((i + k) % 5) as f64).collect(),
            t: 0.25 * k as f64,
        })
        .collect();
    let traj = Trajectory::from_snapshots(g, 0.0, snaps).unwrap();
    let bins = BinSpec::covering(std::slice::from_ref(&traj), 10, 10).unwrap();
    let all = Window { x_lo: 0.0, x_hi: 1.0, t_lo: 0.0, t_hi: 1.0 };
    let left = Window { x_hi: 0.5, ..all };
    let right = Window { x_lo: 0.5, ..all };
    let m = |w: &Window| empirical_measure(std::slice::from_ref(&traj), w, &bins).unwrap().remove(0);
    let (ma, ml, mr) = (m(&all), m(&left), m(&right));
    for obs in [|r: f64, _w: f64| r, |r: f64, w: f64| r * w, |_r: f64, w: f64| w * w] {
        assert_relative_eq!(moment(&ma, obs), 0.5 * moment(&ml, obs) + 0.5 * moment(&mr, obs), max_relative = 1e-10);
    }
    assert_abs_diff_eq!(ma.total(), 1.0, epsilon = 1e-12);
}
