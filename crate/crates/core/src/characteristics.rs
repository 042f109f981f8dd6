//! Eigenstructure, Riemann invariants and invariant-region geometry.
//!
//! In conservative variables U = (ρ, m) the flux is F(U) = φ·U with
//! φ = Φ(m/ρ) − P(ρ), so dF = φ·I + U ⊗ ∇φ is a rank-one update of a
//! multiple of the identity. Its eigenpairs are
//!
//! * λ₁ = φ with r₁ ⊥ ∇φ (a contact: ∇λ₁·r₁ = 0),
//! * λ₂ = φ + U·∇φ = φ − ρP'(ρ) with r₂ = (1, m/ρ).

use serde::{Deserialize, Serialize};

use crate::diff;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::state::State;

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenStructure {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r1: [f64; 2],
    pub r2: [f64; 2],
    pub jac: Mat2,
}

/// Σ = {W ≥ c1_low, Z ≤ c2_high}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    #[serde(rename = "C1")]
    pub c1_low: f64,
    #[serde(rename = "C2")]
    pub c2_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMargins {
    /// G₁ = C₁ − W
    pub g1: f64,
    /// G₂ = Z − C₂
    pub g2: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoBound {
    Finite(f64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBounds {
    pub low: RhoBound,
    pub high: RhoBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionFunction {
    G1,
    G2,
}

/// Slack applied to every `≤ 0` region inequality.
pub const REGION_SLACK: f64 = 1e-10;

/// (W, Z) without domain checks.
#[inline]
pub(crate) fn invariants(model: &ModelSpec, rho: f64, m: f64) -> (f64, f64) {
    let z = m / rho;
    (model.phi(rho, z), z)
}

/// F(ρ, m) = (ρφ, mφ).
pub fn flux(model: &ModelSpec, rho: f64, m: f64) -> [f64; 2] {
    let phi = model.phi(rho, m / rho);
    [rho * phi, m * phi]
}

/// (φ_ρ, φ_m) in conservative variables.
pub fn phi_gradient(model: &ModelSpec, rho: f64, m: f64) -> [f64; 2] {
    let w = m / rho;
    let dphi = model.velocity.d1(w);
    [-(dphi * w) / rho - model.pressure.d1(rho), dphi / rho]
}

fn checked(model: &ModelSpec, s: State) -> Result<()> {
    model.check_domain(s.rho, s.w())
}

pub fn jacobian(model: &ModelSpec, s: State) -> Result<Mat2> {
    checked(model, s)?;
    Ok(jacobian_unchecked(model, s.rho, s.m))
}

pub(crate) fn jacobian_unchecked(model: &ModelSpec, rho: f64, m: f64) -> Mat2 {
    let phi = model.phi(rho, m / rho);
    let [pr, pm] = phi_gradient(model, rho, m);
    [[phi + rho * pr, rho * pm], [m * pr, phi + m * pm]]
}

/// Normalizes to first component 1, or to unit length with a positive second
/// component when the first one vanishes.
fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if v[0].abs() > 1e-12 * n {
        [1.0, v[1] / v[0]]
    } else {
        let s = if v[1] < 0.0 { -1.0 } else { 1.0 };
        [0.0, s * v[1] / n]
    }
}

/// Wave speeds (fast path, no eigenvectors).
#[inline]
pub fn wave_speeds(model: &ModelSpec, rho: f64, m: f64) -> (f64, f64) {
    let phi = model.phi(rho, m / rho);
    (phi, phi - rho * model.pressure.d1(rho))
}

pub fn eigenstructure(model: &ModelSpec, s: State) -> Result<EigenStructure> {
    checked(model, s)?;
    eigenstructure_unchecked(model, s.rho, s.m)
}

fn eigenstructure_unchecked(model: &ModelSpec, rho: f64, m: f64) -> Result<EigenStructure> {
    let jac = jacobian_unchecked(model, rho, m);
    let (lambda1, lambda2) = wave_speeds(model, rho, m);
    let [pr, pm] = phi_gradient(model, rho, m);
    let r1 = if pm.abs() >= 1e-12 {
        [1.0, -pr / pm]
    } else {
        kernel_direction(jac, lambda1).ok_or(Error::DegenerateEigenvector { rho, m })?
    };
    if !(r1[0].is_finite() && r1[1].is_finite()) {
        return Err(Error::DegenerateEigenvector { rho, m });
    }
    Ok(EigenStructure {
        lambda1,
        lambda2,
        r1: normalize(r1),
        r2: [1.0, m / rho],
        jac,
    })
}

/// A nonzero vector in ker(A − λI); any direction when A = λI.
fn kernel_direction(a: Mat2, lambda: f64) -> Option<[f64; 2]> {
    let b = [[a[0][0] - lambda, a[0][1]], [a[1][0], a[1][1] - lambda]];
    let c0 = [-b[0][1], b[0][0]];
    let c1 = [b[1][1], -b[1][0]];
    let n0 = c0[0].hypot(c0[1]);
    let n1 = c1[0].hypot(c1[1]);
    let scale = a.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    if n0.max(n1) <= 1e-14 * scale {
        return Some([1.0, 0.0]);
    }
    let v = if n0 >= n1 { c0 } else { c1 };
    if v[0].is_finite() && v[1].is_finite() {
        Some(v)
    } else {
        None
    }
}

/// (W, Z) = (Φ(m/ρ) − P(ρ), m/ρ).
pub fn riemann_invariants(model: &ModelSpec, s: State) -> Result<(f64, f64)> {
    checked(model, s)?;
    Ok(invariants(model, s.rho, s.m))
}

/// Finite-difference step along direction `r` keeping ρ ± 2h positive.
fn directional_step(rho: f64, m: f64, r: [f64; 2]) -> f64 {
    let mut h = f64::INFINITY;
    if r[0] != 0.0 {
        h = h.min(rho / r[0].abs());
    }
    if r[1] != 0.0 {
        h = h.min(m.abs().max(rho) / r[1].abs());
    }
    1e-3 * h
}

/// (∇λ₁·r₁, ∇λ₂·r₂) by fourth-order differences along the eigenvectors.
/// With the eigenvectors normalized as in [`EigenStructure`], the second
/// value is −(2P' + ρP'').
pub fn characteristic_fields(model: &ModelSpec, s: State) -> Result<(f64, f64)> {
    let es = eigenstructure(model, s)?;
    let along = |r: [f64; 2], pick: fn((f64, f64)) -> f64| {
        let h = directional_step(s.rho, s.m, r);
        diff::d1_5pt(|t| pick(wave_speeds(model, s.rho + t * r[0], s.m + t * r[1])), 0.0, h)
    };
    Ok((along(es.r1, |l| l.0), along(es.r2, |l| l.1)))
}

pub fn region_check(model: &ModelSpec, region: RegionSpec, s: State) -> Result<RegionMargins> {
    checked(model, s)?;
    Ok(region_margins(model, region, s.rho, s.m))
}

#[inline]
pub(crate) fn region_margins(model: &ModelSpec, region: RegionSpec, rho: f64, m: f64) -> RegionMargins {
    let (w_inv, z) = invariants(model, rho, m);
    let g1 = region.c1_low - w_inv;
    let g2 = z - region.c2_high;
    RegionMargins { g1, g2, inside: g1 <= REGION_SLACK && g2 <= REGION_SLACK }
}

/// The ρ-interval implied by C₁ ≤ Φ(Z) − P(ρ) with Z ≤ C₂, i.e.
/// P(ρ) ≤ sup Φ(Z) − C₁ over admissible Z, solved by bisection on the
/// monotone pressure over rho_domain.
pub fn region_density_bounds(model: &ModelSpec, region: RegionSpec) -> Result<DensityBounds> {
    let wd = model.w_domain;
    let z_hi = region.c2_high.min(wd.hi);
    if z_hi < wd.lo {
        return Err(Error::Config(format!(
            "C2 = {} lies below the w domain [{}, {}]",
            region.c2_high, wd.lo, wd.hi
        )));
    }
    // Φ convex: the sup over [w_lo, z_hi] sits at an endpoint.
    let phi_sup = model.velocity.value(z_hi).max(model.velocity.value(wd.lo));
    let cap = phi_sup - region.c1_low;

    let (lo, hi) = (model.rho_domain.lo, model.rho_domain.hi);
    let p = |r: f64| model.pressure.value(r);
    let (p_lo, p_hi) = (p(lo), p(hi));
    let inf_p = p_lo.min(p_hi);
    if cap < inf_p {
        return Err(Error::EmptyRegion { cap, inf_p });
    }
    if cap >= p_lo.max(p_hi) {
        return Ok(DensityBounds { low: RhoBound::Unbounded, high: RhoBound::Unbounded });
    }
    let decreasing = p_lo > p_hi;
    // bisection in log ρ for P(ρ) = cap
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let above = p(mid.exp()) > cap;
        if above == decreasing {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let root = (0.5 * (a + b)).exp();
    Ok(if decreasing {
        DensityBounds { low: RhoBound::Finite(root), high: RhoBound::Unbounded }
    } else {
        DensityBounds { low: RhoBound::Unbounded, high: RhoBound::Finite(root) }
    })
}

/// ∇²G(r, r) for the tangent r ⊥ ∇G with first component 1.
///
/// ∇G comes from central differences of G; the second derivative along r
/// from a fourth-order stencil. For G₂ the value vanishes (level sets of Z
/// are rays). For G₁ it equals (2P' + ρP'')/ρ − Φ''·(P'/Φ')².
pub fn quasiconvexity_check(model: &ModelSpec, which: RegionFunction, s: State) -> Result<f64> {
    checked(model, s)?;
    let g = |rho: f64, m: f64| match which {
        RegionFunction::G1 => -invariants(model, rho, m).0,
        RegionFunction::G2 => invariants(model, rho, m).1,
    };
    let (hr, hm) = diff::steps(s.rho, s.m, 1e-6);
    let grad = diff::gradient2(g, s.rho, s.m, hr, hm);
    let norm = grad[0].hypot(grad[1]);
    if !(norm > 1e-14) {
        let name = match which {
            RegionFunction::G1 => "G1",
            RegionFunction::G2 => "G2",
        };
        return Err(Error::DegenerateGradient { which: name, rho: s.rho, m: s.m });
    }
    let r = normalize([grad[1], -grad[0]]);
    let h = directional_step(s.rho, s.m, r);
    Ok(diff::d2_5pt(|t| g(s.rho + t * r[0], s.m + t * r[1]), 0.0, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(rho: f64, m: f64) -> State {
        State::new(rho, m).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn jacobian_entry_example() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let j = jacobian(&gc, st(1.0, 2.0)).unwrap();
        // value frozen from the central-difference Jacobian of F
        let fd = diff::jacobian2(|r, m| flux(&gc, r, m), 1.0, 2.0, 1e-5, 1e-5);
        assert!(close(fd[0][0], -0.5, 1e-8));
        assert!(close(j[0][0], -0.5, 1e-14));
    }

    #[test]
    fn jacobian_is_scalar_when_phi_is_flat() {
        let t = ModelSpec::transport(0.7);
        let j = jacobian(&t, st(2.0, 1.0)).unwrap();
        assert_eq!(j, [[0.7, 0.0], [0.0, 0.7]]);
        let es = eigenstructure(&t, st(2.0, 1.0)).unwrap();
        assert_eq!(es.lambda1, 0.7);
        assert_eq!(es.lambda2, 0.7);
    }

    #[test]
    fn eigenvalue_examples() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let es = eigenstructure(&gc, st(1.0, 2.0)).unwrap();
        assert!(close(es.lambda1, 1.0, 1e-15));
        assert!(close(es.lambda2, 1.5, 1e-15));
        let ch = ModelSpec::chaplygin();
        let es = eigenstructure(&ch, st(1.0, 2.0)).unwrap();
        assert!(close(es.lambda1, 1.0, 1e-15));
        assert!(close(es.lambda2, 2.0, 1e-15));
        // numerical eigenvalues of the Jacobian (trace/determinant)
        let j = es.jac;
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        assert!(close(tr / 2.0 - disc, 1.0, 1e-12));
        assert!(close(tr / 2.0 + disc, 2.0, 1e-12));
    }

    #[test]
    fn lambda1_is_the_velocity() {
        let gc = ModelSpec::gc_convex(1.0, 0.5);
        for &(rho, w) in &[(0.3, -1.0), (2.0, 0.5), (10.0, 3.0)] {
            let s = State::from_rho_w(rho, w).unwrap();
            let es = eigenstructure(&gc, s).unwrap();
            assert_eq!(es.lambda1, gc.velocity(rho, s.w()).unwrap());
        }
    }

    #[test]
    fn eigenvector_fallback_when_phi_m_vanishes() {
        // Φ = w²/2 has Φ'(0) = 0
        let m = ModelSpec::gc_convex(1.0, 0.5);
        let es = eigenstructure(&m, st(2.0, 0.0)).unwrap();
        assert_eq!(es.r1, [0.0, 1.0]);
        let j = es.jac;
        let res = [
            j[0][0] * es.r1[0] + j[0][1] * es.r1[1] - es.lambda1 * es.r1[0],
            j[1][0] * es.r1[0] + j[1][1] * es.r1[1] - es.lambda1 * es.r1[1],
        ];
        assert!(res[0].hypot(res[1]) < 1e-12);
    }

    #[test]
    fn riemann_invariant_example_and_constancy() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let s = st(1.0, 2.0);
        assert_eq!(riemann_invariants(&gc, s).unwrap(), (1.0, 2.0));
        let es = eigenstructure(&gc, s).unwrap();
        let h = 1e-6;
        let dw = |r: [f64; 2]| {
            (invariants(&gc, 1.0 + h * r[0], 2.0 + h * r[1]).0 - invariants(&gc, 1.0 - h * r[0], 2.0 - h * r[1]).0)
                / (2.0 * h)
        };
        let dz = |r: [f64; 2]| {
            (invariants(&gc, 1.0 + h * r[0], 2.0 + h * r[1]).1 - invariants(&gc, 1.0 - h * r[0], 2.0 - h * r[1]).1)
                / (2.0 * h)
        };
        assert!(dw(es.r1).abs() <= 1e-8);
        assert!(dz(es.r2).abs() <= 1e-8);
    }

    #[test]
    fn characteristic_field_examples() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let (d1, d2) = characteristic_fields(&gc, st(1.0, 2.0)).unwrap();
        assert!(d1.abs() <= 1e-7);
        assert!(close(d2.abs(), 0.25, 1e-7));
        // sign: −(2P' + ρP'') = +0.25
        assert!(d2 > 0.0);
        let ch = ModelSpec::chaplygin();
        for &(rho, m) in &[(1.0, 2.0), (0.2, -0.3), (5.0, 4.0)] {
            let (d1, d2) = characteristic_fields(&ch, st(rho, m)).unwrap();
            assert!(d1.abs() <= 1e-7 && d2.abs() <= 1e-7, "{d1} {d2}");
        }
    }

    #[test]
    fn region_margin_examples() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let region = RegionSpec { c1_low: 0.0, c2_high: 3.0 };
        let r = region_check(&gc, region, st(1.0, 2.0)).unwrap();
        assert_eq!((r.g1, r.g2, r.inside), (-1.0, -1.0, true));
        // W = 1 exactly on the boundary
        let r = region_check(&gc, RegionSpec { c1_low: 1.0, c2_high: 3.0 }, st(1.0, 2.0)).unwrap();
        assert_eq!(r.g1, 0.0);
        assert!(r.inside);
        let r = region_check(&gc, RegionSpec { c1_low: 0.0, c2_high: 1.5 }, st(1.0, 2.0)).unwrap();
        assert!(!r.inside);
    }

    #[test]
    fn density_bound_examples() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let b = region_density_bounds(&gc, RegionSpec { c1_low: 0.0, c2_high: 3.0 }).unwrap();
        match b.low {
            RhoBound::Finite(v) => assert!(close(v, 1.0 / 9.0, 1e-12)),
            other => panic!("{other:?}"),
        }
        assert_eq!(b.high, RhoBound::Unbounded);
        let ch = ModelSpec::chaplygin();
        let b = region_density_bounds(&ch, RegionSpec { c1_low: 0.0, c2_high: 2.0 }).unwrap();
        assert_eq!(b.high, RhoBound::Unbounded);
        match b.low {
            RhoBound::Finite(v) => assert!(close(v, 0.5, 1e-12)),
            other => panic!("{other:?}"),
        }
        // P ≥ 1e-3^{...}: inf P over (1e-3, 1e3) is 1/sqrt(1e3) ≈ 0.0316
        assert!(matches!(
            region_density_bounds(&gc, RegionSpec { c1_low: 3.0, c2_high: 3.0 }),
            Err(Error::EmptyRegion { .. })
        ));
    }

    #[test]
    fn quasiconvexity_values() {
        let gc = ModelSpec::gc(1.0, 0.5);
        let g2 = quasiconvexity_check(&gc, RegionFunction::G2, st(1.0, 2.0)).unwrap();
        assert!(g2.abs() <= 1e-6);
        // independent oracle: the boundary curve m = ρ(C1 + P(ρ)) of {W ≥ C1}
        // has second derivative (ρP)'' = 2P' + ρP''; along the tangent with
        // X = 1 the restricted Hessian of G1 = C1 − m/ρ + P is that value / ρ.
        let g1 = quasiconvexity_check(&gc, RegionFunction::G1, st(1.0, 2.0)).unwrap();
        assert!(close(g1, -0.25, 1e-6), "{g1}");
    }
}
