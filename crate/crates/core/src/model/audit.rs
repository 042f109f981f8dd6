//! Structural audit of a model: source coupling, dissipativity, pressure
//! conditions, genuine nonlinearity and compatibility of the sources with
//! the invariant-region functions.
//!
//! Every check evaluates at each point of a deterministic sampling plan and
//! keeps the worst point as its witness. Checks are tagged `required` when
//! the solvers depend on them; the remaining ones are informational (several
//! pressure sub-conditions cannot hold simultaneously, and every shipped
//! model violates at least one of them).

use serde::{Deserialize, Serialize};

use super::{Interval, ModelSpec};
use crate::characteristics::invariants;
use crate::diff;
use crate::error::{Error, Result};

/// Inequalities of the form `x ≤ 0` are accepted up to this slack.
pub const INEQUALITY_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "derivatives_consistent")]
    DerivativesConsistent,
    #[serde(rename = "Phi_convexity")]
    PhiConvexity,
    #[serde(rename = "C1_source_coupling")]
    C1SourceCoupling,
    #[serde(rename = "C1_literal_coupling")]
    C1LiteralCoupling,
    #[serde(rename = "C1_zero_at_origin")]
    C1ZeroAtOrigin,
    #[serde(rename = "C2_dissipative")]
    C2Dissipative,
    #[serde(rename = "C3_P_at_zero")]
    C3PAtZero,
    #[serde(rename = "C3_rhoP_prime_limit")]
    C3RhoPPrimeLimit,
    #[serde(rename = "C3_P_at_infinity")]
    C3PAtInfinity,
    #[serde(rename = "C3_genuine_nonlinearity_sign")]
    C3GenuineNonlinearitySign,
    #[serde(rename = "scalar_convexity")]
    ScalarConvexity,
    #[serde(rename = "source_region_compatibility_G1")]
    SourceRegionCompatibilityG1,
    #[serde(rename = "source_region_compatibility_G2")]
    SourceRegionCompatibilityG2,
    #[serde(rename = "lambda2_printed_form")]
    Lambda2PrintedForm,
}

impl Condition {
    pub fn is_required(self) -> bool {
        matches!(
            self,
            Condition::DerivativesConsistent
                | Condition::PhiConvexity
                | Condition::C1SourceCoupling
                | Condition::C1ZeroAtOrigin
                | Condition::C2Dissipative
                | Condition::C3GenuineNonlinearitySign
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub verdict: Verdict,
    /// Worst-case point (ρ, w).
    pub witness: [f64; 2],
    pub residual: f64,
    pub required: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub model: String,
    pub samples: usize,
    pub threshold_m: f64,
    pub conditions: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn get(&self, condition: Condition) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.condition == condition)
    }

    pub fn verdict(&self, condition: Condition) -> Verdict {
        self.get(condition).map(|c| c.verdict).unwrap_or(Verdict::Na)
    }

    /// True when no required check failed.
    pub fn required_pass(&self) -> bool {
        self.conditions.iter().all(|c| !c.required || c.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.conditions.iter().filter(|c| c.required && c.verdict == Verdict::Fail)
    }
}

/// Deterministic sample points (ρ, w).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub points: Vec<(f64, f64)>,
}

impl SamplePlan {
    /// Halton(2, 3) points on rho_domain × w_domain, log-uniform in ρ.
    pub fn halton(n: usize, rho_domain: Interval, w_domain: Interval) -> Self {
        let (lr0, lr1) = (rho_domain.lo.ln(), rho_domain.hi.ln());
        let points = (1..=n)
            .map(|i| {
                let a = radical_inverse(i, 2);
                let b = radical_inverse(i, 3);
                let rho = (lr0 + a * (lr1 - lr0)).exp().clamp(rho_domain.lo, rho_domain.hi);
                let w = w_domain.lo + b * (w_domain.hi - w_domain.lo);
                (rho, w)
            })
            .collect();
        Self { points }
    }

    pub fn for_model(model: &ModelSpec, n: usize) -> Self {
        Self::halton(n, model.rho_domain, model.w_domain)
    }

    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut scale = inv;
    while i > 0 {
        out += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    out
}

/// Tracks the worst sample of a scalar quantity.
struct Worst {
    value: f64,
    at: [f64; 2],
}

impl Worst {
    fn new() -> Self {
        Self { value: f64::NEG_INFINITY, at: [f64::NAN, f64::NAN] }
    }

    fn offer(&mut self, value: f64, rho: f64, w: f64) {
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            self.value = value;
            self.at = [rho, w];
        }
    }
}

fn check(condition: Condition, verdict: Verdict, worst: &Worst, detail: impl Into<String>) -> ConditionCheck {
    ConditionCheck {
        condition,
        verdict,
        witness: worst.at,
        residual: worst.value,
        required: condition.is_required(),
        detail: detail.into(),
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Evaluates every structural condition on the sampling plan.
///
/// `threshold_m` is the constant above which the dissipativity s·f(s) ≤ 0
/// must hold.
pub fn audit_conditions(model: &ModelSpec, plan: &SamplePlan, threshold_m: f64) -> Result<ConditionReport> {
    if plan.is_empty() {
        return Err(Error::Config("audit sampling plan is empty".into()));
    }
    let pts = &plan.points;
    let mut out = Vec::new();

    // Analytic derivatives against fourth-order central differences.
    let mut deriv = Worst::new();
    for &(rho, w) in pts {
        let hw = 1e-3 * w.abs().max(1.0);
        let hr = 1e-3 * rho;
        let phi = |x: f64| model.velocity.value(x);
        let p = |x: f64| model.pressure.value(x);
        let rel = |fd: f64, an: f64| (fd - an).abs() / an.abs().max(1.0);
        let e = rel(diff::d1_5pt(phi, w, hw), model.velocity.d1(w))
            .max(rel(diff::d2_5pt(phi, w, hw), model.velocity.d2(w)))
            .max(rel(diff::d1_5pt(p, rho, hr), model.pressure.d1(rho)))
            .max(rel(diff::d2_5pt(p, rho, hr), model.pressure.d2(rho)));
        deriv.offer(e, rho, w);
    }
    out.push(check(
        Condition::DerivativesConsistent,
        pass_if(deriv.value <= 1e-6),
        &deriv,
        "max relative error of analytic vs finite-difference derivatives",
    ));

    let mut convex = Worst::new();
    for &(rho, w) in pts {
        convex.offer(-model.velocity.d2(w), rho, w);
    }
    out.push(check(Condition::PhiConvexity, pass_if(convex.value <= 1e-12), &convex, "max of -Phi''(w)"));

    let mut coupling = Worst::new();
    let mut literal = Worst::new();
    for &(rho, w) in pts {
        let f = model.f(rho, w);
        let g = model.g(rho, w);
        coupling.offer((g - w * f).abs() / (1.0 + g.abs()), rho, w);
        literal.offer((w * g - f).abs() / (1.0 + f.abs()), rho, w);
    }
    out.push(check(
        Condition::C1SourceCoupling,
        pass_if(coupling.value <= 1e-12),
        &coupling,
        "max |g - w f| / (1 + |g|)",
    ));
    out.push(check(
        Condition::C1LiteralCoupling,
        pass_if(literal.value <= 1e-12),
        &literal,
        "max |w g - f| / (1 + |f|); literal printed form, informational",
    ));

    let origin = model.f(0.0, 0.0);
    let origin_worst = Worst {
        value: origin.abs(),
        at: [model.rho_domain.lo, model.w_domain.clamp(0.0)],
    };
    out.push(check(
        Condition::C1ZeroAtOrigin,
        pass_if(origin.abs() <= 1e-12),
        &origin_worst,
        "|f(0,0)|; witness is the domain point nearest the origin",
    ));

    let mut dissipative = Worst::new();
    let mut n_large = 0usize;
    for &(rho, w) in pts {
        if rho.abs() > threshold_m {
            n_large += 1;
            dissipative.offer(rho * model.f(rho, w), rho, w);
        }
    }
    let c2 = if n_large == 0 {
        let w = Worst { value: 0.0, at: [model.rho_domain.hi, model.w_domain.clamp(0.0)] };
        check(Condition::C2Dissipative, Verdict::Na, &w, "no samples with |s| > M")
    } else {
        check(
            Condition::C2Dissipative,
            pass_if(dissipative.value <= INEQUALITY_SLACK),
            &dissipative,
            format!("max s f(s, w) over {n_large} samples with |s| > M"),
        )
    };
    out.push(c2);

    out.extend(pressure_limits(model));

    // Sign of 2P' + ρP'' on the samples.
    let (mut n_neg, mut n_pos, mut n_zero) = (0usize, 0usize, 0usize);
    let mut gn_max = Worst::new();
    let mut gn_min = Worst::new();
    for &(rho, w) in pts {
        let v = model.pressure.genuine_nonlinearity(rho);
        let scale = model.pressure.d1(rho).abs() + (rho * model.pressure.d2(rho)).abs();
        let tol = 1e-12 * scale;
        if v < -tol {
            n_neg += 1;
        } else if v > tol {
            n_pos += 1;
        } else {
            n_zero += 1;
        }
        gn_max.offer(v, rho, w);
        gn_min.offer(-v, rho, w);
    }
    let n = pts.len();
    let (sign, gn_verdict, worst) = if n_neg == n {
        ("negative", Verdict::Pass, &gn_max)
    } else if n_pos == n {
        ("positive", Verdict::Pass, &gn_min)
    } else if n_zero == n {
        ("zero", Verdict::Pass, &gn_max)
    } else if n_pos == 0 {
        ("nonpositive", Verdict::Pass, &gn_max)
    } else if n_neg == 0 {
        ("nonnegative", Verdict::Pass, &gn_min)
    } else {
        ("indefinite", Verdict::Fail, &gn_max)
    };
    let mut gn_check = check(Condition::C3GenuineNonlinearitySign, gn_verdict, worst, sign);
    // report the actual signed value of 2P' + ρP'' at the witness
    gn_check.residual = model.pressure.genuine_nonlinearity(gn_check.witness[0]);
    out.push(gn_check);

    let mut scalar = Worst::new();
    for &(rho, w) in pts {
        scalar.offer(model.pressure.genuine_nonlinearity(rho), rho, w);
    }
    out.push(check(
        Condition::ScalarConvexity,
        pass_if(scalar.value < 0.0),
        &scalar,
        "max of -h''(rho) = 2P' + rho P''; h'' > 0 required",
    ));

    // ∇G·H with ∇G from central differences of G itself.
    let mut g1 = Worst::new();
    let mut g2 = Worst::new();
    for &(rho, w) in pts {
        let m = rho * w;
        let (hr, hm) = diff::steps(rho, m, 1e-6);
        let grad1 = diff::gradient2(|r, mm| -invariants(model, r, mm).0, rho, m, hr, hm);
        let grad2 = diff::gradient2(|r, mm| invariants(model, r, mm).1, rho, m, hr, hm);
        let h = [model.f(rho, w), model.g(rho, w)];
        let dot = |g: [f64; 2]| g[0] * h[0] + g[1] * h[1];
        let norm = |g: [f64; 2]| (g[0] * g[0] + g[1] * g[1]).sqrt();
        let hn = (h[0] * h[0] + h[1] * h[1]).sqrt();
        g1.offer(dot(grad1) - (INEQUALITY_SLACK + 1e-6 * norm(grad1) * hn), rho, w);
        g2.offer(dot(grad2) - (INEQUALITY_SLACK + 1e-6 * norm(grad2) * hn), rho, w);
    }
    out.push(check(
        Condition::SourceRegionCompatibilityG1,
        pass_if(g1.value <= 0.0),
        &g1,
        "max of grad(G1).H minus tolerance",
    ));
    out.push(check(
        Condition::SourceRegionCompatibilityG2,
        pass_if(g2.value <= 0.0),
        &g2,
        "max of grad(G2).H minus tolerance",
    ));

    // The printed λ₂ = Φ(w) − ρP' differs from the Jacobian eigenvalue by P.
    let mut lam = Worst::new();
    for &(rho, w) in pts {
        lam.offer(model.pressure.value(rho).abs(), rho, w);
    }
    out.push(check(
        Condition::Lambda2PrintedForm,
        pass_if(lam.value <= 1e-12),
        &lam,
        "max |lambda2_printed - lambda2_jacobian| = |P(rho)|",
    ));

    Ok(ConditionReport {
        model: model.name.clone(),
        samples: pts.len(),
        threshold_m,
        conditions: out,
    })
}

/// Limit sub-conditions of the pressure, decided from the trend of a
/// quantity on a geometric ladder toward the relevant end of rho_domain.
fn pressure_limits(model: &ModelSpec) -> Vec<ConditionCheck> {
    let lo = model.rho_domain.lo;
    let hi = model.rho_domain.hi;
    let w0 = model.w_domain.clamp(0.0);
    let p = |r: f64| model.pressure.value(r);
    let rp = |r: f64| r * model.pressure.d1(r);

    // P(ρ) → 0 as ρ → 0
    let ladder = [100.0 * lo, 10.0 * lo, lo];
    let vals: Vec<f64> = ladder.iter().map(|&r| p(r).abs()).collect();
    let tends_to_zero = vals.iter().all(|v| *v <= 1e-12) || (vals[2] < vals[1] && vals[1] < vals[0]);
    let at_zero = check(
        Condition::C3PAtZero,
        pass_if(tends_to_zero),
        &Worst { value: p(lo), at: [lo, w0] },
        "P at rho_min; pass when |P| decreases toward rho_min",
    );

    let vals: Vec<f64> = ladder.iter().map(|&r| rp(r).abs()).collect();
    let tends_to_zero = vals.iter().all(|v| *v <= 1e-12) || (vals[2] < vals[1] && vals[1] < vals[0]);
    let limit = check(
        Condition::C3RhoPPrimeLimit,
        pass_if(tends_to_zero),
        &Worst { value: rp(lo), at: [lo, w0] },
        "rho P'(rho) at rho_min; pass when |rho P'| decreases toward rho_min",
    );

    let up = [hi / 100.0, hi / 10.0, hi];
    let vals: Vec<f64> = up.iter().map(|&r| p(r)).collect();
    let grows = vals[0] < vals[1] && vals[1] < vals[2];
    let at_inf = check(
        Condition::C3PAtInfinity,
        pass_if(grows),
        &Worst { value: p(hi), at: [hi, w0] },
        "P at rho_max; pass when P increases toward rho_max",
    );
    vec![at_zero, limit, at_inf]
}
