//! Pluggable nonsymmetric Keyfitz–Kranzer models.
//!
//! A model is the quadruple (Φ, P, f, g) together with the domains on which
//! it is evaluated. The system it defines is
//!
//! ```text
//! ρ_t + (ρ φ)_x = f(ρ, w),   (ρw)_t + (ρw φ)_x = g(ρ, w),   φ = Φ(w) − P(ρ)
//! ```

mod audit;
pub mod laws;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Coordinate, Error, Result};

pub use audit::{audit_conditions, Condition, ConditionCheck, ConditionReport, SamplePlan, Verdict};
pub use laws::{
    ConstantVelocity, LinearSource, LinearVelocity, NoPressure, NoSource, PowerLaw, PressureLaw,
    QuadraticVelocity, SourceLaw, VelocityLaw,
};

/// Default density floor; keeps B/ρ^α finite.
pub const DEFAULT_RHO_MIN: f64 = 1e-3;
pub const DEFAULT_RHO_MAX: f64 = 1e3;
pub const DEFAULT_W_RANGE: f64 = 10.0;

/// Closed interval [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// An immutable model: shareable across threads and solver runs.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub velocity: Arc<dyn VelocityLaw>,
    pub pressure: Arc<dyn PressureLaw>,
    pub source: Arc<dyn SourceLaw>,
    pub rho_domain: Interval,
    pub w_domain: Interval,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("velocity", &self.velocity.label())
            .field("pressure", &self.pressure.label())
            .field("source", &self.source.label())
            .field("rho_domain", &self.rho_domain)
            .field("w_domain", &self.w_domain)
            .finish()
    }
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        velocity: impl VelocityLaw + 'static,
        pressure: impl PressureLaw + 'static,
        source: impl SourceLaw + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            velocity: Arc::new(velocity),
            pressure: Arc::new(pressure),
            source: Arc::new(source),
            rho_domain: Interval::new(DEFAULT_RHO_MIN, DEFAULT_RHO_MAX),
            w_domain: Interval::new(-DEFAULT_W_RANGE, DEFAULT_W_RANGE),
        }
    }

    /// GC(B, α): Φ(w) = w, P(ρ) = B/ρ^α.
    pub fn gc(b: f64, alpha: f64) -> Self {
        Self::new(format!("gc(B={b},alpha={alpha})"), LinearVelocity, PowerLaw { b, alpha }, NoSource)
    }

    /// Φ(w) = w, P(ρ) = 1/ρ: both fields linearly degenerate.
    pub fn chaplygin() -> Self {
        Self::new("chaplygin", LinearVelocity, PowerLaw { b: 1.0, alpha: 1.0 }, NoSource)
    }

    /// Strictly convex variant Φ(w) = w²/2 with P = B/ρ^α.
    pub fn gc_convex(b: f64, alpha: f64) -> Self {
        Self::new(
            format!("gc_convex(B={b},alpha={alpha})"),
            QuadraticVelocity,
            PowerLaw { b, alpha },
            NoSource,
        )
    }

    /// Pressureless transport with frozen speed: φ ≡ c.
    pub fn transport(c: f64) -> Self {
        Self::new(format!("transport(c={c})"), ConstantVelocity(c), NoPressure, NoSource)
    }

    pub fn with_source(mut self, source: impl SourceLaw + 'static) -> Self {
        let label = source.label();
        if label != "none" {
            self.name = format!("{}+{}", base_name(&self.name), label);
        }
        self.source = Arc::new(source);
        self
    }

    pub fn with_domains(mut self, rho_domain: Interval, w_domain: Interval) -> Self {
        self.rho_domain = rho_domain;
        self.w_domain = w_domain;
        self
    }

    /// φ(ρ, w) = Φ(w) − P(ρ), unchecked. Solver hot paths use this.
    #[inline]
    pub fn phi(&self, rho: f64, w: f64) -> f64 {
        self.velocity.value(w) - self.pressure.value(rho)
    }

    /// φ(ρ, w) after checking both coordinates against the model domains.
    pub fn velocity(&self, rho: f64, w: f64) -> Result<f64> {
        self.check_domain(rho, w)?;
        Ok(self.phi(rho, w))
    }

    pub fn check_domain(&self, rho: f64, w: f64) -> Result<()> {
        if !self.rho_domain.contains(rho) {
            return Err(Error::Domain {
                coordinate: Coordinate::Rho,
                value: rho,
                lo: self.rho_domain.lo,
                hi: self.rho_domain.hi,
            });
        }
        if !self.w_domain.contains(w) {
            return Err(Error::Domain {
                coordinate: Coordinate::W,
                value: w,
                lo: self.w_domain.lo,
                hi: self.w_domain.hi,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn f(&self, rho: f64, w: f64) -> f64 {
        self.source.f(rho, w)
    }

    #[inline]
    pub fn g(&self, rho: f64, w: f64) -> f64 {
        self.source.g(rho, w)
    }

    /// The scalar flux obtained by freezing w.
    pub fn scalar_flux(&self, w: f64) -> Result<FrozenFlux> {
        if !self.w_domain.contains(w) {
            return Err(Error::Domain {
                coordinate: Coordinate::W,
                value: w,
                lo: self.w_domain.lo,
                hi: self.w_domain.hi,
            });
        }
        Ok(FrozenFlux { model: self.clone(), w })
    }
}

fn base_name(name: &str) -> &str {
    name.split('+').next().unwrap_or(name)
}

/// Scalar flux h(ρ) with analytic derivatives and a wave-speed bound used by
/// the scalar Rusanov scheme.
pub trait ScalarFlux: Send + Sync {
    fn h(&self, rho: f64) -> f64;
    fn dh(&self, rho: f64) -> f64;
    fn d2h(&self, rho: f64) -> f64;

    fn speed_bound(&self, rho: f64) -> f64 {
        self.dh(rho).abs()
    }
}

/// h(ρ) = Φ(w)ρ − ρP(ρ) at a frozen w.
#[derive(Debug, Clone)]
pub struct FrozenFlux {
    model: ModelSpec,
    w: f64,
}

impl FrozenFlux {
    pub fn w(&self) -> f64 {
        self.w
    }

    /// The scalar source f(ρ, w) at the frozen w.
    pub fn source(&self, rho: f64) -> f64 {
        self.model.f(rho, self.w)
    }

    pub fn source_rate(&self) -> Option<f64> {
        self.model.source.linear_rate()
    }
}

impl ScalarFlux for FrozenFlux {
    fn h(&self, rho: f64) -> f64 {
        rho * self.model.phi(rho, self.w)
    }

    fn dh(&self, rho: f64) -> f64 {
        self.model.phi(rho, self.w) - rho * self.model.pressure.d1(rho)
    }

    fn d2h(&self, rho: f64) -> f64 {
        -self.model.pressure.genuine_nonlinearity(rho)
    }

    /// max(|λ₁|, |λ₂|) of the full system at m = wρ, so the scalar scheme
    /// reproduces the system scheme when w is constant.
    fn speed_bound(&self, rho: f64) -> f64 {
        let phi = self.model.phi(rho, self.w);
        phi.abs().max(self.dh(rho).abs())
    }
}

/// Source presets shipped with every builtin model family.
pub fn source_presets(k: f64) -> Vec<Arc<dyn SourceLaw>> {
    vec![
        Arc::new(NoSource),
        Arc::new(LinearSource::exit(k)),
        Arc::new(LinearSource::entry(k)),
    ]
}

/// GC(1, 1/2), CHAPLYGIN and the convex-Φ variant, each with the presets
/// {none, exit(0.1), entry(0.1)}.
pub fn builtin_models() -> Vec<ModelSpec> {
    let families = [ModelSpec::gc(1.0, 0.5), ModelSpec::chaplygin(), ModelSpec::gc_convex(1.0, 0.5)];
    let mut out = Vec::new();
    for family in families {
        for source in source_presets(0.1) {
            let mut m = family.clone();
            if source.label() != "none" {
                m.name = format!("{}+{}", m.name, source.label());
            }
            m.source = source;
            out.push(m);
        }
    }
    out
}

/// Source selection as it appears in scenario files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceConfig {
    #[default]
    None,
    Exit { k: f64 },
    Entry { k: f64 },
    /// f = ρ, g = ρw.
    Remark,
}

/// Model selection as it appears in scenario files, e.g.
/// `{"name": "gc", "B": 1.0, "alpha": 0.5, "source": {"kind": "exit", "k": 0.1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_max: Option<f64>,
}

impl ModelConfig {
    pub fn gc(b: f64, alpha: f64) -> Self {
        Self {
            name: "gc".into(),
            b: Some(b),
            alpha: Some(alpha),
            c: None,
            source: SourceConfig::None,
            rho_min: None,
            rho_max: None,
            w_min: None,
            w_max: None,
        }
    }

    pub fn build(&self) -> Result<ModelSpec> {
        let b = self.b.unwrap_or(1.0);
        let alpha = self.alpha.unwrap_or(0.5);
        let base = match self.name.as_str() {
            "gc" => {
                if !(alpha > 0.0) || !(b > 0.0) {
                    return Err(Error::Config(format!("gc needs B > 0 and alpha > 0, got B={b}, alpha={alpha}")));
                }
                ModelSpec::gc(b, alpha)
            }
            "gc_convex" => ModelSpec::gc_convex(b, alpha),
            "chaplygin" => ModelSpec::chaplygin(),
            "transport" => ModelSpec::transport(self.c.unwrap_or(0.0)),
            other => {
                return Err(Error::Config(format!(
                    "unknown model '{other}' (expected gc, gc_convex, chaplygin or transport)"
                )))
            }
        };
        let model = match self.source {
            SourceConfig::None => base,
            SourceConfig::Exit { k } => base.with_source(LinearSource::exit(k)),
            SourceConfig::Entry { k } => base.with_source(LinearSource::entry(k)),
            SourceConfig::Remark => base.with_source(LinearSource::remark()),
        };
        let rho_domain = Interval::new(
            self.rho_min.unwrap_or(DEFAULT_RHO_MIN),
            self.rho_max.unwrap_or(DEFAULT_RHO_MAX),
        );
        let w_domain = Interval::new(
            self.w_min.unwrap_or(-DEFAULT_W_RANGE),
            self.w_max.unwrap_or(DEFAULT_W_RANGE),
        );
        if !(rho_domain.lo > 0.0 && rho_domain.hi > rho_domain.lo) {
            return Err(Error::Config(format!("invalid rho domain [{}, {}]", rho_domain.lo, rho_domain.hi)));
        }
        if !(w_domain.hi > w_domain.lo) {
            return Err(Error::Config(format!("invalid w domain [{}, {}]", w_domain.lo, w_domain.hi)));
        }
        Ok(model.with_domains(rho_domain, w_domain))
    }
}
