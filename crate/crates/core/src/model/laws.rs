//! Constitutive building blocks: the velocity offset Φ(w), the pressure
//! P(ρ) and the source densities f, g. Every law carries analytic first and
//! second derivatives; finite differences only appear in audits and tests.

use std::fmt::Debug;

/// Velocity offset Φ(w). Expected to be convex.
pub trait VelocityLaw: Debug + Send + Sync {
    fn value(&self, w: f64) -> f64;
    fn d1(&self, w: f64) -> f64;
    fn d2(&self, w: f64) -> f64;
    fn label(&self) -> String;
}

/// Pressure P(ρ) for ρ > 0.
pub trait PressureLaw: Debug + Send + Sync {
    fn value(&self, rho: f64) -> f64;
    fn d1(&self, rho: f64) -> f64;
    fn d2(&self, rho: f64) -> f64;
    fn label(&self) -> String;

    /// 2P'(ρ) + ρP''(ρ). Laws with closed forms override this so that exact
    /// cancellations (e.g. P = 1/ρ) come out as an exact zero.
    fn genuine_nonlinearity(&self, rho: f64) -> f64 {
        2.0 * self.d1(rho) + rho * self.d2(rho)
    }
}

/// Source densities of the balance system, as functions of (ρ, w).
pub trait SourceLaw: Debug + Send + Sync {
    fn f(&self, rho: f64, w: f64) -> f64;

    /// Momentum source. The coupling g = w·f is the default.
    fn g(&self, rho: f64, w: f64) -> f64 {
        w * self.f(rho, w)
    }

    /// `Some(r)` when f = r·ρ and g = r·ρw, so the source ODE is linear and
    /// can be integrated exactly.
    fn linear_rate(&self) -> Option<f64> {
        None
    }

    /// Lipschitz bound of f in ρ, used for growth estimates.
    fn lipschitz(&self) -> f64;

    fn label(&self) -> String;
}

/// Φ(w) = w.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearVelocity;

impl VelocityLaw for LinearVelocity {
    fn value(&self, w: f64) -> f64 {
        w
    }
    fn d1(&self, _w: f64) -> f64 {
        1.0
    }
    fn d2(&self, _w: f64) -> f64 {
        0.0
    }
    fn label(&self) -> String {
        "Phi(w)=w".into()
    }
}

/// Φ(w) = w²/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticVelocity;

impl VelocityLaw for QuadraticVelocity {
    fn value(&self, w: f64) -> f64 {
        0.5 * w * w
    }
    fn d1(&self, w: f64) -> f64 {
        w
    }
    fn d2(&self, _w: f64) -> f64 {
        1.0
    }
    fn label(&self) -> String {
        "Phi(w)=w^2/2".into()
    }
}

/// Φ(w) = c, a frozen transport speed independent of w.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantVelocity(pub f64);

impl VelocityLaw for ConstantVelocity {
    fn value(&self, _w: f64) -> f64 {
        self.0
    }
    fn d1(&self, _w: f64) -> f64 {
        0.0
    }
    fn d2(&self, _w: f64) -> f64 {
        0.0
    }
    fn label(&self) -> String {
        format!("Phi(w)={}", self.0)
    }
}

/// P(ρ) = B/ρ^α. α = 1, B = 1 is the Chaplygin-type law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub b: f64,
    pub alpha: f64,
}

impl PressureLaw for PowerLaw {
    fn value(&self, rho: f64) -> f64 {
        self.b * rho.powf(-self.alpha)
    }
    fn d1(&self, rho: f64) -> f64 {
        -self.alpha * self.b * rho.powf(-self.alpha - 1.0)
    }
    fn d2(&self, rho: f64) -> f64 {
        self.alpha * (self.alpha + 1.0) * self.b * rho.powf(-self.alpha - 2.0)
    }
    fn genuine_nonlinearity(&self, rho: f64) -> f64 {
        // 2P' + ρP'' = Bα(α−1)ρ^{−α−1}
        self.b * self.alpha * (self.alpha - 1.0) * rho.powf(-self.alpha - 1.0)
    }
    fn label(&self) -> String {
        format!("P(rho)={}/rho^{}", self.b, self.alpha)
    }
}

/// P ≡ 0 (pressureless transport).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoPressure;

impl PressureLaw for NoPressure {
    fn value(&self, _rho: f64) -> f64 {
        0.0
    }
    fn d1(&self, _rho: f64) -> f64 {
        0.0
    }
    fn d2(&self, _rho: f64) -> f64 {
        0.0
    }
    fn genuine_nonlinearity(&self, _rho: f64) -> f64 {
        0.0
    }
    fn label(&self) -> String {
        "P(rho)=0".into()
    }
}

/// f = g = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoSource;

impl SourceLaw for NoSource {
    fn f(&self, _rho: f64, _w: f64) -> f64 {
        0.0
    }
    fn linear_rate(&self) -> Option<f64> {
        Some(0.0)
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
    fn label(&self) -> String {
        "none".into()
    }
}

/// f = r·ρ, g = w·f. Negative rates model exit ramps, positive rates entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSource {
    pub rate: f64,
    pub name: String,
}

impl LinearSource {
    pub fn exit(k: f64) -> Self {
        Self {
            rate: -k,
            name: format!("exit({k})"),
        }
    }

    pub fn entry(k: f64) -> Self {
        Self {
            rate: k,
            name: format!("entry({k})"),
        }
    }

    /// The literal f = ρ, g = ρw example.
    pub fn remark() -> Self {
        Self {
            rate: 1.0,
            name: "remark(f=rho)".into(),
        }
    }
}

impl SourceLaw for LinearSource {
    fn f(&self, rho: f64, _w: f64) -> f64 {
        self.rate * rho
    }
    fn linear_rate(&self) -> Option<f64> {
        Some(self.rate)
    }
    fn lipschitz(&self) -> f64 {
        self.rate.abs()
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn power_law_derivatives_match_central_differences() {
        let laws = [
            PowerLaw { b: 1.0, alpha: 0.5 },
            PowerLaw { b: 1.0, alpha: 1.0 },
            PowerLaw { b: 2.5, alpha: 0.3 },
        ];
        for law in laws {
            for &rho in &[0.05, 0.3, 1.0, 4.0, 30.0] {
                let h = 1e-4 * rho;
                let (d1, d2) = central(|r| law.value(r), rho, h);
                assert!((d1 - law.d1(rho)).abs() <= 1e-6 * law.d1(rho).abs());
                assert!((d2 - law.d2(rho)).abs() <= 1e-5 * law.d2(rho).abs());
                let gn = 2.0 * law.d1(rho) + rho * law.d2(rho);
                assert!((gn - law.genuine_nonlinearity(rho)).abs() <= 1e-12 * law.d1(rho).abs());
            }
        }
    }

    #[test]
    fn chaplygin_pressure_is_exactly_degenerate() {
        let law = PowerLaw { b: 1.0, alpha: 1.0 };
        for &rho in &[1e-3, 0.5, 1.0, 1e3] {
            assert_eq!(law.genuine_nonlinearity(rho), 0.0);
        }
    }

    #[test]
    fn linear_source_couples_momentum() {
        let s = LinearSource::entry(0.1);
        assert_eq!(s.g(2.0, 3.0), 3.0 * s.f(2.0, 3.0));
        assert_eq!(LinearSource::exit(0.1).f(2.0, 0.0), -0.2);
    }
}
