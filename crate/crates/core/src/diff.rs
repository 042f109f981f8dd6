//! Finite-difference cross-checks. Never used in solver hot paths.

/// Fourth-order central first derivative.
pub fn d1_5pt(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative.
pub fn d2_5pt(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// Gradient of a scalar field on the (ρ, m) plane by second-order central
/// differences with per-axis steps.
pub fn gradient2(f: impl Fn(f64, f64) -> f64, rho: f64, m: f64, h_rho: f64, h_m: f64) -> [f64; 2] {
    [
        (f(rho + h_rho, m) - f(rho - h_rho, m)) / (2.0 * h_rho),
        (f(rho, m + h_m) - f(rho, m - h_m)) / (2.0 * h_m),
    ]
}

/// Jacobian of a 2-vector field by second-order central differences.
pub fn jacobian2(f: impl Fn(f64, f64) -> [f64; 2], rho: f64, m: f64, h_rho: f64, h_m: f64) -> [[f64; 2]; 2] {
    let fp = f(rho + h_rho, m);
    let fm = f(rho - h_rho, m);
    let gp = f(rho, m + h_m);
    let gm = f(rho, m - h_m);
    [
        [(fp[0] - fm[0]) / (2.0 * h_rho), (gp[0] - gm[0]) / (2.0 * h_m)],
        [(fp[1] - fm[1]) / (2.0 * h_rho), (gp[1] - gm[1]) / (2.0 * h_m)],
    ]
}

/// Step sizes for a state: relative in ρ, absolute-or-relative in m.
pub fn steps(rho: f64, m: f64, scale: f64) -> (f64, f64) {
    (scale * rho, scale * m.abs().max(rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_quartics() {
        let p = |x: f64| 3.0 * x.powi(4) - x.powi(3) + 2.0 * x - 7.0;
        let d1 = |x: f64| 12.0 * x.powi(3) - 3.0 * x.powi(2) + 2.0;
        let d2 = |x: f64| 36.0 * x.powi(2) - 6.0 * x;
        for &x in &[-1.3, 0.0, 0.7, 2.0] {
            assert!((d1_5pt(p, x, 1e-2) - d1(x)).abs() < 1e-9);
            assert!((d2_5pt(p, x, 1e-2) - d2(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn jacobian_of_linear_map() {
        let j = jacobian2(|a, b| [2.0 * a - b, 3.0 * b], 1.0, 2.0, 1e-3, 1e-3);
        let expect = [[2.0, -1.0], [0.0, 3.0]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j[i][k] - expect[i][k]).abs() < 1e-10);
            }
        }
    }
}
