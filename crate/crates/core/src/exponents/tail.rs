//! Chernoff-type Gaussian tail bounds and numeric reference tails.

use crate::error::{Error, Result};
use crate::special::normal_pdf;

/// `P(xi >= z) <= exp(-z_+^2 / 2)` for standard Gaussian `xi`.
pub fn tail_bound(z: f64) -> f64 {
    let zp = z.max(0.0);
    (-0.5 * zp * zp).exp()
}

/// Bound on `P(xi >= a, eta >= b)` for standard Gaussians with correlation `rho`.
///
/// When both `a - b rho` and `b - a rho` are non-negative the joint exponent
/// `(a^2 + b^2 - 2 a b rho) / (1 - rho^2)` applies, otherwise the better of
/// the two marginal bounds.
pub fn joint_tail_bound(a: f64, b: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::domain(format!("correlation must satisfy |rho| < 1, got {rho}")));
    }
    if a - b * rho >= 0.0 && b - a * rho >= 0.0 {
        let q = (a * a + b * b - 2.0 * a * b * rho) / (1.0 - rho * rho);
        Ok(tail_bound(q.max(0.0).sqrt()))
    } else {
        Ok(tail_bound(a).min(tail_bound(b)))
    }
}

/// `P(xi >= z)` by composite Simpson integration of the density over
/// `[z, z + 40]`, independent of any closed-form complementary error function.
pub fn gaussian_tail_numeric(z: f64) -> f64 {
    let (lo, hi) = if z < -40.0 { (-40.0, 40.0) } else { (z, z + 40.0) };
    let n = 20_000;
    let h = (hi - lo) / n as f64;
    let mut s = normal_pdf(lo) + normal_pdf(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * normal_pdf(lo + i as f64 * h);
    }
    s * h / 3.0
}
