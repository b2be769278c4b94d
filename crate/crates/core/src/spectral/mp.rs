//! Marčenko–Pastur law for correlation matrices of `L x N` pure-noise
//! series with ratio `Q = L / N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::ser_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpParams {
    #[serde(serialize_with = "ser_f64")]
    pub q: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sigma: f64,
    #[serde(serialize_with = "ser_f64")]
    pub lambda_minus: f64,
    #[serde(serialize_with = "ser_f64")]
    pub lambda_plus: f64,
}

/// Bulk edges `sigma^2 (1 + 1/Q -/+ 2 sqrt(1/Q))`.
pub fn mp_bounds(q: f64, sigma: f64) -> Result<MpParams> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("Q = {q} must be positive")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be positive")));
    }
    let s2 = sigma * sigma;
    let inv = 1.0 / q;
    let root = inv.sqrt();
    Ok(MpParams { q, sigma, lambda_minus: s2 * (1.0 + inv - 2.0 * root), lambda_plus: s2 * (1.0 + inv + 2.0 * root) })
}

/// `Q / (2 pi sigma^2) * sqrt((l+ - l)(l - l-)) / l` on the bulk, 0 outside.
/// For `Q < 1` the law also has an atom at zero which this density omits.
pub fn mp_density(lambda: f64, params: &MpParams) -> f64 {
    if lambda <= params.lambda_minus || lambda >= params.lambda_plus || lambda <= 0.0 {
        return 0.0;
    }
    let s2 = params.sigma * params.sigma;
    params.q / (2.0 * std::f64::consts::PI * s2)
        * ((params.lambda_plus - lambda) * (lambda - params.lambda_minus)).sqrt()
        / lambda
}

/// Probability mass of the bulk density on `[a, b]`.
///
/// Integrates in the angle `phi` with `lambda = c - h cos(phi)`, which turns
/// the square-root edges into a smooth integrand, using 512-panel composite
/// Simpson.
pub fn mp_mass(a: f64, b: f64, params: &MpParams) -> f64 {
    let lo = a.max(params.lambda_minus);
    let hi = b.min(params.lambda_plus);
    if lo >= hi {
        return 0.0;
    }
    let c = 0.5 * (params.lambda_plus + params.lambda_minus);
    let h = 0.5 * (params.lambda_plus - params.lambda_minus);
    let angle = |x: f64| ((c - x) / h).clamp(-1.0, 1.0).acos();
    let (p0, p1) = (angle(lo), angle(hi));
    let k = params.q / (2.0 * std::f64::consts::PI * params.sigma * params.sigma);
    let f = |phi: f64| {
        let s = phi.sin();
        let lambda = c - h * phi.cos();
        if lambda <= 0.0 {
            0.0
        } else {
            k * h * h * s * s / lambda
        }
    };
    const PANELS: usize = 512;
    let step = (p1 - p0) / PANELS as f64;
    let mut sum = f(p0) + f(p1);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(p0 + i as f64 * step);
    }
    sum * step / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ratio_bounds_and_center() {
        let p = mp_bounds(1.0, 1.0).unwrap();
        assert_eq!((p.lambda_minus, p.lambda_plus), (0.0, 4.0));
        assert!((mp_density(2.0, &p) - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn density_vanishes_at_edges() {
        let p = mp_bounds(3.0, 1.0).unwrap();
        assert_eq!(mp_density(p.lambda_minus, &p), 0.0);
        assert_eq!(mp_density(p.lambda_plus, &p), 0.0);
        assert_eq!(mp_density(-1.0, &p), 0.0);
    }

    #[test]
    fn total_mass_is_one() {
        for q in [1.5, 3.0, 10.0, 11.13] {
            let p = mp_bounds(q, 1.0).unwrap();
            assert!((mp_mass(0.0, 10.0, &p) - 1.0).abs() < 1e-10, "Q={q}");
        }
    }

    #[test]
    fn sigma_scales_the_bulk() {
        let p = mp_bounds(4.0, 2.0).unwrap();
        assert!((p.lambda_minus - 4.0 * 0.25).abs() < 1e-15);
        assert!((p.lambda_plus - 4.0 * 2.25).abs() < 1e-15);
        assert!((mp_mass(0.0, 100.0, &p) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_parameters() {
        assert!(mp_bounds(0.0, 1.0).is_err());
        assert!(mp_bounds(2.0, -1.0).is_err());
        assert!(mp_bounds(f64::NAN, 1.0).is_err());
    }
}
