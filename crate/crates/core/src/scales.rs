//! Scaling quantities and regime classification for a `(λ, π)` pair.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// All derived scales of a `(λ, π)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub lambda: f64,
    pub pi: f64,
    /// Time acceleration `ln(1/λ)`.
    pub a: f64,
    /// Space unit `⌊1/(λ a)⌋` in sites.
    pub n: u64,
    /// Density window radius `⌊1/(λ a²)⌋` in sites.
    pub m: u64,
    pub eps: f64,
    /// `n / (a π)`.
    pub ratio: f64,
    /// `ln π / ln(1/λ)`.
    pub zeta: f64,
    /// Set when `2m + 1 ≥ 1/λ`, where the density statistic degenerates.
    pub outside_asymptotic_range: bool,
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return param(format!("lambda must lie in (0,1), got {lambda}"));
    }
    Ok(())
}

pub fn compute_scales(lambda: f64, pi: f64) -> Result<Scales> {
    check_lambda(lambda)?;
    if !(pi >= 1.0 && pi.is_finite()) {
        return param(format!("pi must be a finite value >= 1, got {pi}"));
    }
    let a = -lambda.ln();
    let n = (1.0 / (lambda * a)).floor();
    let m = (1.0 / (lambda * a * a)).floor();
    if !(n.is_finite() && m.is_finite()) || n > u64::MAX as f64 {
        return param(format!("lambda {lambda} too close to 1"));
    }
    let (n, m) = (n as u64, m as u64);
    Ok(Scales {
        lambda,
        pi,
        a,
        n,
        m,
        eps: 1.0 / (a * a * a),
        ratio: n as f64 / (a * pi),
        zeta: pi.ln() / a,
        outside_asymptotic_range: (2.0 * m as f64 + 1.0) >= 1.0 / lambda,
    })
}

/// Regime of a `(λ, π)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param")]
pub enum Regime {
    Fast,
    Intermediate(f64),
    Slow(f64),
}

impl Regime {
    pub fn same_kind(&self, other: &Regime) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Regime::Intermediate(p) if !(p > 0.0 && p.is_finite()) => {
                param(format!("intermediate regime needs p > 0, got {p}"))
            }
            Regime::Slow(z0) if !(0.0..=1.0).contains(&z0) => {
                param(format!("slow regime needs z0 in [0,1], got {z0}"))
            }
            _ => Ok(()),
        }
    }
}

/// Cut-offs on `n/(aπ)` separating the regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub fast: f64,
    pub slow: f64,
    /// Ratio targeted by [`pi_for_regime`] for the fast regime.
    pub fast_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { fast: 0.05, slow: 20.0, fast_ratio: 0.01 }
    }
}

pub fn classify_regime(lambda: f64, pi: f64, th: &Thresholds) -> Result<(Regime, f64, f64)> {
    let s = compute_scales(lambda, pi)?;
    let regime = if s.ratio < th.fast {
        Regime::Fast
    } else if s.ratio > th.slow {
        Regime::Slow(s.zeta.clamp(0.0, 1.0))
    } else {
        Regime::Intermediate(s.ratio)
    };
    Ok((regime, s.ratio, s.zeta))
}

pub fn pi_for_regime(lambda: f64, target: &Regime, th: &Thresholds) -> Result<f64> {
    check_lambda(lambda)?;
    target.validate()?;
    let a = -lambda.ln();
    let n = (1.0 / (lambda * a)).floor();
    let pi = match *target {
        Regime::Intermediate(p) => n / (a * p),
        Regime::Slow(z0) => lambda.powf(-z0),
        Regime::Fast => n / (a * th.fast_ratio),
    };
    if !(pi >= 1.0) {
        return param(format!("regime {target:?} at lambda {lambda} needs pi = {pi} < 1"));
    }
    Ok(pi)
}

/// `1/(λ^z a π) + ε`.
pub fn kappa_z(s: &Scales, z: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return param(format!("z must lie in (0,1), got {z}"));
    }
    Ok(1.0 / (s.lambda.powf(z) * s.a * s.pi) + s.eps)
}

/// `n A/(a π) + ε`.
pub fn varkappa_a(s: &Scales, big_a: f64) -> Result<f64> {
    if !(big_a > 0.0) {
        return param(format!("A must be positive, got {big_a}"));
    }
    Ok(s.n as f64 * big_a / (s.a * s.pi) + s.eps)
}

/// `⌊γ / (λ^{γ + (1-γ) z0} a)⌋`.
pub fn m_gamma(s: &Scales, gamma: f64, z0: f64) -> Result<u64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return param(format!("gamma must lie in (0,1), got {gamma}"));
    }
    if !(0.0..=1.0).contains(&z0) {
        return param(format!("z0 must lie in [0,1], got {z0}"));
    }
    let v = gamma / (s.lambda.powf(gamma + (1.0 - gamma) * z0) * s.a);
    Ok(v.floor() as u64)
}

/// Number of sites `A_λ = ⌊A n⌋` in each half of the box of macroscopic
/// half-width `A`.
pub fn box_half_width(s: &Scales, big_a: f64) -> Result<i64> {
    if !(big_a > 0.0 && big_a.is_finite()) {
        return param(format!("A must be positive, got {big_a}"));
    }
    Ok((big_a * s.n as f64).floor() as i64)
}
