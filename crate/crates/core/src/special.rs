//! Harmonic numbers and log-gamma helpers.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest `m` summed term by term; beyond it asymptotic series are used.
pub const DIRECT_SUM_LIMIT: u64 = 1_000_000;

/// `H_m = 1 + 1/2 + ... + 1/m`, with `H_0 = 0`.
pub fn harmonic(m: u64) -> f64 {
    if m <= DIRECT_SUM_LIMIT {
        // smallest terms first
        (1..=m).rev().map(|k| 1.0 / k as f64).sum()
    } else {
        let x = m as f64;
        let x2 = x * x;
        x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
    }
}

/// `H_m^(2) = 1 + 1/4 + ... + 1/m^2`.
pub fn harmonic2(m: u64) -> f64 {
    if m <= DIRECT_SUM_LIMIT {
        (1..=m).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum()
    } else {
        let x = m as f64;
        std::f64::consts::PI.powi(2) / 6.0 - 1.0 / x + 1.0 / (2.0 * x * x) - 1.0 / (6.0 * x * x * x)
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Tail of Stirling's series for `ln Γ(x)` after `(x-1/2)ln x - x + ln(2π)/2`.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// `ln Γ(a + d) - ln Γ(a)` without forming either term, accurate when `a`
/// is large and `a + d` stays well away from zero.
pub fn ln_gamma_ratio(a: f64, d: f64) -> f64 {
    let b = a + d;
    if a < 16.0 || b < 16.0 {
        return ln_gamma(b) - ln_gamma(a);
    }
    (a - 0.5) * (d / a).ln_1p() + d * b.ln() - d + (stirling_tail(b) - stirling_tail(a))
}
