//! Probability generating functions and the two tail inequalities
//!
//! ```text
//! Pr(X <= r) <= x^-r P(x)    0 < x <= 1
//! Pr(X >= r) <= x^-r P(x)    x >= 1
//! ```
//!
//! evaluated in log space so that sizes up to 10^9 neither overflow nor
//! underflow.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the checks

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{harmonic, ln_gamma, ln_gamma_ratio};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("pgf argument must be a nonnegative number, got {0}")]
    NegativeArgument(f64),
    #[error("invalid pgf: {0}")]
    InvalidPgf(String),
    #[error("x = {x} is outside the legal range for a {direction} tail bound")]
    IllegalX { x: f64, direction: Direction },
    #[error("threshold r must be a nonnegative number, got {0}")]
    InvalidThreshold(f64),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

/// Products up to this many factors are summed directly; larger ones go
/// through the log-gamma ratio.
const DIRECT_PRODUCT_LIMIT: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Pgf {
    /// `((n-1+z)/n)^trials`: successes in `trials` Bernoulli(1/n) trials.
    BinomialPower { n: u64, trials: u64 },
    /// `prod_{k=1}^{m} (k-1+z)/k`: acceptances by a girl who accepts her
    /// k-th proposal with probability 1/k.
    RisingProduct { m: u64 },
}

impl Pgf {
    pub fn binomial(n: u64, trials: u64) -> Self {
        Pgf::BinomialPower { n, trials }
    }

    pub fn acceptances(m: u64) -> Self {
        Pgf::RisingProduct { m }
    }

    fn check(&self) -> Result<(), BoundsError> {
        match *self {
            Pgf::BinomialPower { n: 0, .. } => Err(BoundsError::InvalidPgf(
                "binomial power needs n >= 1".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Pgf::BinomialPower { n, trials } => trials as f64 / n as f64,
            Pgf::RisingProduct { m } => harmonic(m),
        }
    }

    /// `ln P(z)`, or `-inf` where `P(z) = 0`.
    pub fn eval_log(&self, z: f64) -> Result<f64, BoundsError> {
        self.check()?;
        if !(z >= 0.0) {
            return Err(BoundsError::NegativeArgument(z));
        }
        Ok(match *self {
            Pgf::BinomialPower { n, trials } => {
                if trials == 0 {
                    0.0
                } else if z == 0.0 && n == 1 {
                    f64::NEG_INFINITY
                } else {
                    trials as f64 * ((z - 1.0) / n as f64).ln_1p()
                }
            }
            Pgf::RisingProduct { m } => rising_log(m, z),
        })
    }
}

fn rising_log(m: u64, z: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if z == 0.0 {
        return f64::NEG_INFINITY;
    }
    if m <= DIRECT_PRODUCT_LIMIT {
        rising_log_direct(m, z)
    } else {
        // ln Γ(m+z) - ln Γ(m+1) - ln Γ(z)
        ln_gamma_ratio(m as f64 + 1.0, z - 1.0) - ln_gamma(z)
    }
}

/// `sum_{k=1}^{m} ln(1 + (z-1)/k)`, compensated.
pub(crate) fn rising_log_direct(m: u64, z: f64) -> f64 {
    let d = z - 1.0;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in (1..=m).rev() {
        let term = if k == 1 {
            z.ln()
        } else {
            (d / k as f64).ln_1p()
        };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `Pr(X <= r)`
    Lower,
    /// `Pr(X >= r)`
    Upper,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        })
    }
}

impl Direction {
    pub fn legal(self, x: f64) -> bool {
        match self {
            Direction::Lower => x > 0.0 && x <= 1.0,
            Direction::Upper => x >= 1.0 && x.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub direction: Direction,
    pub r: f64,
    pub x_star: f64,
    pub value: f64,
}

fn log_bound(pgf: &Pgf, r: f64, x: f64) -> Result<f64, BoundsError> {
    let lp = pgf.eval_log(x)?;
    if lp == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(lp - r * x.ln())
}

/// `min(1, x^-r P(x))` for a legal `x`.
pub fn tail_bound(
    pgf: &Pgf,
    direction: Direction,
    r: f64,
    x: f64,
) -> Result<TailBound, BoundsError> {
    if !direction.legal(x) {
        return Err(BoundsError::IllegalX { x, direction });
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(BoundsError::InvalidThreshold(r));
    }
    let value = log_bound(pgf, r, x)?.min(0.0).exp();
    Ok(TailBound {
        direction,
        r,
        x_star: x,
        value,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const LOWER_LOG_FLOOR: f64 = -700.0;
const UPPER_LOG_CEILING: f64 = 64.0;
const X_TOLERANCE: f64 = 1e-8;

/// Minimizes `x^-r P(x)` over the legal half-line.
///
/// `ln P(e^s) - r s` is convex in `s = ln x`, so golden-section search in
/// `s` finds the minimum of the bracket. The smallest value seen at any
/// probe is returned.
pub fn optimize_tail(pgf: &Pgf, direction: Direction, r: f64) -> Result<TailBound, BoundsError> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(BoundsError::InvalidThreshold(r));
    }
    pgf.check()?;
    let f = |s: f64| log_bound(pgf, r, s.exp()).expect("checked pgf, positive x");

    let mut best = (0.0f64, f(0.0));
    let probe = |s: f64, best: &mut (f64, f64)| {
        let v = f(s);
        if v < best.1 {
            *best = (s, v);
        }
        v
    };

    let (mut a, mut b) = match direction {
        Direction::Lower => (LOWER_LOG_FLOOR, 0.0),
        Direction::Upper => {
            let mut hi = 0.5f64;
            let mut prev = probe(hi / 2.0, &mut best);
            loop {
                let v = probe(hi, &mut best);
                if v > prev || hi >= UPPER_LOG_CEILING {
                    break;
                }
                prev = v;
                hi *= 2.0;
            }
            (0.0, hi.min(UPPER_LOG_CEILING))
        }
    };
    probe(a, &mut best);
    probe(b, &mut best);

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = probe(c, &mut best);
    let mut fd = probe(d, &mut best);
    for _ in 0..400 {
        let (xa, xb) = (a.exp(), b.exp());
        if xb - xa <= X_TOLERANCE * xa.max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = probe(c, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = probe(d, &mut best);
        }
    }

    let x = best.0.exp().clamp(
        if direction == Direction::Lower {
            f64::MIN_POSITIVE
        } else {
            1.0
        },
        if direction == Direction::Lower {
            1.0
        } else {
            f64::MAX
        },
    );
    tail_bound(pgf, direction, r, x)
}

/// Parameter-dependent quantities from the proof of the logarithmic
/// stable-husband count, for comparison with measured counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub n: f64,
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub ln_n: f64,
    /// `[c ln n, C ln n]`
    pub interval: [f64; 2],
    /// `[(1-eps) delta ln n, (1+eps) ln n]`, the constants the proof delivers.
    pub proof_interval: [f64; 2],
    /// `[(1/2-eps) ln n, (1+eps) ln n]`
    pub sharp_interval: [f64; 2],
    /// `floor(n^(1+delta))`, the proposal window of the lemma audits.
    pub window: f64,
    /// `n^delta / 2 / ln n`: minimum non-redundant proposals per girl.
    pub nonredundant_floor: f64,
    /// `floor(n ln n ln ln n)`; absent when `ln ln n <= 0`.
    pub first_output_window: Option<f64>,
    /// `ln n (ln ln n)^2`: proposals to the girl before the first output.
    pub pre_output_proposals: Option<f64>,
    /// `m / (ln m)^3` for the above `m`: acceptances before the first output.
    pub pre_output_acceptance_ceiling: Option<f64>,
    /// Supremum of exponents `gamma` with failure probability `O(n^-gamma)`.
    pub failure_exponent: f64,
    /// The O(1) term of the third acceptance estimate is not pinned down.
    pub third_estimate_constant: &'static str,
}

pub fn theorem_envelope(
    n: f64,
    c: f64,
    big_c: f64,
    delta: f64,
    epsilon: f64,
) -> Result<Envelope, BoundsError> {
    let fail = |msg: String| Err(BoundsError::Infeasible(msg));
    if !(n > 1.0) || !n.is_finite() {
        return fail(format!("n must exceed 1, got {n}"));
    }
    if !(c > 0.0 && c < 0.5) {
        return fail(format!("c must satisfy 0 < c < 1/2, got {c}"));
    }
    if !(big_c > 1.0) {
        return fail(format!("C must exceed 1, got {big_c}"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return fail(format!("delta must satisfy 0 < delta < 1/2, got {delta}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return fail(format!(
            "epsilon must satisfy 0 < epsilon < 1, got {epsilon}"
        ));
    }
    if !((1.0 - epsilon) * delta > c) {
        return fail(format!(
            "(1-epsilon)*delta = {} does not exceed c = {c}",
            (1.0 - epsilon) * delta
        ));
    }
    if !(1.0 + epsilon < big_c) {
        return fail(format!(
            "1+epsilon = {} is not below C = {big_c}",
            1.0 + epsilon
        ));
    }

    let ln_n = n.ln();
    let lnln = ln_n.ln();
    let first_output_window = (lnln > 0.0).then(|| (n * ln_n * lnln).floor());
    let m = (lnln > 0.0).then_some(ln_n * lnln * lnln);
    let ceiling = m.filter(|&m| m > 1.0).map(|m| m / m.ln().powi(3));
    let cm1 = big_c - 1.0;
    let failure_exponent = ((1.0 - 2.0 * c).powi(2) / 2.0).min(cm1 * cm1 / 2.0 - cm1.powi(3) / 6.0);

    Ok(Envelope {
        n,
        c,
        big_c,
        delta,
        epsilon,
        ln_n,
        interval: [c * ln_n, big_c * ln_n],
        proof_interval: [(1.0 - epsilon) * delta * ln_n, (1.0 + epsilon) * ln_n],
        sharp_interval: [(0.5 - epsilon).max(0.0) * ln_n, (1.0 + epsilon) * ln_n],
        window: n.powf(1.0 + delta).floor(),
        nonredundant_floor: 0.5 * n.powf(delta) / ln_n,
        first_output_window,
        pre_output_proposals: m,
        pre_output_acceptance_ceiling: ceiling,
        failure_exponent,
        third_estimate_constant: "unspecified",
    })
}
