//! Exact small distributions shared by the soundness checks, kept as
//! integer weights so tail probabilities are one correctly rounded
//! division.
#![allow(dead_code)]

use stable_husbands::bounds::Direction;

pub struct Exact {
    pub weights: Vec<u128>,
    pub total: u128,
}

impl Exact {
    pub fn mean(&self) -> f64 {
        let s: u128 = self
            .weights
            .iter()
            .enumerate()
            .map(|(k, w)| k as u128 * w)
            .sum();
        s as f64 / self.total as f64
    }

    pub fn tail(&self, direction: Direction, r: f64) -> f64 {
        let s: u128 = self
            .weights
            .iter()
            .enumerate()
            .filter(|(k, _)| match direction {
                Direction::Lower => (*k as f64) <= r,
                Direction::Upper => (*k as f64) >= r,
            })
            .map(|(_, w)| w)
            .sum();
        s as f64 / self.total as f64
    }

    pub fn support(&self) -> usize {
        self.weights.len()
    }
}

/// Successes in `trials` Bernoulli(1/n) draws: weight of `k` is
/// `C(trials, k) (n-1)^(trials-k)` out of `n^trials`, built by convolution.
pub fn binomial(n: u64, trials: u32) -> Exact {
    let mut w: Vec<u128> = vec![1];
    for _ in 0..trials {
        let mut next = vec![0u128; w.len() + 1];
        for (k, &v) in w.iter().enumerate() {
            next[k] += v * (n as u128 - 1);
            next[k + 1] += v;
        }
        w = next;
    }
    Exact {
        weights: w,
        total: (n as u128).pow(trials),
    }
}

/// Cycle counts of a uniform permutation of `m`, which is the acceptance
/// count of a girl receiving `m` proposals: unsigned Stirling numbers of the
/// first kind, `c(j+1, k) = j c(j, k) + c(j, k-1)`, out of `m!`.
pub fn stirling(m: u64) -> Exact {
    let mut c: Vec<u128> = vec![1];
    for j in 0..m {
        let mut next = vec![0u128; c.len() + 1];
        for (k, &v) in c.iter().enumerate() {
            next[k] += j as u128 * v;
            next[k + 1] += v;
        }
        c = next;
    }
    Exact {
        weights: c,
        total: (1..=m as u128).product(),
    }
}

/// 50 legal evaluation points for each direction.
pub fn grid(direction: Direction) -> Vec<f64> {
    match direction {
        Direction::Lower => (1..=50).map(|i| i as f64 / 50.0).collect(),
        Direction::Upper => (0..50).map(|i| 1.0 + 19.0 * i as f64 / 49.0).collect(),
    }
}
