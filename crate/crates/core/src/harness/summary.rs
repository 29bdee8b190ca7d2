use std::collections::BTreeMap;

use serde::Serialize;

use super::HarnessError;

/// One Monte Carlo trial, as written to `trials.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    /// Stable husbands found; for ACCEPTANCE_DIST the number of accepted
    /// offers.
    pub husband_count: u64,
    pub first_output_time: Option<u64>,
    pub accept_pre_output: Option<u64>,
    pub elapsed_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub value: u64,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample variance; zero for a single value.
    pub variance: f64,
    pub min: u64,
    pub max: u64,
    pub p5: u64,
    pub p50: u64,
    pub p95: u64,
    pub histogram: Vec<Bin>,
    pub envelope: [f64; 2],
    pub in_envelope_fraction: f64,
}

/// Summary of the husband counts.
pub fn summarize(results: &[TrialResult], envelope: [f64; 2]) -> Result<Summary, HarnessError> {
    summarize_by(results, envelope, |r| r.husband_count)
}

pub fn summarize_by(
    results: &[TrialResult],
    envelope: [f64; 2],
    value: impl Fn(&TrialResult) -> u64,
) -> Result<Summary, HarnessError> {
    let values: Vec<u64> = results.iter().map(value).collect();
    summarize_values(&values, envelope)
}

/// Nearest-rank quantiles over the sorted values, so the result does not
/// depend on the order of the input.
pub fn summarize_values(values: &[u64], envelope: [f64; 2]) -> Result<Summary, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let len = v.len();
    let count = len as f64;
    let mean = v.iter().map(|&x| x as f64).sum::<f64>() / count;
    let variance = if len > 1 {
        v.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let rank = |q: f64| v[((q * count).ceil() as usize).clamp(1, len) - 1];
    let mut bins: BTreeMap<u64, u64> = BTreeMap::new();
    for &x in &v {
        *bins.entry(x).or_default() += 1;
    }
    let histogram = bins
        .into_iter()
        .map(|(value, c)| Bin {
            value,
            count: c,
            frequency: c as f64 / count,
        })
        .collect();
    let inside = v
        .iter()
        .filter(|&&x| envelope[0] <= x as f64 && x as f64 <= envelope[1])
        .count();
    Ok(Summary {
        count: len,
        mean,
        variance,
        min: v[0],
        max: v[len - 1],
        p5: rank(0.05),
        p50: rank(0.5),
        p95: rank(0.95),
        histogram,
        envelope,
        in_envelope_fraction: inside as f64 / count,
    })
}

/// Total-variation distance between two empirical histograms.
pub fn total_variation(a: &Summary, b: &Summary) -> f64 {
    let mut diff: BTreeMap<u64, f64> = BTreeMap::new();
    for bin in &a.histogram {
        *diff.entry(bin.value).or_default() += bin.frequency;
    }
    for bin in &b.histogram {
        *diff.entry(bin.value).or_default() -= bin.frequency;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(cs: &[u64]) -> Vec<TrialResult> {
        cs.iter()
            .enumerate()
            .map(|(i, &c)| TrialResult {
                trial: i as u64,
                seed: i as u64,
                husband_count: c,
                first_output_time: None,
                accept_pre_output: None,
                elapsed_us: 0,
            })
            .collect()
    }

    #[test]
    fn envelope_fractions() {
        let one = summarize(&counts(&[5]), [2.0, 10.0]).unwrap();
        assert_eq!(one.in_envelope_fraction, 1.0);
        assert_eq!(one.variance, 0.0);
        let two = summarize(&counts(&[3, 7]), [4.0, 10.0]).unwrap();
        assert_eq!(two.in_envelope_fraction, 0.5);
        assert_eq!((two.min, two.max, two.p50), (3, 7, 3));
        assert_eq!(two.variance, 8.0);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            summarize(&[], [0.0, 1.0]),
            Err(HarnessError::EmptyResults)
        ));
    }

    #[test]
    fn quantiles_and_histogram() {
        let s = summarize(&counts(&(1..=100).collect::<Vec<_>>()), [0.0, 0.0]).unwrap();
        assert_eq!((s.p5, s.p50, s.p95), (5, 50, 95));
        assert_eq!(s.mean, 50.5);
        let h = summarize(&counts(&[2, 2, 4]), [0.0, 9.0])
            .unwrap()
            .histogram;
        assert_eq!(
            h.iter().map(|b| (b.value, b.count)).collect::<Vec<_>>(),
            vec![(2, 2), (4, 1)]
        );
    }

    #[test]
    fn permutation_invariant() {
        let a = summarize(&counts(&[9, 1, 4, 4, 7, 2]), [2.0, 7.0]).unwrap();
        let b = summarize(&counts(&[4, 2, 7, 9, 4, 1]), [2.0, 7.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tv_distance() {
        let a = summarize(&counts(&[1, 1, 2, 2]), [0.0, 0.0]).unwrap();
        let b = summarize(&counts(&[1, 2, 2, 3]), [0.0, 0.0]).unwrap();
        assert!((total_variation(&a, &b) - 0.25).abs() < 1e-15);
        assert_eq!(total_variation(&a, &a), 0.0);
    }
}
