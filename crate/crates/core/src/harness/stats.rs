//! Small statistics helpers for the Monte Carlo verdicts.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Standard error of a Bernoulli frequency estimate.
pub fn bernoulli_se(p_hat: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
}

/// Standard error for a hypothesised success probability `p`.
pub fn binomial_se(p: f64, trials: u64) -> f64 {
    bernoulli_se(p, trials)
}

/// Pearson χ² goodness-of-fit p-value. Cells with zero expected mass must
/// also be empty, otherwise the p-value is 0.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len(), "cell count mismatch");
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e <= 0.0 {
            if o > 0 {
                return 0.0;
            }
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    let dist = ChiSquared::new((cells - 1) as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}
