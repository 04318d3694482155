//! Distribution oracles for the sampler.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use tlrrt::bias::ug_sample_finite;

/// UG probability straight from its definition: a geometric length `k`
/// (success probability `p`) followed by a uniform pick in `1..=k`.
pub fn ug_series(i: usize, p: f64) -> f64 {
    let mut sum = 0.0;
    for k in i..200_000 {
        let term = p * (1.0 - p).powi(k as i32 - 1) / k as f64;
        sum += term;
        if term < 1e-22 {
            break;
        }
    }
    sum
}

/// Chi-square statistic and 1% critical value, pooling sparse tail bins.
pub fn chi_square(counts: &[u64], probs: &[f64], draws: u64) -> (f64, f64) {
    let (mut stat, mut df) = (0.0, 0usize);
    let (mut obs, mut exp) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(probs) {
        obs += *c as f64;
        exp += p * draws as f64;
        if exp >= 5.0 {
            stat += (obs - exp).powi(2) / exp;
            df += 1;
            (obs, exp) = (0.0, 0.0);
        }
    }
    if exp > 0.0 {
        stat += (obs - exp).powi(2) / exp;
        df += 1;
    }
    let crit = ChiSquared::new((df - 1) as f64).unwrap().inverse_cdf(0.99);
    (stat, crit)
}

/// Chi-square of 10^5 finite-set UG draws against the renormalized series.
pub fn ug_chi_square(n: usize, p: f64, seed: u64) -> (f64, f64) {
    let draws = 100_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n];
    for _ in 0..draws {
        counts[ug_sample_finite(n, p, &mut rng) - 1] += 1;
    }
    let raw: Vec<f64> = (1..=n).map(|i| ug_series(i, p)).collect();
    let total: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
    chi_square(&counts, &probs, draws)
}
