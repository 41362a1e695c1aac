//! Statistical kernels: two-sample Kolmogorov–Smirnov test, chi-squared
//! upper tail via the regularized incomplete gamma function, and Pearson
//! correlation.
//!
//! Everything here is hand-evaluated from series/continued-fraction forms so
//! results are identical across platforms and fully under test control.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Outcome of a two-sample Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Supremum of absolute ECDF differences, in [0, 1].
    pub statistic: f64,
    /// Asymptotic (or permutation) p-value, in [0, 1].
    pub p_value: f64,
}

/// Outcome of a chi-squared goodness-of-fit test against uniformity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Two-sample KS test with the asymptotic Kolmogorov p-value.
///
/// The statistic is `sup |F1(x) - F2(x)|` over the pooled sample points,
/// evaluated after consuming all ties of each distinct value. The p-value is
/// `Q(sqrt(m k / (m + k)) * statistic)` where
/// `Q(lambda) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2)`.
pub fn ks_two_sample(d1: &[f64], d2: &[f64]) -> Result<KsResult> {
    if d1.is_empty() || d2.is_empty() {
        return Err(Error::RejectedInput(
            "KS test requires two non-empty samples".into(),
        ));
    }
    let statistic = ks_statistic(d1, d2);
    let m = d1.len() as f64;
    let k = d2.len() as f64;
    let lambda = (m * k / (m + k)).sqrt() * statistic;
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_q(lambda),
    })
}

/// Two-sample KS test with a permutation p-value: the pooled sample is
/// reshuffled `rounds` times and the p-value is the add-one-smoothed
/// fraction of permuted statistics at least as large as the observed one.
pub fn ks_two_sample_permutation(
    d1: &[f64],
    d2: &[f64],
    rounds: u32,
    rng: &mut ChaCha8Rng,
) -> Result<KsResult> {
    if d1.is_empty() || d2.is_empty() {
        return Err(Error::RejectedInput(
            "KS test requires two non-empty samples".into(),
        ));
    }
    if rounds == 0 {
        return Err(Error::RejectedInput(
            "permutation test requires at least one round".into(),
        ));
    }
    let statistic = ks_statistic(d1, d2);
    let mut pool: Vec<f64> = d1.iter().chain(d2.iter()).copied().collect();
    let mut at_least = 0u32;
    for _ in 0..rounds {
        pool.shuffle(rng);
        if ks_statistic(&pool[..d1.len()], &pool[d1.len()..]) >= statistic - 1e-12 {
            at_least += 1;
        }
    }
    Ok(KsResult {
        statistic,
        p_value: f64::from(at_least + 1) / f64::from(rounds + 1),
    })
}

/// `sup |F1 - F2|` by a single merge walk over the two sorted samples.
/// Ties are handled by advancing past every copy of a value on both sides
/// before comparing the ECDFs.
pub fn ks_statistic(d1: &[f64], d2: &[f64]) -> f64 {
    let mut a = d1.to_vec();
    let mut b = d2.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);

    let (m, k) = (a.len() as f64, b.len() as f64);
    let (mut x, mut y) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while x < a.len() && y < b.len() {
        let v = a[x].min(b[y]);
        while x < a.len() && a[x] <= v {
            x += 1;
        }
        while y < b.len() && b[y] <= v {
            y += 1;
        }
        sup = sup.max((x as f64 / m - y as f64 / k).abs());
    }
    sup
}

/// Kolmogorov's limiting tail function `Q(lambda)`, clamped to [0, 1].
///
/// The alternating series terminates once a term is negligible relative to
/// the partial sum. For very small `lambda` the series is numerically flat
/// at 1, which is also its true limit, so 1 is returned if the cap on the
/// number of terms is reached.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    let mut sign = 1.0f64;
    for j in 1..=300u32 {
        let jf = f64::from(j);
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term <= 1e-14 * sum.abs() + f64::MIN_POSITIVE {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    1.0
}

/// Chi-squared test of uniform counts: `statistic = sum (o - e)^2 / e` with
/// `e = total / categories`, `df = categories - 1`, and the p-value from the
/// upper tail of the chi-squared distribution.
pub fn chi_squared_uniformity(counts: &[u64]) -> Result<ChiSquaredResult> {
    if counts.len() < 2 {
        return Err(Error::RejectedInput(
            "chi-squared uniformity needs at least 2 categories".into(),
        ));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::RejectedInput(
            "chi-squared uniformity needs a positive total count".into(),
        ));
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&o| {
            let diff = o as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let degrees_of_freedom = counts.len() - 1;
    Ok(ChiSquaredResult {
        statistic,
        degrees_of_freedom,
        p_value: chi_squared_upper_tail(statistic, degrees_of_freedom),
    })
}

/// Upper-tail probability of the chi-squared distribution,
/// `P(X >= x) = Q(df/2, x/2)`.
pub fn chi_squared_upper_tail(x: f64, df: usize) -> f64 {
    assert!(df > 0, "chi-squared needs at least one degree of freedom");
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_ITMAX: usize = 500;

/// P(a, x) by its power series, accurate for x < a + 1.
fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_ITMAX {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Q(a, x) by the Lentz-evaluated continued fraction, accurate for x >= a + 1.
fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_ITMAX {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_93;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::RejectedInput(
            "correlation needs two equal-length samples of size >= 2".into(),
        ));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mean_x) * (b - mean_y);
        var_x += (a - mean_x).powi(2);
        var_y += (b - mean_y).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::RejectedInput(
            "correlation undefined for a constant sample".into(),
        ));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    #[test]
    fn ks_identical_samples() {
        let d = vec![0.0, 0.25, 0.25, 0.5, 1.0];
        let r = ks_two_sample(&d, &d).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_disjoint_supports() {
        let r = ks_two_sample(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 0.1);
    }

    #[test]
    fn ks_tied_example_one_third() {
        // ECDFs at value 0: 2/3 vs 1/3.
        let r = ks_two_sample(&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0]).unwrap();
        assert!((r.statistic - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ks_asymptotic_p_reference_values() {
        // For two samples of 1000, sqrt(mk/(m+k)) = sqrt(500).
        let lambda = 500f64.sqrt();
        assert!((kolmogorov_q(lambda * 0.023) - 0.954_058_146_874_523).abs() < 1e-9);
        assert!(kolmogorov_q(lambda * 0.175) < 1e-3);
    }

    #[test]
    fn ks_rejects_empty_input() {
        assert!(matches!(
            ks_two_sample(&[], &[1.0]),
            Err(Error::RejectedInput(_))
        ));
    }

    #[test]
    fn ks_permutation_matches_expectations() {
        let mut rng = RngState::from_seed(9);
        let d = vec![0.0, 0.5, 1.0, 0.5];
        let same = ks_two_sample_permutation(&d, &d, 199, rng.rng()).unwrap();
        assert_eq!(same.p_value, 1.0);

        let apart =
            ks_two_sample_permutation(&[0.0; 20], &[1.0; 20], 199, rng.rng()).unwrap();
        assert_eq!(apart.statistic, 1.0);
        assert!(apart.p_value <= 0.01);
    }

    #[test]
    fn chi_squared_exactly_uniform() {
        let r = chi_squared_uniformity(&[200, 200, 200, 200, 200]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.degrees_of_freedom, 4);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi_squared_hand_computed_statistic() {
        // (100^2 + 4 * 25^2) / 200 = 62.5
        let r = chi_squared_uniformity(&[300, 175, 175, 175, 175]).unwrap();
        assert!((r.statistic - 62.5).abs() < 1e-12);
        assert_eq!(r.degrees_of_freedom, 4);
        // Reference value 8.6462e-13 for chi2 = 62.5 at df = 4.
        assert!((r.p_value - 8.646_237_47e-13).abs() < 1e-16);
    }

    #[test]
    fn chi_squared_published_critical_values() {
        // (df, critical value, alpha) from standard tables.
        let table = [
            (1, 3.841, 0.05),
            (2, 5.991, 0.05),
            (4, 9.488, 0.05),
            (10, 18.307, 0.05),
            (4, 13.277, 0.01),
            (10, 23.209, 0.01),
        ];
        for (df, crit, alpha) in table {
            let p = chi_squared_upper_tail(crit, df);
            assert!(
                (p - alpha).abs() < 1e-4,
                "df {df}: p {p} not within 1e-4 of {alpha}"
            );
        }
    }

    #[test]
    fn chi_squared_boundary_inverts_to_published_value() {
        // Bisection on the upper tail: the df = 4, alpha = 0.05 boundary.
        let (mut lo, mut hi) = (0.0f64, 100.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if chi_squared_upper_tail(mid, 4) > 0.05 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 9.488).abs() < 1e-3, "boundary {lo}");
    }

    #[test]
    fn chi_squared_rejects_bad_input() {
        assert!(matches!(
            chi_squared_uniformity(&[5]),
            Err(Error::RejectedInput(_))
        ));
        assert!(matches!(
            chi_squared_uniformity(&[0, 0]),
            Err(Error::RejectedInput(_))
        ));
    }

    #[test]
    fn ln_gamma_reference_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        assert!((ln_gamma(2.0)).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn gamma_p_q_complement() {
        for &(a, x) in &[(0.5, 0.3), (2.0, 1.0), (5.0, 9.0), (46.5, 40.0)] {
            let sum = gamma_p(a, x) + gamma_q(a, x);
            assert!((sum - 1.0).abs() < 1e-12, "P + Q = {sum} at ({a}, {x})");
        }
    }

    #[test]
    fn pearson_perfect_and_inverse() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up = [2.0, 4.0, 6.0, 8.0];
        let down = [8.0, 6.0, 4.0, 2.0];
        assert!((pearson_correlation(&x, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_correlation(&x, &down).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson_correlation(&x, &[1.0; 4]).is_err());
    }
}
