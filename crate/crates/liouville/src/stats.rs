//! Small statistics toolbox: moment summaries, two-sample Kolmogorov-Smirnov,
//! sign tests, and least-squares slopes used by the verification suites.

use crate::exec::pairwise_sum;

/// Sample mean and standard error (sd / sqrt(n)), fixed-order reduction.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = pairwise_sum(xs) / n as f64;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Standard error of a difference of independent estimates.
pub fn combined_stderr(se1: f64, se2: f64) -> f64 {
    (se1 * se1 + se2 * se2).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (xa.len(), xb.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        if xa[i] <= xb[j] {
            i += 1;
        } else {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..101 {
        let term = 2.0 * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// Two-sided exact sign test: p-value for `k` successes out of `n` fair coin
/// flips.
pub fn sign_test_p(k: usize, n: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 0.0;
    for j in 0..=k {
        acc += binom_pmf(n, j);
    }
    (2.0 * acc).min(1.0)
}

fn binom_pmf(n: usize, k: usize) -> f64 {
    let mut log_c = 0.0;
    for j in 0..k {
        log_c += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
    }
    (log_c - n as f64 * std::f64::consts::LN_2).exp()
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Closed-form negative moment of a lognormal e^{N(mu, sigma^2)}:
/// `E[X^{-k}] = exp(-k mu + k^2 sigma^2 / 2)`.
pub fn lognormal_neg_moment(mu: f64, sigma: f64, k: f64) -> f64 {
    (-k * mu + k * k * sigma * sigma / 2.0).exp()
}
