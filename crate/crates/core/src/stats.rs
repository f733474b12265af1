//! Shared statistical primitives: Kolmogorov-Smirnov distances with
//! asymptotic p-values, a chi-square goodness-of-fit test against the
//! geometric family, and small summary helpers.

use num_complex::Complex64;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// `e^{i theta}` built so that conjugate symmetry is exact: the real part is
/// computed from `|theta|` and the sign is applied to the imaginary part,
/// hence `cis(-t) == conj(cis(t))` bit for bit.
pub fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.abs().sin_cos();
    Complex64::new(c, if theta < 0.0 { -s } else { s })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// Standard error of the mean of a correlated sequence, by batch means:
/// the sequence is cut into `batches` contiguous blocks and the SE of the
/// block averages is used. Robust for autocorrelated chain output.
pub fn batch_mean_se(xs: &[f64], batches: usize) -> f64 {
    assert!(batches >= 2 && xs.len() >= 2 * batches);
    let bs = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| mean(&xs[b * bs..(b + 1) * bs]))
        .collect();
    sample_sd(&means) / (batches as f64).sqrt()
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic KS critical distance at level `alpha` for effective sample
/// size `n_eff` (`n` one-sample, `n m / (n + m)` two-sample).
pub fn ks_critical(n_eff: f64, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / n_eff.sqrt()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_eff: f64,
}

/// One-sample KS distance between `data` and a reference CDF, with the
/// asymptotic p-value `Q(sqrt(n) D)`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> KsResult {
    assert!(!data.is_empty());
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult { statistic: d, p_value: kolmogorov_sf(n.sqrt() * d), n_eff: n }
}

/// Two-sample KS distance with asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    KsResult { statistic: d, p_value: kolmogorov_sf(n_eff.sqrt() * d), n_eff }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub cells: usize,
}

/// Chi-square goodness of fit of observed cycle lengths against
/// `Geometric(alpha)` on `{1, 2, ...}`. Cells are pooled from the right so
/// every expected count is at least `min_expected`; `alpha` is known, so the
/// degrees of freedom are `cells - 1`.
pub fn chi_square_geometric(cycles: &[usize], alpha: f64, min_expected: f64) -> ChiSquareResult {
    assert!(!cycles.is_empty() && alpha > 0.0 && alpha <= 1.0);
    let n = cycles.len() as f64;

    // Individual cells k = 1, 2, ... while both the cell and the remaining
    // tail stay above the pooling floor; one tail cell takes the rest.
    let mut probs: Vec<f64> = Vec::new();
    let mut k = 1usize;
    let mut tail = 1.0; // P(K >= k)
    loop {
        let cell = tail * alpha; // P(K = k)
        let rest = tail - cell;
        if n * cell < min_expected || n * rest < min_expected || k > 10_000 {
            probs.push(tail);
            break;
        }
        probs.push(cell);
        tail = rest;
        k += 1;
    }
    let cells = probs.len();
    if cells < 2 {
        // Degenerate split (e.g. alpha = 1): nothing to test.
        return ChiSquareResult { statistic: 0.0, df: 0, p_value: 1.0, cells };
    }

    let mut observed = vec![0.0f64; cells];
    for &c in cycles {
        let idx = if c >= cells { cells - 1 } else { c - 1 };
        observed[idx] += 1.0;
    }
    let statistic: f64 = probs
        .iter()
        .zip(&observed)
        .map(|(p, o)| {
            let e = n * p;
            (o - e) * (o - e) / e
        })
        .sum();
    let df = cells - 1;
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    ChiSquareResult { statistic, df, p_value: 1.0 - dist.cdf(statistic), cells }
}
