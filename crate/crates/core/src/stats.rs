//! Small statistical helpers shared by the fitting code and the tests.

use statrs::function::erf::erfc;

/// Mean and sample standard deviation (n - 1 denominator).
///
/// Returns `None` for an empty slice; the deviation is 0 for one sample.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// Two-sided tail probability of a standard normal: `P(|Z| >= |z|)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
///
/// `samples` is sorted in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` on `n` samples.
///
/// Uses the Kolmogorov series with the small-sample correction of
/// Stephens: `lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * d`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mean_std_basic() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(m, 2.5);
        assert_relative_eq!(s, (5.0f64 / 3.0).sqrt());
        assert!(mean_std(&[]).is_none());
    }

    #[test]
    fn normal_tail_values() {
        assert_relative_eq!(normal_two_sided_p(0.0), 1.0);
        assert_relative_eq!(normal_two_sided_p(1.959_963_985), 0.05, epsilon = 1e-8);
        assert_relative_eq!(normal_two_sided_p(-1.959_963_985), 0.05, epsilon = 1e-8);
    }

    #[test]
    fn ks_known_critical_value() {
        // 1.628 / sqrt(n) is the asymptotic 1% critical value.
        let n = 10_000;
        let d = 1.6276 / (n as f64).sqrt();
        let p = ks_p_value(d, n);
        assert!((p - 0.01).abs() < 1e-3, "p = {p}");
    }

    #[test]
    fn ks_statistic_of_uniform_grid() {
        let mut xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert_relative_eq!(d, 0.005, epsilon = 1e-12);
    }
}
