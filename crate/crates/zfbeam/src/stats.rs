//! Elementary sample statistics used by the Monte Carlo machinery and tests.

pub fn mean(data: &[f64]) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    data.iter().sum::<f64>() / data.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two samples.
pub fn sample_variance(data: &[f64]) -> f64 {
    let n = data.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(data);
    data.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the sample mean.
pub fn standard_error(data: &[f64]) -> f64 {
    if data.len() < 2 {
        return 0.0;
    }
    (sample_variance(data) / data.len() as f64).sqrt()
}

/// Median (lower median for even lengths); NaN on empty input.
pub fn median(data: &[f64]) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[(sorted.len() - 1) / 2]
}

pub(crate) fn sample_covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    if n < 2 {
        return 0.0;
    }
    let (ma, mb) = (mean(a), mean(b));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / (n - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&data), 2.5);
        assert!((sample_variance(&data) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(median(&data), 2.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn covariance_of_identical_series_is_variance() {
        let data = [0.5, 1.5, -2.0, 3.0];
        assert!((sample_covariance(&data, &data) - sample_variance(&data)).abs() < 1e-15);
    }
}
