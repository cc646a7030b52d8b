//! Small numeric helpers shared by the simulation harness and tests.

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (divisor n-1); 0 for fewer than two points.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Median by sorting a copy.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty slice");
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and Uniform(lo, hi).
pub fn ks_distance_to_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    assert!(!samples.is_empty() && hi > lo);
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN"));
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let u = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        d = d.max(((i + 1) as f64 / n - u).abs());
        d = d.max((u - i as f64 / n).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("non-NaN"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("non-NaN"));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(sample_variance(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(sample_variance(&[5.0]), 0.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn ks_of_exact_grid_is_small() {
        // midpoints of n equal cells have KS distance 1/(2n)
        let n = 100;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance_to_uniform(&grid, 0.0, 1.0);
        assert!((d - 0.005).abs() < 1e-12, "{d}");
    }

    #[test]
    fn ks_detects_point_mass() {
        let d = ks_distance_to_uniform(&[0.5; 50], 0.0, 1.0);
        assert!(d > 0.49);
    }

    #[test]
    fn two_sample_ks_identical_is_zero() {
        let a: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(ks_distance_two_sample(&a, &a), 0.0);
        let b: Vec<f64> = (0..10).map(|i| i as f64 + 100.0).collect();
        assert_eq!(ks_distance_two_sample(&a, &b), 1.0);
    }
}
