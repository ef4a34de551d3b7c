/// One-sample Kolmogorov-Smirnov statistic `sup_x |F_n(x) − F(x)|` for
/// `samples` sorted ascending.
///
/// Ties are handled by evaluating the empirical CDF just before and just
/// after each distinct sample value.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    debug_assert!(
        samples.windows(2).all(|w| w[0] <= w[1]),
        "ks_statistic needs sorted samples"
    );
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let mut j = i;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        let f = cdf(x);
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((f - below).abs()).max((at - f).abs());
        i = j;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_is_far_from_a_continuous_cdf() {
        let samples = vec![0.5; 100];
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d >= 0.5);
    }

    #[test]
    fn single_point() {
        let d = ks_statistic(&[0.25], |x| x.clamp(0.0, 1.0));
        assert!((d - 0.75).abs() < 1e-15);
    }

    #[test]
    fn evenly_spaced_midpoints_hit_the_minimum_distance() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
}
