//! Empirical distributions and Kolmogorov–Smirnov goodness of fit.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Asymptotic 1% critical value of the one-sample KS statistic is `1.628/√n`.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Slack allowed when checking that an analytic cdf is monotone.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> EmpiricalDist<T> {
    /// Sorts `samples`; rejects empty input and NaN.
    pub fn new(mut samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("samples", "need at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("samples", "NaN sample"));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_samples(&self) -> &[T] {
        &self.sorted
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.sorted.iter().map(|&x| f(x)).collect())
    }
}

/// Right-continuous empirical cdf: fraction of samples `≤ x`.
pub fn empirical_cdf<T: Scalar>(dist: &EmpiricalDist<T>, x: T) -> T {
    let count = dist.sorted.partition_point(|&s| s <= x);
    T::from_usize(count).unwrap() / T::from_usize(dist.len()).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsReport<T> {
    pub statistic: T,
    pub n: usize,
    pub threshold_1pct: T,
    pub pass: bool,
}

impl<T: Scalar> KsReport<T> {
    fn new(statistic: T, n: usize) -> Self {
        let threshold_1pct = ks_threshold_1pct(n);
        Self {
            statistic,
            n,
            threshold_1pct,
            pass: statistic < threshold_1pct,
        }
    }
}

pub fn ks_threshold_1pct<T: Scalar>(n: usize) -> T {
    T::lit(KS_CRITICAL_1PCT) / T::from_usize(n).unwrap().sqrt()
}

/// One-sample KS test against `analytic_cdf`.
///
/// The statistic is `max_i max(i/n − F(x_i), F(x_i) − (i−1)/n)` over the
/// sorted samples. Errors if `F` decreases along the samples.
pub fn ks_test<T: Scalar>(dist: &EmpiricalDist<T>, analytic_cdf: impl Fn(T) -> T) -> Result<KsReport<T>> {
    let n = dist.len();
    let nf = T::from_usize(n).unwrap();
    let slack = T::lit(MONOTONE_SLACK);
    let mut d = T::zero();
    let mut prev = T::neg_infinity();
    for (i, &x) in dist.sorted.iter().enumerate() {
        let f = analytic_cdf(x);
        if f.is_nan() || f < prev - slack {
            return Err(Error::NonMonotoneCdf { at: x.as_f64() });
        }
        prev = prev.max(f);
        let below = T::from_usize(i).unwrap() / nf;
        let above = T::from_usize(i + 1).unwrap() / nf;
        d = d.max(above - f).max(f - below);
    }
    Ok(KsReport::new(d, n))
}

/// Unit Fréchet cdf `exp(−1/x)` for `x > 0`.
pub fn frechet_cdf<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        (-x.recip()).exp()
    }
}

/// KS test of `max / a_N` against the unit Fréchet law.
pub fn max_normalization_check<T: Scalar>(samples_of_max: &[T], a_n: T) -> Result<KsReport<T>> {
    if !(a_n.is_finite() && a_n > T::zero()) {
        return Err(Error::invalid("a_n", "must be finite and > 0"));
    }
    let dist = EmpiricalDist::new(samples_of_max.iter().map(|&x| x / a_n).collect())?;
    ks_test(&dist, frechet_cdf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn ecdf_step_function() {
        let d = EmpiricalDist::new(vec![3.0, 1.0, 2.0, 5.0, 4.0]).unwrap();
        assert_eq!(empirical_cdf(&d, 0.5), 0.0);
        assert_eq!(empirical_cdf(&d, 3.0), 3.0 / 5.0);
        assert_eq!(empirical_cdf(&d, 2.999), 2.0 / 5.0);
        assert_eq!(empirical_cdf(&d, 5.0), 1.0);
        assert_eq!(empirical_cdf(&d, 1e9), 1.0);
        assert!(EmpiricalDist::<f64>::new(vec![]).is_err());
        assert!(EmpiricalDist::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn ecdf_uniform_median() {
        let d = EmpiricalDist::new(uniform(1_000_000, 1)).unwrap();
        assert!((empirical_cdf(&d, 0.5) - 0.5).abs() < 0.002);
    }

    #[test]
    fn ks_accepts_null_rejects_mismatch() {
        let d = EmpiricalDist::new(uniform(10_000, 2)).unwrap();
        let r = ks_test(&d, |x: f64| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.threshold_1pct - 0.01628).abs() < 1e-12);

        let exp1 = d.map(|u| -(1.0 - u).ln()).unwrap();
        let r = ks_test(&exp1, |x: f64| 1.0 - (-x).exp()).unwrap();
        assert!(r.pass);
        let r = ks_test(&exp1, |x: f64| 1.0 - (-x / 2.0).exp()).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn ks_detects_non_monotone_cdf() {
        let d = EmpiricalDist::new(uniform(1000, 3)).unwrap();
        let err = ks_test(&d, |x: f64| if x < 0.5 { x } else { x - 0.3 }).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneCdf { .. }));
    }

    #[test]
    fn ks_invariant_under_monotone_transform() {
        let d = EmpiricalDist::new(uniform(5000, 4)).unwrap();
        let base = ks_test(&d, |x: f64| x.clamp(0.0, 1.0)).unwrap();
        let t = d.map(|u| u.powi(3) + 2.0).unwrap();
        let tr = ks_test(&t, |y: f64| (y - 2.0).cbrt().clamp(0.0, 1.0)).unwrap();
        assert!((base.statistic - tr.statistic).abs() < 1e-12);
    }

    #[test]
    fn ks_false_rejection_rate() {
        let mut rejections = 0;
        for rep in 0..100 {
            let d = EmpiricalDist::new(uniform(2000, 100 + rep)).unwrap();
            if !ks_test(&d, |x: f64| x.clamp(0.0, 1.0)).unwrap().pass {
                rejections += 1;
            }
        }
        assert!(rejections <= 2, "{rejections} rejections");
    }

    #[test]
    fn frechet_scale_check() {
        let draws: Vec<f64> = uniform(10_000, 5).into_iter().map(|u| -1.0 / u.ln()).collect();
        assert!(max_normalization_check(&draws, 1.0).unwrap().pass);
        assert!(!max_normalization_check(&draws, 10.0).unwrap().pass);
        assert!(max_normalization_check(&draws, 0.0).is_err());
    }
}
