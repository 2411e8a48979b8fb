//! Closed-form distributions and capacity scaling laws.
//!
//! Notation used throughout: `z = γ_s / γ_sp` is the ratio of a user's
//! secondary channel power (exponential, mean `γ̄_s`) to its interference
//! channel power (Rician, K-factor `K`, mean `γ̄_sp`), and `ρ = γ̄_sp / γ̄_s`.
//! All logarithms are natural.

mod rab_m2;
mod special;

pub use rab_m2::{
    rab_m2_a_tilde_cdf, rab_m2_a_tilde_pdf, rab_m2_cdf, rab_m2_normalizer, rab_m2_sf,
    rab_m2_tail_cdf,
};
pub use special::{bessel_i0, bessel_i0e, lambert_w0};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A Rician power distribution: LoS power `K·γ̄/(K+1)` plus scattered power `γ̄/(K+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianSpec<T> {
    pub k_factor: T,
    pub mean_power: T,
}

impl<T: Scalar> RicianSpec<T> {
    pub fn new(k_factor: T, mean_power: T) -> Result<Self> {
        check_k_factor(k_factor)?;
        check_positive("mean_power", mean_power)?;
        Ok(Self {
            k_factor,
            mean_power,
        })
    }

    pub fn los_power(&self) -> T {
        self.k_factor * self.mean_power / (self.k_factor + T::one())
    }

    pub fn scattered_power(&self) -> T {
        self.mean_power / (self.k_factor + T::one())
    }

    /// Density of the instantaneous power `|h|²`:
    /// `(1+K)/γ̄ · e^{−K − (1+K)x/γ̄} · I₀(2√(K(1+K)x/γ̄))`.
    pub fn power_pdf(&self, x: T) -> Result<T> {
        if x < T::zero() {
            return Ok(T::zero());
        }
        let k = self.k_factor;
        let kp1 = k + T::one();
        let t = kp1 * x / self.mean_power;
        let arg = T::lit(2.0) * (k * t).sqrt();
        // Fold e^{-K - t} into the scaled Bessel value so large K does not overflow.
        let log_scale = arg - k - t;
        Ok(kp1 / self.mean_power * bessel_i0e(arg)? * log_scale.exp())
    }

    /// Cumulative distribution of `|h|²` as a Poisson mixture of Gamma laws
    /// (the noncentral χ² with two degrees of freedom).
    ///
    /// Supported for `K ≤ 500`; beyond that `e^{−K}` underflows.
    pub fn power_cdf(&self, x: T) -> Result<T> {
        if x <= T::zero() {
            return Ok(T::zero());
        }
        let k = self.k_factor;
        if k > T::lit(500.0) {
            return Err(Error::invalid("k_factor", "power_cdf supports K <= 500"));
        }
        let t = (k + T::one()) * x / self.mean_power;
        // j-th terms: Poisson(K) weight and the regularized lower gamma P(j+1, t).
        let mut weight = (-k).exp();
        let mut gamma_term = (-t).exp();
        let mut lower_gamma = -(-t).exp_m1();
        let mut cum_weight = weight;
        let mut total = weight * lower_gamma;
        let mut j = 0usize;
        loop {
            j += 1;
            let jf = T::from_usize(j).unwrap();
            weight = weight * k / jf;
            gamma_term = gamma_term * t / jf;
            lower_gamma = (lower_gamma - gamma_term).max(T::zero());
            cum_weight = cum_weight + weight;
            total = total + weight * lower_gamma;
            let tail = T::one() - cum_weight;
            if (jf > k && tail <= T::epsilon()) || j > 100_000 {
                break;
            }
        }
        Ok(total.min(T::one()))
    }
}

/// Parameters of the ratio `z = γ_s/γ_sp` between an exponential secondary
/// power and a Rician interference power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioDistParams<T> {
    pub k_factor: T,
    /// `ρ = γ̄_sp / γ̄_s`.
    pub power_ratio: T,
}

impl<T: Scalar> RatioDistParams<T> {
    pub fn new(k_factor: T, power_ratio: T) -> Result<Self> {
        check_k_factor(k_factor)?;
        check_positive("power_ratio", power_ratio)?;
        Ok(Self {
            k_factor,
            power_ratio,
        })
    }

    pub fn from_powers(k_factor: T, mean_secondary: T, mean_interference: T) -> Result<Self> {
        check_positive("mean_secondary_power", mean_secondary)?;
        check_positive("mean_interference_power", mean_interference)?;
        Self::new(k_factor, mean_interference / mean_secondary)
    }
}

/// A scaling law evaluated at one `(N, K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingLawEval<T> {
    pub n_users: u64,
    pub k_factor: T,
    /// Law value in nats.
    pub value: T,
    /// `N'` such that `log N'` equals `value`: the Rayleigh-interference user
    /// count with the same growth.
    pub effective_users: T,
}

impl<T: Scalar> ScalingLawEval<T> {
    /// Growth law of the single-antenna system, `log((K²+K)/W(Ke^K/N))`.
    pub fn los_interference(n_users: u64, k_factor: T) -> Result<Self> {
        let value = theorem1_law(n_users, k_factor)?;
        Ok(Self {
            n_users,
            k_factor,
            value,
            effective_users: value.exp(),
        })
    }

    /// Growth law with two-pattern random aerial beamforming.
    pub fn rab_two_patterns(n_users: u64, k_factor: T) -> Result<Self> {
        let effective_users = effective_users_rab_m2(n_users, k_factor)?;
        Ok(Self {
            n_users,
            k_factor,
            value: effective_users.ln(),
            effective_users,
        })
    }
}

fn check_k_factor<T: Scalar>(k: T) -> Result<()> {
    if !k.is_finite() || k < T::zero() {
        return Err(Error::invalid(
            "k_factor",
            format!("must be finite and >= 0, got {k}"),
        ));
    }
    Ok(())
}

fn check_positive<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::invalid(name, format!("must be finite and > 0, got {x}")));
    }
    Ok(())
}

fn check_z<T: Scalar>(function: &'static str, z: T) -> Result<()> {
    if z.is_nan() || z < T::zero() {
        return Err(Error::domain(function, z.as_f64(), "z must be >= 0"));
    }
    Ok(())
}

fn check_users(function: &'static str, n_users: u64, min: u64) -> Result<()> {
    if n_users < min {
        return Err(Error::domain(function, n_users as f64, "too few users"));
    }
    Ok(())
}

/// `1 − F(z)` for the ratio distribution; accurate deep into the tail.
pub fn ratio_sf<T: Scalar>(z: T, p: &RatioDistParams<T>) -> Result<T> {
    check_z("ratio_sf", z)?;
    if z.is_infinite() {
        return Ok(T::zero());
    }
    let k = p.k_factor;
    let kp1 = k + T::one();
    let rz = p.power_ratio * z;
    let u = kp1 + rz;
    // −K + K(1+K)/u rewritten as −Kρz/u.
    Ok(kp1 / u * (-k * rz / u).exp())
}

/// `F(z) = 1 − (1+K)/(ρz+K+1) · exp(−K + K(1+K)/(ρz+K+1))`.
pub fn ratio_cdf<T: Scalar>(z: T, p: &RatioDistParams<T>) -> Result<T> {
    check_z("ratio_cdf", z)?;
    Ok(T::one() - ratio_sf(z, p)?)
}

/// `f(z) = (1+K)ρ · e^{−K + K(1+K)/u} · ((1+K)² + ρz)/u³`, `u = 1+K+ρz`.
pub fn ratio_pdf<T: Scalar>(z: T, p: &RatioDistParams<T>) -> Result<T> {
    check_z("ratio_pdf", z)?;
    if z.is_infinite() {
        return Ok(T::zero());
    }
    let k = p.k_factor;
    let kp1 = k + T::one();
    let rz = p.power_ratio * z;
    let u = kp1 + rz;
    Ok(kp1 * p.power_ratio * (-k * rz / u).exp() * (kp1 * kp1 + rz) / (u * u * u))
}

/// `W₀(K·e^K/N)` without forming `e^K` when it would overflow.
fn lambert_of_k_exp_k_over_n<T: Scalar>(k: T, n: T) -> Result<T> {
    let x = k * k.exp() / n;
    if x.is_finite() {
        return lambert_w0(x);
    }
    // Solve w + ln w = ln x by Newton for astronomically large x.
    let l = k.ln() + k - n.ln();
    let mut w = l - l.ln();
    for _ in 0..64 {
        let step = (w + w.ln() - l) / (T::one() + T::one() / w);
        w = w - step;
        if step.abs() <= T::epsilon() * w {
            break;
        }
    }
    Ok(w)
}

/// The extreme-value normalizer `a_N` solving `F(a_N) = 1 − 1/N`:
/// `a_N = K(K+1)/(ρ·W(Ke^K/N)) − (K+1)/ρ`, and `(N−1)/ρ` for Rayleigh interference.
pub fn normalizer_a_n<T: Scalar>(n_users: u64, p: &RatioDistParams<T>) -> Result<T> {
    normalizer_a_n_with(n_users, p, |w| w)
}

/// [`normalizer_a_n`] with `adjust` applied to the Lambert W value before use.
/// Exists so that validation can check its own sensitivity to a corrupted W.
pub fn normalizer_a_n_with<T: Scalar>(
    n_users: u64,
    p: &RatioDistParams<T>,
    adjust: impl Fn(T) -> T,
) -> Result<T> {
    check_users("normalizer_a_n", n_users, 2)?;
    let n = T::from_u64(n_users).unwrap();
    let k = p.k_factor;
    let kp1 = k + T::one();
    if k == T::zero() {
        return Ok((n - T::one()) / p.power_ratio);
    }
    let w = adjust(lambert_of_k_exp_k_over_n(k, n)?);
    Ok((k * kp1 / w - kp1) / p.power_ratio)
}

/// `log((K²+K)/W(Ke^K/N))`, the capacity growth with Rician interference.
/// `K = 0` returns the Rayleigh limit `log N`.
pub fn theorem1_law<T: Scalar>(n_users: u64, k_factor: T) -> Result<T> {
    check_users("theorem1_law", n_users, 2)?;
    check_k_factor(k_factor)?;
    let n = T::from_u64(n_users).unwrap();
    if k_factor == T::zero() {
        return Ok(n.ln());
    }
    let w = lambert_of_k_exp_k_over_n(k_factor, n)?;
    Ok((k_factor * (k_factor + T::one()) / w).ln())
}

/// Moderate-K effective user count `N(K+1)/e^K`.
pub fn effective_users_moderate_k<T: Scalar>(n_users: u64, k_factor: T) -> Result<T> {
    check_k_factor(k_factor)?;
    let n = T::from_u64(n_users).unwrap();
    Ok(n * (k_factor + T::one()) * (-k_factor).exp())
}

/// Two-pattern beamforming effective user count `√((K+1)²/(2πK))·N`.
pub fn effective_users_rab_m2<T: Scalar>(n_users: u64, k_factor: T) -> Result<T> {
    check_k_factor(k_factor)?;
    if k_factor == T::zero() {
        return Err(Error::domain(
            "effective_users_rab_m2",
            0.0,
            "K must be > 0 (formula is singular at K = 0)",
        ));
    }
    let n = T::from_u64(n_users).unwrap();
    Ok((k_factor + T::one()) / (T::TAU() * k_factor).sqrt() * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: f64, rho: f64) -> RatioDistParams<f64> {
        RatioDistParams::new(k, rho).unwrap()
    }

    fn bisect_quantile(target: f64, p: &RatioDistParams<f64>) -> f64 {
        let (mut lo, mut hi) = (0.0, 1e12);
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if ratio_cdf(mid, p).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn ratio_cdf_trivial_points() {
        for (k, rho) in [(0.0, 1.0), (2.0, 0.5), (10.0, 4.0)] {
            assert_eq!(ratio_cdf(0.0, &params(k, rho)).unwrap(), 0.0);
        }
        assert!((ratio_cdf(1.0, &params(0.0, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(ratio_cdf(-1.0, &params(0.0, 1.0)).is_err());
        assert!(ratio_pdf(-1.0, &params(0.0, 1.0)).is_err());
    }

    #[test]
    fn ratio_pdf_trivial_points() {
        assert!((ratio_pdf(0.0, &params(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((ratio_pdf(0.0, &params(0.0, 2.5)).unwrap() - 2.5).abs() < 1e-15);
        assert!(ratio_pdf(1e12, &params(2.0, 1.0)).unwrap() < 1e-23);
        assert_eq!(ratio_pdf(f64::INFINITY, &params(2.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn normalizer_examples() {
        assert!((normalizer_a_n(100, &params(0.0, 1.0)).unwrap() - 99.0).abs() < 1e-12);
        assert!((normalizer_a_n(2, &params(0.0, 2.0)).unwrap() - 0.5).abs() < 1e-15);
        let a = normalizer_a_n(500, &params(2.0, 1.0)).unwrap();
        let oracle = bisect_quantile(1.0 - 1.0 / 500.0, &params(2.0, 1.0));
        assert!((oracle - 205.91).abs() < 0.01);
        assert!((a - oracle).abs() < 1e-6 * oracle);
        assert!(normalizer_a_n(1, &params(0.0, 1.0)).is_err());
    }

    #[test]
    fn quantile_identity_grid() {
        for n in [2u64, 10, 100, 10_000] {
            for k in [0.0, 0.5, 2.0, 10.0] {
                for rho in [0.5, 1.0, 4.0] {
                    let p = params(k, rho);
                    let a = normalizer_a_n(n, &p).unwrap();
                    let f = ratio_cdf(a, &p).unwrap();
                    assert!((f - (1.0 - 1.0 / n as f64)).abs() <= 1e-9, "n={n} k={k} rho={rho}");
                }
            }
        }
    }

    #[test]
    fn normalizer_survives_huge_k() {
        let p = params(2000.0, 1.0);
        let a = normalizer_a_n(1000, &p).unwrap();
        assert!(a.is_finite() && a > 0.0);
        let sf = ratio_sf(a, &p).unwrap();
        assert!((sf * 1000.0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn scaling_law_examples() {
        assert!((theorem1_law(1000, 1e-9).unwrap() - 1000f64.ln()).abs() < 1e-3);
        assert_eq!(theorem1_law(1000, 0.0).unwrap(), 1000f64.ln());
        let v = theorem1_law(500, 2.0_f64).unwrap();
        assert!((v.exp() - 208.9).abs() < 0.05, "{}", v.exp());
        // moderate-K approximation log(N(K+1)/e^K)
        let approx = (500.0 * 3.0 / 2f64.exp()).ln();
        assert!((v - approx).abs() / approx < 0.03);
        assert!(theorem1_law(1, 1.0).is_err());
        assert!(theorem1_law(10, -1.0).is_err());
    }

    #[test]
    fn scaling_law_small_k_limit() {
        let n = 5000u64;
        let v = theorem1_law(n, 1e-6).unwrap();
        assert!((v - (n as f64).ln()).abs() / (n as f64).ln() <= 1e-3);
    }

    #[test]
    fn scaling_law_growth_per_decade_below_log_rate() {
        // With LoS interference each decade of users adds less than ln 10;
        // the deficit closes once N outgrows K·e^K.
        let vals: Vec<f64> = [100u64, 1000, 10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| theorem1_law(n, 5.0).unwrap())
            .collect();
        let incs: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(10f64.ln() - incs[3] < 0.01);
        assert!(incs.iter().all(|&d| d > 0.0 && d < 10f64.ln()));
        assert!(incs.windows(2).all(|w| w[1] > w[0]));
        assert!((vals[0] - 2.956674886815244).abs() < 1e-9);
    }

    #[test]
    fn effective_user_examples() {
        let e = effective_users_moderate_k(500, 2.0).unwrap();
        assert!((e / 500.0 - 3.0 / 2f64.exp()).abs() < 1e-15);
        assert!((e - 200.0).abs() < 5.0);
        assert_eq!(effective_users_moderate_k(500, 0.0).unwrap(), 500.0);
        assert!((effective_users_moderate_k(100, 3.0_f64).unwrap() - 19.9148).abs() < 1e-3);

        assert!((effective_users_rab_m2(200, 10.0_f64).unwrap() - 277.5).abs() < 0.1);
        assert!((effective_users_rab_m2(200, 100.0_f64).unwrap() - 805.9).abs() < 0.1);
        assert!((effective_users_rab_m2(1, 10.0_f64).unwrap() - 1.387722887).abs() < 1e-8);
        assert!(effective_users_rab_m2(10, 0.0).is_err());
    }

    #[test]
    fn effective_users_rab_m2_increasing_from_one() {
        let mut prev = 0.0;
        for i in 0..200 {
            let k = 1.0 + i as f64 * 0.5;
            let e = effective_users_rab_m2(100, k).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn hazard_ratio_tends_to_tail_index() {
        for (k, rho) in [(0.0, 1.0), (2.0, 0.5), (10.0, 4.0)] {
            let p = params(k, rho);
            let z = 1e6 / rho;
            let h = z * ratio_pdf(z, &p).unwrap() / ratio_sf(z, &p).unwrap();
            assert!((h - 1.0).abs() < 1e-3, "k={k} rho={rho} h={h}");
        }
    }

    #[test]
    fn rician_power_split() {
        let r = RicianSpec::new(3.0_f64, 2.0).unwrap();
        assert!((r.los_power() + r.scattered_power() - 2.0).abs() < 1e-15);
        assert!(RicianSpec::new(-1.0, 1.0).is_err());
        assert!(RicianSpec::new(1.0, 0.0).is_err());
        assert!(RicianSpec::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn rician_power_cdf_differentiates_to_pdf() {
        for k in [0.0, 0.5, 2.0, 10.0] {
            let r = RicianSpec::new(k, 1.5).unwrap();
            let h = 1e-5;
            for i in 1..60 {
                let x = i as f64 * 0.1;
                let fd = (r.power_cdf(x + h).unwrap() - r.power_cdf(x - h).unwrap()) / (2.0 * h);
                let pdf = r.power_pdf(x).unwrap();
                assert!((fd - pdf).abs() < 1e-6, "k={k} x={x} fd={fd} pdf={pdf}");
            }
            assert!(r.power_cdf(200.0).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn rayleigh_power_cdf_is_exponential() {
        let r = RicianSpec::new(0.0, 2.0).unwrap();
        for x in [0.1, 1.0, 5.0] {
            assert!((r.power_cdf(x).unwrap() - (1.0 - (-x / 2.0_f64).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn f32_instantiation() {
        let p = RatioDistParams::<f32>::new(2.0, 1.0).unwrap();
        let a = normalizer_a_n(500, &p).unwrap();
        assert!((a - 205.9176).abs() < 1e-2);
    }
}
