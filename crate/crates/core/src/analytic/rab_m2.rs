//! Distributions for random aerial beamforming with two basis patterns.
//!
//! With two patterns the equivalent interference channel is Rician with a
//! LoS power that is itself random, `ã = a·(1 + cos ψ)` where `a = K/(K+1)`
//! and `ψ` is uniform. Scattered power stays `v = 1/(K+1)`.

use super::{bessel_i0e, check_k_factor, check_users, check_z, RatioDistParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Density of the random LoS power `ã` on `[0, 2Kγ̄/(K+1)]`:
/// `(K+1)/(πK·√(1 − (1 − ã(K+1)/K)²))` in units of `γ̄`.
///
/// Zero outside the support and infinite at its two endpoints.
pub fn rab_m2_a_tilde_pdf<T: Scalar>(a_tilde: T, k_factor: T, mean_power: T) -> T {
    let a = k_factor / (k_factor + T::one());
    let x = a_tilde / mean_power;
    if !(x >= T::zero() && x <= T::lit(2.0) * a) {
        return T::zero();
    }
    let y = T::one() - x / a;
    let s = T::one() - y * y;
    if s <= T::zero() {
        return T::infinity();
    }
    T::one() / (T::PI() * a * s.sqrt() * mean_power)
}

/// Distribution function of `ã`: `1/2 + asin(ã/(aγ̄) − 1)/π`.
pub fn rab_m2_a_tilde_cdf<T: Scalar>(a_tilde: T, k_factor: T, mean_power: T) -> T {
    let a = k_factor / (k_factor + T::one());
    let x = a_tilde / mean_power;
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::lit(2.0) * a {
        return T::one();
    }
    T::lit(0.5) + (x / a - T::one()).asin() / T::PI()
}

/// `1 − F(z) = 1/(ρzv + 1) · e^{−pa}·I₀(pa)` with `p = ρz/(ρzv + 1)`.
pub fn rab_m2_sf<T: Scalar>(z: T, p: &RatioDistParams<T>) -> Result<T> {
    check_z("rab_m2_sf", z)?;
    if z.is_infinite() {
        return Ok(T::zero());
    }
    let kp1 = p.k_factor + T::one();
    let v = T::one() / kp1;
    let a = p.k_factor / kp1;
    let rz = p.power_ratio * z;
    let denom = rz * v + T::one();
    let pa = rz / denom * a;
    Ok(bessel_i0e(pa)? / denom)
}

/// Closed-form cdf of the equivalent ratio `z_eq` under two-pattern RAB:
/// `1 − (1/v)/(zρ + 1/v) · exp(−pK/(K+1)) · I₀(pK/(K+1))`,
/// `v = 1/(K+1)`, `p = 1/v − 1/(ρzv² + v)`.
pub fn rab_m2_cdf<T: Scalar>(z: T, p: &RatioDistParams<T>) -> Result<T> {
    check_z("rab_m2_cdf", z)?;
    Ok(T::one() - rab_m2_sf(z, p)?)
}

/// Large-`z` tail form `1 − (1/v)/(zρ + 1/v) · 1/√(2πK)`.
pub fn rab_m2_tail_cdf<T: Scalar>(z: T, p: &RatioDistParams<T>) -> Result<T> {
    check_z("rab_m2_tail_cdf", z)?;
    if p.k_factor <= T::zero() {
        return Err(Error::domain("rab_m2_tail_cdf", 0.0, "K must be > 0"));
    }
    let v = T::one() / (p.k_factor + T::one());
    let scale = T::one() / (T::TAU() * p.k_factor).sqrt();
    Ok(T::one() - scale / (p.power_ratio * z * v + T::one()))
}

/// Approximate normalizer `√((K+1)²/(2πK)) · N/ρ` obtained from the tail form.
pub fn rab_m2_normalizer<T: Scalar>(n_users: u64, p: &RatioDistParams<T>) -> Result<T> {
    check_users("rab_m2_normalizer", n_users, 2)?;
    check_k_factor(p.k_factor)?;
    let factor = super::effective_users_rab_m2(1, p.k_factor)?;
    Ok(factor * T::from_u64(n_users).unwrap() / p.power_ratio)
}
