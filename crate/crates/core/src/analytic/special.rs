//! Lambert W (principal branch) and the modified Bessel function `I₀`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_HALLEY_STEPS: usize = 64;
const MAX_SERIES_TERMS: usize = 500;

/// Above this argument `I₀` switches from the power series to the
/// Hankel asymptotic expansion.
const BESSEL_SERIES_LIMIT: f64 = 15.0;

/// Principal branch `W₀(x)` of the Lambert W function, the solution of
/// `w·eʷ = x` with `w ≥ −1`.
///
/// Halley iteration from a region-dependent starting point: the branch-point
/// series near `−1/e`, Winitzki's approximation in the middle range and the
/// `ln x − ln ln x` expansion for large arguments.
pub fn lambert_w0<T: Scalar>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain("lambert_w0", x.as_f64(), "non-finite"));
    }
    let inv_e = T::one() / T::E();
    let branch_gap = x + inv_e;
    if branch_gap < T::zero() {
        // Tolerate rounding in callers that compute −1/e themselves.
        if branch_gap > -T::epsilon() * T::lit(4.0) {
            return Ok(-T::one());
        }
        return Err(Error::domain("lambert_w0", x.as_f64(), "x < -1/e"));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }

    let mut w = initial_guess(x, branch_gap);
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == T::zero() {
            break;
        }
        let wp1 = w + T::one();
        if wp1 == T::zero() {
            break;
        }
        let denom = ew * wp1 - (w + T::lit(2.0)) * f / (T::lit(2.0) * wp1);
        let step = f / denom;
        w = w - step;
        if step.abs() <= tol * (T::one() + w.abs()) {
            break;
        }
    }
    Ok(w.max(-T::one()))
}

fn initial_guess<T: Scalar>(x: T, branch_gap: T) -> T {
    if x < T::lit(-0.25) {
        // Series in p = sqrt(2(e·x + 1)) around the branch point.
        let p = (T::lit(2.0) * T::E() * branch_gap).sqrt();
        -T::one() + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p
    } else if x.abs() < T::lit(1e-3) {
        x * (T::one() - x)
    } else if x < T::lit(3.0) {
        let l = x.ln_1p();
        l * (T::one() - (T::one() + l).ln() / (T::lit(2.0) + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0<T: Scalar>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain("bessel_i0", x.as_f64(), "non-finite"));
    }
    let ax = x.abs();
    if ax <= T::lit(BESSEL_SERIES_LIMIT) {
        Ok(i0_series(ax))
    } else {
        Ok(ax.exp() * i0_asymptotic_scaled(ax))
    }
}

/// Exponentially scaled `e^{−|x|}·I₀(x)`, finite for all finite `x`.
///
/// The Rician and random-beamforming cdfs only ever need this product, and
/// for large K-factors `I₀` alone overflows long before the product does.
pub fn bessel_i0e<T: Scalar>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain("bessel_i0e", x.as_f64(), "non-finite"));
    }
    let ax = x.abs();
    if ax <= T::lit(BESSEL_SERIES_LIMIT) {
        Ok(i0_series(ax) * (-ax).exp())
    } else {
        Ok(i0_asymptotic_scaled(ax))
    }
}

/// `Σ (x/2)^{2m} / (m!)²`; all terms positive so no cancellation.
fn i0_series<T: Scalar>(ax: T) -> T {
    let q = ax * ax / T::lit(4.0);
    let mut term = T::one();
    let mut sum = T::one();
    for m in 1..MAX_SERIES_TERMS {
        let mf = T::from_usize(m).unwrap();
        term = term * q / (mf * mf);
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    sum
}

/// `e^{−x}·I₀(x) ≈ (2πx)^{−1/2} Σ ((2k−1)!!)² / (k!·(8x)^k)`, truncated at
/// the smallest term.
fn i0_asymptotic_scaled<T: Scalar>(ax: T) -> T {
    let eight_x = T::lit(8.0) * ax;
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..MAX_SERIES_TERMS {
        let kf = T::from_usize(k).unwrap();
        let odd = T::lit(2.0) * kf - T::one();
        let next = term * odd * odd / (kf * eight_x);
        if next >= term {
            break;
        }
        term = next;
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    sum / (T::TAU() * ax).sqrt()
}
