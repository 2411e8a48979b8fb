//! Random aerial beamforming: per-slot random phases on `M` basis patterns
//! with equal magnitudes `1/√M`.

use num_complex::Complex;
use rand::Rng;

use crate::channels::{FadingKind, FadingSpec};
use crate::error::{Error, Result};
use crate::scalar::{two_pi, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct RabWeights<T> {
    /// `√α_i`, all equal to `1/√M`.
    pub magnitudes: Vec<T>,
    /// `θ_i` in `[0, 2π)`.
    pub phases: Vec<T>,
}

impl<T: Scalar> RabWeights<T> {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// The complex weights `√α_i·e^{jθ_i}`.
    pub fn phasors(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.magnitudes
            .iter()
            .zip(&self.phases)
            .map(|(&m, &p)| Complex::from_polar(m, p))
    }

    /// Redraws the phases in place, keeping `M`.
    pub fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for p in &mut self.phases {
            *p = T::unit_uniform(rng) * two_pi::<T>();
        }
    }
}

pub fn draw_weights<T: Scalar, R: Rng + ?Sized>(m_patterns: usize, rng: &mut R) -> Result<RabWeights<T>> {
    if m_patterns == 0 {
        return Err(Error::invalid("m_patterns", "must be >= 1"));
    }
    let mag = T::one() / T::from_usize(m_patterns).unwrap().sqrt();
    let mut w = RabWeights {
        magnitudes: vec![mag; m_patterns],
        phases: vec![T::zero(); m_patterns],
    };
    w.redraw(rng);
    Ok(w)
}

/// `Σ_i √α_i e^{jθ_i} h_i`, the channel seen through the weighted patterns.
pub fn combine<T: Scalar>(weights: &RabWeights<T>, gains: &[Complex<T>]) -> Result<Complex<T>> {
    if gains.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            what: "per-pattern gains",
            expected: weights.len(),
            found: gains.len(),
        });
    }
    Ok(weights
        .phasors()
        .zip(gains)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (w, h)| acc + w * h))
}

/// Equivalent secondary channel `h^eq_s = Σ (1/√M) e^{jθ_i} h^i_s`.
pub fn equivalent_secondary<T: Scalar>(weights: &RabWeights<T>, per_pattern_gains: &[Complex<T>]) -> Result<Complex<T>> {
    combine(weights, per_pattern_gains)
}

/// Decomposition of the weighted interference channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceParts<T> {
    /// `artificial_los + √(1/(K+1))·scattered_eq`.
    pub interference_eq: Complex<T>,
    /// `√(Kγ̄_sp/(M(K+1)))·Σ e^{j(θ_i+φ_i)}`.
    pub artificial_los: Complex<T>,
    /// `c = √γ̄_sp·Σ (1/√M) e^{jθ_i} b_i ~ CN(0, γ̄_sp)`.
    pub scattered_eq: Complex<T>,
}

/// Both equivalent channels of one user in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentChannels<T> {
    pub secondary_eq: Complex<T>,
    pub interference_eq: Complex<T>,
    pub artificial_los: Complex<T>,
    pub scattered_eq: Complex<T>,
}

/// Splits the weighted interference channel into its artificial-fading and
/// scattered parts. `scattered` holds the unit-variance `b_i ~ CN(0, 1)`
/// of each pattern; `spec` supplies `K` and `γ̄_sp`.
pub fn equivalent_interference<T: Scalar>(
    weights: &RabWeights<T>,
    spec: &FadingSpec<T>,
    los_phases: &[T],
    scattered: &[Complex<T>],
) -> Result<InterferenceParts<T>> {
    if spec.kind != FadingKind::Rician {
        return Err(Error::invalid("kind", "equivalent interference needs a Rician spec"));
    }
    let spec = spec.validated()?;
    let m = weights.len();
    for (what, len) in [("LoS phases", los_phases.len()), ("scattered gains", scattered.len())] {
        if len != m {
            return Err(Error::DimensionMismatch {
                what,
                expected: m,
                found: len,
            });
        }
    }
    let kp1 = spec.k_factor + T::one();
    let los_amp = (spec.k_factor * spec.mean_power / kp1).sqrt();
    let artificial_los = weights
        .phasors()
        .zip(los_phases)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (w, &phi)| {
            acc + w * Complex::from_polar(los_amp, phi)
        });
    let scattered_eq = combine(weights, scattered)? * spec.mean_power.sqrt();
    let interference_eq = artificial_los + scattered_eq * (T::one() / kp1).sqrt();
    Ok(InterferenceParts {
        interference_eq,
        artificial_los,
        scattered_eq,
    })
}

/// Equivalent secondary and interference channels under one weight draw.
pub fn equivalent_channels<T: Scalar>(
    weights: &RabWeights<T>,
    secondary_gains: &[Complex<T>],
    spec: &FadingSpec<T>,
    los_phases: &[T],
    scattered: &[Complex<T>],
) -> Result<EquivalentChannels<T>> {
    let parts = equivalent_interference(weights, spec, los_phases, scattered)?;
    Ok(EquivalentChannels {
        secondary_eq: equivalent_secondary(weights, secondary_gains)?,
        interference_eq: parts.interference_eq,
        artificial_los: parts.artificial_los,
        scattered_eq: parts.scattered_eq,
    })
}

/// Peak-interference power control `P_s = Q_p / |h_eq|²`.
///
/// Returns `+∞` for an exactly null channel; the caller flags that slot.
pub fn transmit_power<T: Scalar>(q_p: T, interference_eq: Complex<T>) -> Result<T> {
    if !(q_p.is_finite() && q_p > T::zero()) {
        return Err(Error::invalid("peak_interference", "must be finite and > 0"));
    }
    let g = interference_eq.norm_sqr();
    if g == T::zero() {
        return Ok(T::infinity());
    }
    Ok(q_p / g)
}

/// Arcsine density `1/(π√(1−y²))` of `cos` of a uniform phase.
pub fn arcsine_pdf<T: Scalar>(y: T) -> T {
    if !(y > -T::one() && y < T::one()) {
        return T::zero();
    }
    T::one() / (T::PI() * (T::one() - y * y).sqrt())
}

pub fn arcsine_cdf<T: Scalar>(y: T) -> T {
    if y <= -T::one() {
        T::zero()
    } else if y >= T::one() {
        T::one()
    } else {
        T::lit(0.5) + y.asin() / T::PI()
    }
}
