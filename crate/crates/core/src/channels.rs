//! Fading-channel samplers for the secondary, interference and
//! primary-to-secondary links.
//!
//! Rician gains are normalized so that `E|h|² = γ̄`: LoS amplitude
//! `√(Kγ̄/(K+1))·e^{jφ}` plus a scattered part `√(γ̄/(K+1))·b`, `b ~ CN(0, 1)`.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::RicianSpec;
use crate::error::{Error, Result};
use crate::scalar::{two_pi, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingKind {
    Rayleigh,
    Rician,
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingSpec<T> {
    pub kind: FadingKind,
    pub k_factor: T,
    pub mean_power: T,
    /// LoS phase in radians; ignored for Rayleigh.
    pub los_phase: T,
}

impl<T: Scalar> FadingSpec<T> {
    pub fn rayleigh(mean_power: T) -> Result<Self> {
        Self {
            kind: FadingKind::Rayleigh,
            k_factor: T::zero(),
            mean_power,
            los_phase: T::zero(),
        }
        .validated()
    }

    pub fn rician(k_factor: T, mean_power: T, los_phase: T) -> Result<Self> {
        Self {
            kind: FadingKind::Rician,
            k_factor,
            mean_power,
            los_phase,
        }
        .validated()
    }

    pub fn deterministic(mean_power: T, los_phase: T) -> Result<Self> {
        Self {
            kind: FadingKind::Deterministic,
            k_factor: T::infinity(),
            mean_power,
            los_phase,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.mean_power.is_finite() && self.mean_power > T::zero()) {
            return Err(Error::invalid("mean_power", "must be finite and > 0"));
        }
        if !self.los_phase.is_finite() {
            return Err(Error::invalid("los_phase", "must be finite"));
        }
        match self.kind {
            FadingKind::Rayleigh if self.k_factor != T::zero() => {
                Err(Error::invalid("k_factor", "Rayleigh fading requires K = 0"))
            }
            FadingKind::Rician if !(self.k_factor.is_finite() && self.k_factor >= T::zero()) => {
                Err(Error::invalid("k_factor", "must be finite and >= 0"))
            }
            _ => Ok(self),
        }
    }

    /// The LoS term `√(Kγ̄/(K+1))·e^{jφ}`.
    pub fn los_component(&self) -> Complex<T> {
        let amp = match self.kind {
            FadingKind::Rayleigh => T::zero(),
            FadingKind::Rician => {
                (self.k_factor * self.mean_power / (self.k_factor + T::one())).sqrt()
            }
            FadingKind::Deterministic => self.mean_power.sqrt(),
        };
        Complex::from_polar(amp, self.los_phase)
    }

    /// Standard deviation scale of the scattered term, `√(γ̄/(K+1))`.
    pub fn scattered_scale(&self) -> T {
        match self.kind {
            FadingKind::Rayleigh => self.mean_power.sqrt(),
            FadingKind::Rician => (self.mean_power / (self.k_factor + T::one())).sqrt(),
            FadingKind::Deterministic => T::zero(),
        }
    }

    pub fn power_distribution(&self) -> Option<RicianSpec<T>> {
        match self.kind {
            FadingKind::Deterministic => None,
            _ => Some(RicianSpec {
                k_factor: self.k_factor,
                mean_power: self.mean_power,
            }),
        }
    }
}

/// Unit circularly-symmetric complex Gaussian, `CN(0, 1)`.
#[inline]
pub fn standard_complex_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = T::FRAC_1_SQRT_2();
    let re = T::standard_normal(rng);
    let im = T::standard_normal(rng);
    Complex::new(re * s, im * s)
}

/// `h ~ CN(0, γ̄)`.
pub fn sample_rayleigh<T: Scalar, R: Rng + ?Sized>(mean_power: T, rng: &mut R) -> Result<Complex<T>> {
    if !(mean_power.is_finite() && mean_power > T::zero()) {
        return Err(Error::invalid("mean_power", "must be finite and > 0"));
    }
    Ok(standard_complex_normal::<T, R>(rng) * mean_power.sqrt())
}

/// Rician gain `√(Kγ̄/(K+1))e^{jφ} + √(γ̄/(K+1))·b`.
pub fn sample_rician<T: Scalar, R: Rng + ?Sized>(spec: &FadingSpec<T>, rng: &mut R) -> Result<Complex<T>> {
    if spec.kind != FadingKind::Rician {
        return Err(Error::invalid("kind", "sample_rician needs a Rician spec"));
    }
    let spec = spec.validated()?;
    Ok(sample_unchecked(&spec, rng))
}

/// Draw from any [`FadingSpec`].
pub fn sample<T: Scalar, R: Rng + ?Sized>(spec: &FadingSpec<T>, rng: &mut R) -> Result<Complex<T>> {
    let spec = spec.validated()?;
    Ok(sample_unchecked(&spec, rng))
}

#[inline]
fn sample_unchecked<T: Scalar, R: Rng + ?Sized>(spec: &FadingSpec<T>, rng: &mut R) -> Complex<T> {
    match spec.kind {
        FadingKind::Deterministic => spec.los_component(),
        _ => spec.los_component() + standard_complex_normal::<T, R>(rng) * spec.scattered_scale(),
    }
}

/// All channels of one time slot, stored user-major (`N × M`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub n_users: usize,
    pub m_patterns: usize,
    /// `h^i_{s,n}`: basis pattern `i` of user `n` to the secondary base station.
    pub secondary: Vec<Complex<T>>,
    /// `h^i_{sp,n}`: basis pattern `i` of user `n` to the primary receiver.
    pub interference: Vec<Complex<T>>,
    /// `γ_ps = |h_ps|²`.
    pub primary_to_secondary_power: T,
}

impl<T: Scalar> ChannelRealization<T> {
    pub fn zeros(n_users: usize, m_patterns: usize) -> Self {
        let len = n_users * m_patterns;
        Self {
            n_users,
            m_patterns,
            secondary: vec![Complex::new(T::zero(), T::zero()); len],
            interference: vec![Complex::new(T::zero(), T::zero()); len],
            primary_to_secondary_power: T::zero(),
        }
    }

    pub fn secondary_of(&self, user: usize) -> &[Complex<T>] {
        &self.secondary[user * self.m_patterns..(user + 1) * self.m_patterns]
    }

    pub fn interference_of(&self, user: usize) -> &[Complex<T>] {
        &self.interference[user * self.m_patterns..(user + 1) * self.m_patterns]
    }
}

/// Everything needed to draw a slot: link statistics plus the LoS phases
/// `φ_{n,i}`, which are drawn once per experiment and held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel<T> {
    pub n_users: usize,
    pub m_patterns: usize,
    pub mean_secondary_power: T,
    pub interference: RicianSpec<T>,
    /// Mean of `γ_ps`; zero disables the primary-to-secondary link.
    pub mean_ps_power: T,
    /// User-major `N × M` LoS phases in `[0, 2π)`.
    pub los_phases: Vec<T>,
}

impl<T: Scalar> ChannelModel<T> {
    /// Builds the model, drawing LoS phases user by user from `phase_rng`.
    pub fn new<R: Rng + ?Sized>(
        n_users: usize,
        m_patterns: usize,
        mean_secondary_power: T,
        interference: RicianSpec<T>,
        mean_ps_power: T,
        phase_rng: &mut R,
    ) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::invalid("n_users", "must be >= 1"));
        }
        if m_patterns == 0 {
            return Err(Error::invalid("m_patterns", "must be >= 1"));
        }
        if !(mean_secondary_power.is_finite() && mean_secondary_power > T::zero()) {
            return Err(Error::invalid("mean_secondary_power", "must be finite and > 0"));
        }
        if !(mean_ps_power.is_finite() && mean_ps_power >= T::zero()) {
            return Err(Error::invalid("mean_ps_power", "must be finite and >= 0"));
        }
        let interference = RicianSpec::new(interference.k_factor, interference.mean_power)?;
        let los_phases = (0..n_users * m_patterns)
            .map(|_| T::unit_uniform(phase_rng) * two_pi::<T>())
            .collect();
        Ok(Self {
            n_users,
            m_patterns,
            mean_secondary_power,
            interference,
            mean_ps_power,
            los_phases,
        })
    }

    pub fn interference_spec(&self, user: usize, pattern: usize) -> FadingSpec<T> {
        FadingSpec {
            kind: FadingKind::Rician,
            k_factor: self.interference.k_factor,
            mean_power: self.interference.mean_power,
            los_phase: self.los_phases[user * self.m_patterns + pattern],
        }
    }

    pub fn draw_slot<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization<T> {
        let mut out = ChannelRealization::zeros(self.n_users, self.m_patterns);
        self.draw_slot_into(&mut out, rng);
        out
    }

    /// Redraws every gain of `out` in place.
    ///
    /// Draw order is `γ_ps` first, then user by user (secondary then
    /// interference per pattern), so a model with more users extends the
    /// draws of one with fewer users under the same stream.
    pub fn draw_slot_into<R: Rng + ?Sized>(&self, out: &mut ChannelRealization<T>, rng: &mut R) {
        if out.n_users != self.n_users || out.m_patterns != self.m_patterns {
            *out = ChannelRealization::zeros(self.n_users, self.m_patterns);
        }
        let h_ps = standard_complex_normal::<T, R>(rng);
        out.primary_to_secondary_power = h_ps.norm_sqr() * self.mean_ps_power;

        let s_scale = self.mean_secondary_power.sqrt();
        let kp1 = self.interference.k_factor + T::one();
        let los_amp = (self.interference.k_factor * self.interference.mean_power / kp1).sqrt();
        let scat_scale = (self.interference.mean_power / kp1).sqrt();
        for (idx, phase) in self.los_phases.iter().enumerate() {
            out.secondary[idx] = standard_complex_normal::<T, R>(rng) * s_scale;
            out.interference[idx] = Complex::from_polar(los_amp, *phase)
                + standard_complex_normal::<T, R>(rng) * scat_scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn rayleigh_moments() {
        let mut r = rng(1);
        let n = 1_000_000;
        let (mut p, mut re, mut im) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let h = sample_rayleigh(1.0_f64, &mut r).unwrap();
            p += h.norm_sqr();
            re += h.re;
            im += h.im;
        }
        let nf = n as f64;
        assert!((p / nf - 1.0).abs() < 0.005);
        assert!((re / nf).abs() < 0.005 && (im / nf).abs() < 0.005);
        assert!(sample_rayleigh(0.0_f64, &mut r).is_err());
    }

    #[test]
    fn rician_mean_and_power() {
        let mut r = rng(2);
        let spec = FadingSpec::rician(3.0_f64, 2.0, 0.7).unwrap();
        let n = 400_000;
        let mut mean = Complex::new(0.0, 0.0);
        let mut p = 0.0;
        for _ in 0..n {
            let h = sample_rician(&spec, &mut r).unwrap();
            mean += h;
            p += h.norm_sqr();
        }
        let nf = n as f64;
        let expect = Complex::from_polar((3.0_f64 * 2.0 / 4.0).sqrt(), 0.7);
        assert!((mean / nf - expect).norm() < 0.01);
        assert!((p / nf - 2.0).abs() < 0.02);
    }

    #[test]
    fn huge_k_is_pure_los() {
        let mut r = rng(3);
        let spec = FadingSpec::rician(1e9_f64, 1.0, 0.0).unwrap();
        for _ in 0..100 {
            let h = sample_rician(&spec, &mut r).unwrap();
            assert!((h - Complex::new(1.0, 0.0)).norm() < 1e-4);
        }
    }

    #[test]
    fn rician_sampler_rejects_other_kinds() {
        let mut r = rng(4);
        let spec = FadingSpec::rayleigh(1.0_f64).unwrap();
        assert!(sample_rician(&spec, &mut r).is_err());
        assert!(FadingSpec::rician(-1.0_f64, 1.0, 0.0).is_err());
        let bad = FadingSpec {
            kind: FadingKind::Rayleigh,
            k_factor: 1.0_f64,
            mean_power: 1.0,
            los_phase: 0.0,
        };
        assert!(bad.validated().is_err());
        let det = FadingSpec::deterministic(4.0_f64, 0.0).unwrap();
        assert_eq!(sample(&det, &mut r).unwrap(), Complex::new(2.0, 0.0));
    }

    #[test]
    fn degenerate_slot_dimensions() {
        let mut r = rng(5);
        let model = ChannelModel::new(1, 1, 1.0_f64, RicianSpec::new(2.0, 1.0).unwrap(), 1.0, &mut r).unwrap();
        let slot = model.draw_slot(&mut r);
        assert_eq!(slot.secondary.len(), 1);
        assert_eq!(slot.interference.len(), 1);
        assert!(slot.primary_to_secondary_power >= 0.0);
        assert!(ChannelModel::new(0, 1, 1.0_f64, RicianSpec::new(2.0, 1.0).unwrap(), 1.0, &mut r).is_err());
    }

    #[test]
    fn slot_draws_are_deterministic() {
        let make = || {
            let mut r = rng(6);
            let model =
                ChannelModel::new(4, 3, 1.0_f64, RicianSpec::new(2.0, 1.0).unwrap(), 1.0, &mut r).unwrap();
            model.draw_slot(&mut r)
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn more_users_extend_fewer_users() {
        let spec = RicianSpec::new(2.0, 1.0).unwrap();
        let small = ChannelModel::new(3, 2, 1.0_f64, spec, 1.0, &mut rng(7)).unwrap();
        let large = ChannelModel::new(8, 2, 1.0_f64, spec, 1.0, &mut rng(7)).unwrap();
        let a = small.draw_slot(&mut rng(8));
        let b = large.draw_slot(&mut rng(8));
        assert_eq!(a.secondary[..], b.secondary[..6]);
        assert_eq!(a.interference[..], b.interference[..6]);
    }

    #[test]
    fn f32_sampling() {
        let mut r = rng(9);
        let h = sample_rayleigh(1.0_f32, &mut r).unwrap();
        assert!(h.re.is_finite());
    }
}
