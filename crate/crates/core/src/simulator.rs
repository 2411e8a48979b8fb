//! Max-SINR (D-TDMA) scheduling and Monte-Carlo ergodic capacity.
//!
//! Each slot the base station grants the channel to the user with the largest
//! SINR `γ_s,n·(Q_p/γ_sp,n)/(1 + γ̄_p·γ_ps)`; the selected user inverts its
//! interference channel so the peak interference constraint `Q_p` binds.
//! In RAB mode every user draws fresh random pattern phases each slot and the
//! per-pattern channels are replaced by their weighted combinations.
//!
//! Randomness is counter based: trial `t` draws channels from ChaCha stream
//! `2t` and beamforming weights from stream `2t + 1` of the master seed, and
//! LoS phases come from a dedicated stream. Results are therefore identical
//! for any number of worker threads, and a run with more users reuses the
//! draws of a run with fewer users (common random numbers across `N`).

#[cfg(test)]
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::RicianSpec;
use crate::channels::{ChannelModel, ChannelRealization};
use crate::error::{Error, Result};
use crate::rab::{self, RabWeights};
use crate::scalar::Scalar;

/// Minimum number of trials for a capacity estimate.
pub const MIN_TRIALS: u64 = 100;

/// Trials per unit of parallel work. Fixed so that the reduction tree does
/// not depend on the thread count.
const CHUNK: u64 = 1024;

const LOS_PHASE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Single pattern per user (`M = 1`), no beamforming.
    Baseline,
    /// Random aerial beamforming over `M` basis patterns.
    Rab,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Rab => "rab",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Nats,
    Bits,
}

impl LogBase {
    /// Converts a value in nats to this base.
    pub fn from_nats<T: Scalar>(self, nats: T) -> T {
        match self {
            LogBase::Nats => nats,
            LogBase::Bits => nats / T::LN_2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct NetworkConfig<T> {
    pub n_users: usize,
    pub m_patterns: usize,
    pub k_factor: T,
    pub mean_secondary_power: T,
    pub mean_interference_power: T,
    pub primary_power: T,
    pub mean_ps_power: T,
    pub peak_interference: T,
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
    pub log_base: LogBase,
    /// Optional transmit power ceiling; when it binds, the interference at
    /// the primary falls below `Q_p`. Off by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_power_cap: Option<T>,
}

impl<T: Scalar> Default for NetworkConfig<T> {
    fn default() -> Self {
        Self {
            n_users: 100,
            m_patterns: 2,
            k_factor: T::zero(),
            mean_secondary_power: T::one(),
            mean_interference_power: T::one(),
            primary_power: T::zero(),
            mean_ps_power: T::one(),
            peak_interference: T::one(),
            trials: 100_000,
            seed: 42,
            mode: Mode::Rab,
            log_base: LogBase::Nats,
            max_power_cap: None,
        }
    }
}

impl<T: Scalar> NetworkConfig<T> {
    /// Checks every field; baseline mode forces `m_patterns = 1`.
    pub fn validated(mut self) -> Result<Self> {
        if self.n_users == 0 {
            return Err(Error::invalid("n_users", "must be >= 1"));
        }
        if self.m_patterns == 0 {
            return Err(Error::invalid("m_patterns", "must be >= 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        let positive = [
            ("mean_secondary_power", self.mean_secondary_power),
            ("mean_interference_power", self.mean_interference_power),
            ("peak_interference", self.peak_interference),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("k_factor", self.k_factor),
            ("primary_power", self.primary_power),
            ("mean_ps_power", self.mean_ps_power),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if let Some(cap) = self.max_power_cap {
            if !(cap > T::zero()) {
                return Err(Error::invalid("max_power_cap", format!("must be > 0, got {cap}")));
            }
        }
        if self.mode == Mode::Baseline {
            self.m_patterns = 1;
        }
        Ok(self)
    }
}

/// Outcome of one scheduled slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome<T> {
    pub selected_user: usize,
    pub sinr: T,
    /// `ln(1 + sinr)`.
    pub capacity_nats: T,
    /// Transmit power of the selected user, `Q_p / |h_sp|²`.
    pub transmit_power: T,
    /// Received interference power at the primary, `P_s·|h_sp|²`; equals
    /// `Q_p` unless a power cap binds.
    pub interference_power_at_pu: T,
    /// The slot had no usable SINR (all zero, or a null interference channel).
    pub flagged: bool,
}

/// SINR of every user in a slot.
///
/// `weights` must be present (one entry per user) exactly when the
/// configuration is in RAB mode.
pub fn slot_sinr<T: Scalar>(
    realization: &ChannelRealization<T>,
    config: &NetworkConfig<T>,
    weights: Option<&[RabWeights<T>]>,
) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(realization.n_users);
    slot_sinr_into(realization, config, weights, &mut out)?;
    Ok(out)
}

fn slot_sinr_into<T: Scalar>(
    realization: &ChannelRealization<T>,
    config: &NetworkConfig<T>,
    weights: Option<&[RabWeights<T>]>,
    out: &mut Vec<T>,
) -> Result<()> {
    let n = realization.n_users;
    let m = realization.m_patterns;
    if realization.secondary.len() != n * m || realization.interference.len() != n * m {
        return Err(Error::DimensionMismatch {
            what: "channel realization",
            expected: n * m,
            found: realization.secondary.len().min(realization.interference.len()),
        });
    }
    let denom = T::one() + config.primary_power * realization.primary_to_secondary_power;
    let q = config.peak_interference;
    let sinr = |gs: T, gsp: T| match config.max_power_cap {
        None => gs / gsp * q / denom,
        Some(cap) => gs * (q / gsp).min(cap) / denom,
    };
    out.clear();
    match (config.mode, weights) {
        (Mode::Baseline, None) => {
            if m != 1 {
                return Err(Error::DimensionMismatch {
                    what: "patterns in baseline mode",
                    expected: 1,
                    found: m,
                });
            }
            out.extend(
                realization
                    .secondary
                    .iter()
                    .zip(&realization.interference)
                    .map(|(hs, hsp)| sinr(hs.norm_sqr(), hsp.norm_sqr())),
            );
        }
        (Mode::Rab, Some(w)) => {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "per-user weights",
                    expected: n,
                    found: w.len(),
                });
            }
            for (user, wu) in w.iter().enumerate() {
                let hs = rab::combine(wu, realization.secondary_of(user))?;
                let hsp = rab::combine(wu, realization.interference_of(user))?;
                out.push(sinr(hs.norm_sqr(), hsp.norm_sqr()));
            }
        }
        (Mode::Baseline, Some(_)) => {
            return Err(Error::invalid("weights", "baseline mode takes no beamforming weights"));
        }
        (Mode::Rab, None) => {
            return Err(Error::invalid("weights", "RAB mode needs per-user weights"));
        }
    }
    Ok(())
}

/// Equivalent interference channel power of `user` under the slot's weights.
fn interference_power<T: Scalar>(
    realization: &ChannelRealization<T>,
    weights: Option<&[RabWeights<T>]>,
    user: usize,
) -> Result<T> {
    Ok(match weights {
        None => realization.interference_of(user)[0].norm_sqr(),
        Some(w) => rab::combine(&w[user], realization.interference_of(user))?.norm_sqr(),
    })
}

/// A validated configuration together with its fixed LoS phases.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment<T> {
    pub config: NetworkConfig<T>,
    pub model: ChannelModel<T>,
}

/// Scratch buffers reused across the slots of one worker.
struct SlotScratch<T> {
    realization: ChannelRealization<T>,
    weights: Vec<RabWeights<T>>,
    sinr: Vec<T>,
}

pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl<T: Scalar> Experiment<T> {
    pub fn new(config: NetworkConfig<T>) -> Result<Self> {
        let config = config.validated()?;
        let mut phase_rng = trial_rng(config.seed, LOS_PHASE_STREAM);
        let model = ChannelModel::new(
            config.n_users,
            config.m_patterns,
            config.mean_secondary_power,
            RicianSpec::new(config.k_factor, config.mean_interference_power)?,
            config.mean_ps_power,
            &mut phase_rng,
        )?;
        Ok(Self { config, model })
    }

    fn scratch(&self) -> SlotScratch<T> {
        let (n, m) = (self.config.n_users, self.config.m_patterns);
        let weights = match self.config.mode {
            Mode::Baseline => Vec::new(),
            Mode::Rab => {
                let mag = T::one() / T::from_usize(m).unwrap().sqrt();
                vec![
                    RabWeights {
                        magnitudes: vec![mag; m],
                        phases: vec![T::zero(); m],
                    };
                    n
                ]
            }
        };
        SlotScratch {
            realization: ChannelRealization::zeros(n, m),
            weights,
            sinr: Vec::with_capacity(n),
        }
    }

    /// One scheduled slot, with channels from `channel_rng` and beamforming
    /// phases from `weight_rng`.
    pub fn run_slot<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &self,
        channel_rng: &mut R1,
        weight_rng: &mut R2,
    ) -> Result<SlotOutcome<T>> {
        let mut scratch = self.scratch();
        self.run_slot_with(&mut scratch, channel_rng, weight_rng)
    }

    /// Slot `trial` of the experiment's deterministic trial sequence.
    pub fn run_trial(&self, trial: u64) -> Result<SlotOutcome<T>> {
        let mut scratch = self.scratch();
        self.run_trial_with(&mut scratch, trial)
    }

    fn run_trial_with(&self, scratch: &mut SlotScratch<T>, trial: u64) -> Result<SlotOutcome<T>> {
        let mut channel_rng = trial_rng(self.config.seed, 2 * trial);
        let mut weight_rng = trial_rng(self.config.seed, 2 * trial + 1);
        self.run_slot_with(scratch, &mut channel_rng, &mut weight_rng)
    }

    fn run_slot_with<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &self,
        scratch: &mut SlotScratch<T>,
        channel_rng: &mut R1,
        weight_rng: &mut R2,
    ) -> Result<SlotOutcome<T>> {
        self.model.draw_slot_into(&mut scratch.realization, channel_rng);
        let weights = match self.config.mode {
            Mode::Baseline => None,
            Mode::Rab => {
                for w in &mut scratch.weights {
                    w.redraw(weight_rng);
                }
                Some(&scratch.weights[..])
            }
        };
        slot_sinr_into(&scratch.realization, &self.config, weights, &mut scratch.sinr)?;
        let (selected_user, sinr) = scratch
            .sinr
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, s)| if s > best.1 { (i, s) } else { best });
        let g = interference_power(&scratch.realization, weights, selected_user)?;
        let uncapped = if g > T::zero() {
            self.config.peak_interference / g
        } else {
            T::infinity()
        };
        let transmit_power = match self.config.max_power_cap {
            Some(cap) => uncapped.min(cap),
            None => uncapped,
        };
        let flagged = !(sinr.is_finite() && sinr > T::zero());
        Ok(SlotOutcome {
            selected_user,
            sinr,
            capacity_nats: sinr.ln_1p(),
            transmit_power,
            interference_power_at_pu: transmit_power * g,
            flagged,
        })
    }
}

/// Convenience: builds the experiment (LoS phases from `rng`) and runs one
/// slot with channels and weights drawn from the same `rng`.
pub fn run_slot<T: Scalar, R: Rng + ?Sized>(config: &NetworkConfig<T>, rng: &mut R) -> Result<SlotOutcome<T>> {
    let config = config.clone().validated()?;
    let model = ChannelModel::new(
        config.n_users,
        config.m_patterns,
        config.mean_secondary_power,
        RicianSpec::new(config.k_factor, config.mean_interference_power)?,
        config.mean_ps_power,
        rng,
    )?;
    let exp = Experiment { config, model };
    let mut scratch = exp.scratch();
    let mut channel_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut weight_rng = ChaCha8Rng::seed_from_u64(rng.random());
    exp.run_slot_with(&mut scratch, &mut channel_rng, &mut weight_rng)
}

/// Mean ± standard error of the per-slot capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate<T> {
    /// In the configured log base.
    pub mean: T,
    pub stderr: T,
    /// Slots averaged (excludes flagged slots).
    pub trials: u64,
    pub flagged: u64,
}

/// Running mean and sum of squared deviations (Welford), mergeable.
#[derive(Debug, Clone, Copy)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Self = Self {
        count: 0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Self {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }
}

impl<T: Scalar> Experiment<T> {
    /// Per-slot capacities (nats) of trials `range`, in order.
    pub fn slot_capacities(&self, range: std::ops::Range<u64>) -> Result<Vec<SlotOutcome<T>>> {
        let mut scratch = self.scratch();
        range.map(|t| self.run_trial_with(&mut scratch, t)).collect()
    }

    /// Monte-Carlo ergodic capacity over `config.trials` slots, in parallel.
    pub fn ergodic_capacity(&self) -> Result<CapacityEstimate<T>> {
        let trials = self.config.trials;
        if trials < MIN_TRIALS {
            return Err(Error::invalid("trials", format!("need at least {MIN_TRIALS}, got {trials}")));
        }
        let chunks = trials.div_ceil(CHUNK);
        let partial: Vec<(Moments, u64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut scratch = self.scratch();
                let mut moments = Moments::EMPTY;
                let mut flagged = 0;
                for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    let out = self.run_trial_with(&mut scratch, t)?;
                    flagged += u64::from(out.flagged);
                    // A null interference channel (probability zero) has no
                    // finite capacity and is left out of the average.
                    if out.capacity_nats.is_finite() {
                        moments.push(out.capacity_nats.as_f64());
                    }
                }
                Ok((moments, flagged))
            })
            .collect::<Result<_>>()?;
        let (moments, flagged) = partial
            .into_iter()
            .fold((Moments::EMPTY, 0), |(m, f), (mc, fc)| (m.merge(mc), f + fc));
        if moments.count < 2 {
            return Err(Error::InsufficientPoints {
                needed: "at least two usable slots",
                reason: "too many flagged slots".into(),
            });
        }
        let var = moments.m2 / (moments.count - 1) as f64;
        let stderr = (var / moments.count as f64).sqrt();
        let base = self.config.log_base;
        Ok(CapacityEstimate {
            mean: base.from_nats(T::lit(moments.mean)),
            stderr: base.from_nats(T::lit(stderr)),
            trials: moments.count,
            flagged,
        })
    }
}

pub fn ergodic_capacity<T: Scalar>(config: &NetworkConfig<T>) -> Result<CapacityEstimate<T>> {
    Experiment::new(config.clone())?.ergodic_capacity()
}

/// Capacity normalized by reference quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized<T> {
    /// `C_N / C_1` for the same mode, `K` and `M`.
    pub gain_vs_single_user: Option<T>,
    /// `C_N / ln N` (undefined at `N = 1`).
    pub per_log_n: Option<T>,
    /// `C_N / ln ln N` (undefined for `N ≤ 2`).
    pub per_log_log_n: Option<T>,
}

#[derive(Debug)]
pub struct SweepPoint<T> {
    /// Effective configuration of the point (after validation).
    pub config: NetworkConfig<T>,
    pub estimate: Result<CapacityEstimate<T>>,
    pub normalized: Normalized<T>,
}

#[derive(Debug, Default)]
pub struct SweepResult<T> {
    pub points: Vec<SweepPoint<T>>,
}

impl<T: Scalar> SweepResult<T> {
    /// Whether any grid point failed.
    pub fn is_partial(&self) -> bool {
        self.points.iter().any(|p| p.estimate.is_err())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The grid axes of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid<T> {
    pub n_list: Vec<usize>,
    pub k_list: Vec<T>,
    pub m_list: Vec<usize>,
    pub modes: Vec<Mode>,
}

impl<T: Scalar> SweepGrid<T> {
    /// Grid points in output order: mode, then `K`, then `M`, then `N`.
    /// Baseline collapses the `M` axis to 1.
    pub fn points(&self) -> Vec<(Mode, T, usize, usize)> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &k in &self.k_list {
                let ms: Vec<usize> = match mode {
                    Mode::Baseline => vec![1],
                    Mode::Rab => self.m_list.clone(),
                };
                for m in ms {
                    for &n in &self.n_list {
                        out.push((mode, k, m, n));
                    }
                }
            }
        }
        out
    }
}

/// Evaluates every grid point; a failing point is recorded, not fatal.
pub fn sweep<T: Scalar>(template: &NetworkConfig<T>, grid: &SweepGrid<T>) -> Result<SweepResult<T>> {
    sweep_with_progress(template, grid, |_, _| {})
}

/// [`sweep`] calling `progress(point, elapsed)` after each grid point.
pub fn sweep_with_progress<T: Scalar>(
    template: &NetworkConfig<T>,
    grid: &SweepGrid<T>,
    mut progress: impl FnMut(&SweepPoint<T>, std::time::Duration),
) -> Result<SweepResult<T>> {
    if grid.n_list.is_empty() || grid.k_list.is_empty() || grid.m_list.is_empty() || grid.modes.is_empty() {
        return Err(Error::invalid("grid", "every sweep axis needs at least one value"));
    }
    let mut result = SweepResult { points: Vec::new() };
    let mut single_user: Vec<((Mode, u64, usize), Result<T>)> = Vec::new();
    for (mode, k, m, n) in grid.points() {
        let started = std::time::Instant::now();
        let config = NetworkConfig {
            n_users: n,
            m_patterns: m,
            k_factor: k,
            mode,
            ..template.clone()
        };
        let key = (mode, k.as_f64().to_bits(), m);
        let c1 = match single_user.iter().find(|(k2, _)| *k2 == key) {
            Some((_, c)) => c.as_ref().ok().copied(),
            None => {
                let c = ergodic_capacity(&NetworkConfig {
                    n_users: 1,
                    ..config.clone()
                })
                .map(|e| e.mean);
                let out = c.as_ref().ok().copied();
                single_user.push((key, c));
                out
            }
        };
        let estimate = ergodic_capacity(&config);
        let config = config.clone().validated().unwrap_or(config);
        let normalized = match &estimate {
            Ok(e) => normalize(e.mean, n, c1),
            Err(_) => Normalized {
                gain_vs_single_user: None,
                per_log_n: None,
                per_log_log_n: None,
            },
        };
        let point = SweepPoint {
            config,
            estimate,
            normalized,
        };
        progress(&point, started.elapsed());
        result.points.push(point);
    }
    Ok(result)
}

fn normalize<T: Scalar>(c: T, n: usize, c1: Option<T>) -> Normalized<T> {
    let nf = T::from_usize(n).unwrap();
    Normalized {
        gain_vs_single_user: c1.filter(|&c1| c1 > T::zero()).map(|c1| c / c1),
        per_log_n: (n > 1).then(|| c / nf.ln()),
        per_log_log_n: (n > 2).then(|| c / nf.ln().ln()),
    }
}

/// Normalizing growth function for [`growth_flatness`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthLaw {
    /// No normalization.
    None,
    LogN,
    LogLogN,
}

impl GrowthLaw {
    pub fn eval<T: Scalar>(self, n: T) -> T {
        match self {
            GrowthLaw::None => T::one(),
            GrowthLaw::LogN => n.ln(),
            GrowthLaw::LogLogN => n.ln().ln(),
        }
    }
}

/// Least-squares slope of `values/law(N)` against `ln N` over the upper half
/// of the grid (the last `⌈n/2⌉` points). A slope near zero means `values`
/// grows like `law`.
pub fn growth_flatness<T: Scalar>(n_list: &[usize], values: &[T], law: GrowthLaw) -> Result<T> {
    if n_list.len() != values.len() {
        return Err(Error::DimensionMismatch {
            what: "growth values",
            expected: n_list.len(),
            found: values.len(),
        });
    }
    if n_list.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: "at least 4 grid points",
            reason: format!("got {}", n_list.len()),
        });
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_list", "must be strictly increasing"));
    }
    if n_list[0] < 3 || n_list[n_list.len() - 1] < 10 * n_list[0] {
        return Err(Error::InsufficientPoints {
            needed: "a grid starting at N >= 3 and spanning a decade",
            reason: format!("got N from {} to {}", n_list[0], n_list[n_list.len() - 1]),
        });
    }
    let start = n_list.len() / 2;
    let (xs, ys): (Vec<T>, Vec<T>) = n_list[start..]
        .iter()
        .zip(&values[start..])
        .map(|(&n, &v)| {
            let nf = T::from_usize(n).unwrap();
            (nf.ln(), v / law.eval(nf))
        })
        .unzip();
    let count = T::from_usize(xs.len()).unwrap();
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / count;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / count;
    let (sxy, sxx) = xs
        .iter()
        .zip(&ys)
        .fold((T::zero(), T::zero()), |(sxy, sxx), (&x, &y)| {
            (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
        });
    Ok(sxy / sxx)
}
