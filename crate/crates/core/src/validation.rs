//! Self-checks of the closed forms against independent computation and
//! simulation. Each check returns a [`CheckReport`]; tolerances are the
//! `pub const`s below and seeds are fixed, so results are deterministic.

use num_complex::Complex;
use rand::Rng;

use crate::analytic::{
    self, bessel_i0, bessel_i0e, lambert_w0, normalizer_a_n_with, rab_m2_cdf, rab_m2_sf,
    rab_m2_tail_cdf, ratio_cdf, RatioDistParams, RicianSpec,
};
use crate::channels::ChannelModel;
use crate::espar::{build_basis, element_currents, pattern_value, pattern_weights, EsparConfig};
use crate::rab::{self, arcsine_cdf, draw_weights};
use crate::simulator::{ergodic_capacity, growth_flatness, trial_rng, GrowthLaw, Mode, NetworkConfig};
use crate::stats::{ks_test, max_normalization_check, EmpiricalDist, KsReport};

/// Master seed of every Monte-Carlo check.
pub const VALIDATION_SEED: u64 = 20_240_917;

pub const QUANTILE_TOL: f64 = 1e-9;
pub const EFFECTIVE_USERS_REL_TOL: f64 = 0.02;
pub const RAB_EFFECTIVE_USERS_REL_TOL: f64 = 0.03;
pub const FLATNESS_FACTOR: f64 = 5.0;
pub const ARCSINE_VARIANCE_TOL: f64 = 0.005;
pub const TAIL_FORM_REL_TOL: f64 = 0.02;
pub const ESPAR_TOL: f64 = 1e-8;
pub const LAMBERT_RESIDUAL_TOL: f64 = 1e-12;
pub const BESSEL_REL_TOL: f64 = 1e-10;

/// Trials for the capacity comparisons, and for the growth studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    fn capacity_trials(self) -> u64 {
        match self {
            Level::Fast => 10_000,
            Level::Full => 100_000,
        }
    }

    fn growth_trials(self) -> u64 {
        match self {
            Level::Fast => 10_000,
            Level::Full => 20_000,
        }
    }
}

/// Fault injection for checking that the suite detects errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hooks {
    /// Multiplies every Lambert W value used by the normalizer.
    pub lambert_scale: f64,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { lambert_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub pass: bool,
    /// The worst observed value of the checked quantity.
    pub metric: f64,
    /// The bound `metric` was held to.
    pub tolerance: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: &'static str, pass: bool, metric: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            pass,
            metric,
            tolerance,
            detail,
        }
    }

    fn error(name: &'static str, err: crate::Error) -> Self {
        Self::new(name, false, f64::NAN, f64::NAN, format!("error: {err}"))
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<28} metric={:.6e} tol={:.3e}  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.metric,
            self.tolerance,
            self.detail
        )
    }
}

fn run(name: &'static str, f: impl FnOnce() -> crate::Result<CheckReport>) -> CheckReport {
    f().unwrap_or_else(|e| CheckReport::error(name, e))
}

/// Every check in this module, in order.
pub fn run_all(level: Level, hooks: Hooks) -> Vec<CheckReport> {
    vec![
        quantile_identity(hooks),
        ratio_distribution_fit(),
        frechet_normalization(),
        moderate_k_effective_users(level),
        large_k_growth(level),
        rab_effective_users(level),
        rab_log_growth(level),
        rab_distribution_facts(),
        rab_closed_form(),
        espar_identities(),
        special_functions(),
    ]
}

/// `ratio_cdf(a_N) = 1 − 1/N` over a grid of `N`, `K` and `ρ`.
pub fn quantile_identity(hooks: Hooks) -> CheckReport {
    run("quantile_identity", || {
        let mut worst = 0.0f64;
        for n in [2u64, 10, 100, 10_000] {
            for k in [0.0, 0.5, 2.0, 10.0] {
                for rho in [0.5, 1.0, 4.0] {
                    let p = RatioDistParams::new(k, rho)?;
                    let a = normalizer_a_n_with(n, &p, |w| w * hooks.lambert_scale)?;
                    let err = (ratio_cdf(a, &p)? - (1.0 - 1.0 / n as f64)).abs();
                    worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
                }
            }
        }
        Ok(CheckReport::new(
            "quantile_identity",
            worst <= QUANTILE_TOL,
            worst,
            QUANTILE_TOL,
            "48 (N, K, rho) points".into(),
        ))
    })
}

/// Samples of `z = γ_s/γ_sp` from the channel sampler, `n_slots × n_users`
/// at a time, reduced per slot by `reduce`.
fn ratio_samples(
    k: f64,
    n_users: usize,
    n_slots: usize,
    stream: u64,
    reduce: impl Fn(&mut dyn Iterator<Item = f64>) -> Vec<f64>,
) -> crate::Result<Vec<f64>> {
    let mut rng = trial_rng(VALIDATION_SEED, stream);
    let model = ChannelModel::new(n_users, 1, 1.0, RicianSpec::new(k, 1.0)?, 0.0, &mut rng)?;
    let mut out = Vec::with_capacity(n_slots * n_users);
    for _ in 0..n_slots {
        let slot = model.draw_slot(&mut rng);
        let mut it = slot
            .secondary
            .iter()
            .zip(&slot.interference)
            .map(|(s, i)| s.norm_sqr() / i.norm_sqr());
        out.extend(reduce(&mut it));
    }
    Ok(out)
}

fn ks_summary(reports: &[(String, KsReport<f64>)]) -> (bool, f64, f64, String) {
    let pass = reports.iter().all(|(_, r)| r.pass);
    let worst = reports
        .iter()
        .max_by(|a, b| (a.1.statistic / a.1.threshold_1pct).total_cmp(&(b.1.statistic / b.1.threshold_1pct)))
        .unwrap();
    let detail = reports
        .iter()
        .map(|(label, r)| format!("{label}: D={:.5}", r.statistic))
        .collect::<Vec<_>>()
        .join(", ");
    (pass, worst.1.statistic, worst.1.threshold_1pct, detail)
}

/// Empirical `z` against the closed-form ratio cdf, `K ∈ {0.5, 2, 10}`.
pub fn ratio_distribution_fit() -> CheckReport {
    run("ratio_distribution_fit", || {
        let mut reports = Vec::new();
        for (i, k) in [0.5, 2.0, 10.0].into_iter().enumerate() {
            let z = ratio_samples(k, 1, 10_000, 100 + i as u64, |it| it.collect())?;
            let p = RatioDistParams::new(k, 1.0)?;
            let r = ks_test(&EmpiricalDist::new(z)?, |x| ratio_cdf(x, &p).unwrap_or(f64::NAN))?;
            reports.push((format!("K={k}"), r));
        }
        let (pass, d, thr, detail) = ks_summary(&reports);
        Ok(CheckReport::new("ratio_distribution_fit", pass, d, thr, detail))
    })
}

/// `max_n z_n / a_N` against the unit Fréchet law at `N = 256`.
pub fn frechet_normalization() -> CheckReport {
    run("frechet_normalization", || {
        const N: usize = 256;
        let mut reports = Vec::new();
        for (i, k) in [0.0, 2.0].into_iter().enumerate() {
            let maxima = ratio_samples(k, N, 10_000, 200 + i as u64, |it| {
                vec![it.fold(f64::NEG_INFINITY, f64::max)]
            })?;
            let a_n = analytic::normalizer_a_n(N as u64, &RatioDistParams::new(k, 1.0)?)?;
            reports.push((format!("K={k}"), max_normalization_check(&maxima, a_n)?));
        }
        let (pass, d, thr, detail) = ks_summary(&reports);
        Ok(CheckReport::new("frechet_normalization", pass, d, thr, detail))
    })
}

fn capacity(mode: Mode, n: usize, k: f64, m: usize, trials: u64) -> crate::Result<(f64, f64)> {
    let est = ergodic_capacity(&NetworkConfig {
        n_users: n,
        m_patterns: m,
        k_factor: k,
        mode,
        trials,
        seed: VALIDATION_SEED,
        ..NetworkConfig::default()
    })?;
    Ok((est.mean, est.stderr))
}

/// Baseline capacity at `(K = 2, N = 500)` against Rayleigh interference at
/// the effective user count `500·3/e²`.
pub fn moderate_k_effective_users(level: Level) -> CheckReport {
    run("moderate_k_effective_users", || {
        let trials = level.capacity_trials();
        let n_eff = analytic::effective_users_moderate_k(500, 2.0_f64)?.round() as usize;
        let (c_los, _) = capacity(Mode::Baseline, 500, 2.0, 1, trials)?;
        let (c_ref, _) = capacity(Mode::Baseline, n_eff, 0.0, 1, trials)?;
        let rel = (c_los - c_ref).abs() / c_ref;
        Ok(CheckReport::new(
            "moderate_k_effective_users",
            rel <= EFFECTIVE_USERS_REL_TOL,
            rel,
            EFFECTIVE_USERS_REL_TOL,
            format!("C(K=2,N=500)={c_los:.5} C(K=0,N={n_eff})={c_ref:.5}, {trials} trials"),
        ))
    })
}

/// Log-spaced user grid of the growth studies.
pub const GROWTH_GRID: [usize; 6] = [16, 32, 64, 128, 256, 512];

fn growth_curve(mode: Mode, m: usize, k: f64, trials: u64) -> crate::Result<Vec<f64>> {
    GROWTH_GRID
        .iter()
        .map(|&n| capacity(mode, n, k, m, trials).map(|c| c.0))
        .collect()
}

/// Baseline `K = 10`: capacity normalized by `ln ln N` is at least
/// [`FLATNESS_FACTOR`] times flatter than the raw capacity.
pub fn large_k_growth(level: Level) -> CheckReport {
    run("large_k_growth", || {
        let c = growth_curve(Mode::Baseline, 1, 10.0, level.growth_trials())?;
        let raw = growth_flatness(&GROWTH_GRID, &c, GrowthLaw::None)?;
        let loglog = growth_flatness(&GROWTH_GRID, &c, GrowthLaw::LogLogN)?;
        let ratio = loglog.abs() / raw.abs();
        Ok(CheckReport::new(
            "large_k_growth",
            ratio <= 1.0 / FLATNESS_FACTOR,
            ratio,
            1.0 / FLATNESS_FACTOR,
            format!("slope raw={raw:.5} loglogN={loglog:.5}"),
        ))
    })
}

/// Two-pattern beamforming at `N = 200` against Rayleigh interference at the
/// effective user count, for `K = 10` and `K = 100`.
pub fn rab_effective_users(level: Level) -> CheckReport {
    run("rab_effective_users", || {
        let trials = level.capacity_trials();
        let mut worst = 0.0f64;
        let mut detail = Vec::new();
        for k in [10.0_f64, 100.0] {
            let n_eff = analytic::effective_users_rab_m2(200, k)?.round() as usize;
            let (c_rab, _) = capacity(Mode::Rab, 200, k, 2, trials)?;
            let (c_ref, _) = capacity(Mode::Baseline, n_eff, 0.0, 1, trials)?;
            let rel = (c_rab - c_ref).abs() / c_ref;
            worst = worst.max(rel);
            detail.push(format!("K={k}: C_rab={c_rab:.5} C(K=0,N={n_eff})={c_ref:.5}"));
        }
        Ok(CheckReport::new(
            "rab_effective_users",
            worst <= RAB_EFFECTIVE_USERS_REL_TOL,
            worst,
            RAB_EFFECTIVE_USERS_REL_TOL,
            format!("{}, {trials} trials", detail.join("; ")),
        ))
    })
}

/// Two-pattern beamforming at `K = 10`: capacity normalized by `ln N` is at
/// least [`FLATNESS_FACTOR`] times flatter than a synthetic `c·ln ln N`
/// curve (anchored to the simulated capacity at the largest `N`) under the
/// same normalization.
pub fn rab_log_growth(level: Level) -> CheckReport {
    run("rab_log_growth", || {
        let c = growth_curve(Mode::Rab, 2, 10.0, level.growth_trials())?;
        let slope = growth_flatness(&GROWTH_GRID, &c, GrowthLaw::LogN)?;
        let n_max = *GROWTH_GRID.last().unwrap() as f64;
        let scale = c[c.len() - 1] / n_max.ln().ln();
        let control: Vec<f64> = GROWTH_GRID.iter().map(|&n| scale * (n as f64).ln().ln()).collect();
        let control_slope = growth_flatness(&GROWTH_GRID, &control, GrowthLaw::LogN)?;
        let raw = growth_flatness(&GROWTH_GRID, &c, GrowthLaw::None)?;
        let ratio = slope.abs() / control_slope.abs();
        Ok(CheckReport::new(
            "rab_log_growth",
            ratio <= 1.0 / FLATNESS_FACTOR,
            ratio,
            1.0 / FLATNESS_FACTOR,
            format!("slope logN={slope:.5} control={control_slope:.5} raw={raw:.5}"),
        ))
    })
}

/// Equivalent interference powers `|Σ w_i h_i|²` of one user with fresh
/// channels and weights per draw.
fn equivalent_interference_powers(m: usize, k: f64, draws: usize, stream: u64) -> crate::Result<Vec<f64>> {
    let mut rng = trial_rng(VALIDATION_SEED, stream);
    let model = ChannelModel::new(1, m, 1.0, RicianSpec::new(k, 1.0)?, 0.0, &mut rng)?;
    let mut weights = draw_weights::<f64, _>(m, &mut rng)?;
    let mut slot = model.draw_slot(&mut rng);
    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        model.draw_slot_into(&mut slot, &mut rng);
        weights.redraw(&mut rng);
        out.push(rab::combine(&weights, &slot.interference)?.norm_sqr());
    }
    Ok(out)
}

/// Rayleigh conversion at `M = 16`, deep nulls at `M = 2`, and the arcsine
/// law of the two-pattern phase term.
pub fn rab_distribution_facts() -> CheckReport {
    run("rab_distribution_facts", || {
        // (a) Many patterns: interference power close to Exponential(γ̄_sp).
        let p16 = equivalent_interference_powers(16, 10.0, 10_000, 300)?;
        let ks = ks_test(&EmpiricalDist::new(p16)?, |x: f64| 1.0 - (-x.max(0.0)).exp())?;

        // (b) Null probability P(power < 0.05) with a near-deterministic LoS.
        let null_freq = |m: usize, stream: u64| -> crate::Result<f64> {
            let p = equivalent_interference_powers(m, 1e6, 1_000_000, stream)?;
            Ok(p.iter().filter(|&&x| x < 0.05).count() as f64 / p.len() as f64)
        };
        let (f2, f4, f8) = (null_freq(2, 301)?, null_freq(4, 302)?, null_freq(8, 303)?);
        let nulls_ok = f2 > f4 && f2 > f8;

        // (c) Artificial LoS power 2·P_LoS·(1 + cos Δ): cos Δ is arcsine distributed.
        let mut rng = trial_rng(VALIDATION_SEED, 304);
        let spec = crate::channels::FadingSpec::rician(10.0, 1.0, 0.0)?;
        let los_power = 10.0 / 11.0;
        let phases = [rng.random::<f64>() * std::f64::consts::TAU, rng.random::<f64>() * std::f64::consts::TAU];
        let zero = [Complex::new(0.0, 0.0); 2];
        let mut cosines = Vec::with_capacity(100_000);
        for _ in 0..100_000 {
            let w = draw_weights::<f64, _>(2, &mut rng)?;
            let parts = rab::equivalent_interference(&w, &spec, &phases, &zero)?;
            cosines.push((parts.artificial_los.norm_sqr() / los_power - 1.0).clamp(-1.0, 1.0));
        }
        let mean = cosines.iter().sum::<f64>() / cosines.len() as f64;
        let var = cosines.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (cosines.len() - 1) as f64;
        let var_err = (var - 0.5).abs();
        let arcsine = ks_test(&EmpiricalDist::new(cosines)?, arcsine_cdf)?;

        let pass = ks.pass && nulls_ok && arcsine.pass && var_err <= ARCSINE_VARIANCE_TOL;
        Ok(CheckReport::new(
            "rab_distribution_facts",
            pass,
            var_err,
            ARCSINE_VARIANCE_TOL,
            format!(
                "M=16 vs Exp: D={:.5} (thr {:.5}); null freq M=2/4/8 = {f2:.4}/{f4:.4}/{f8:.4}; \
                 arcsine D={:.5} (thr {:.5}), var={var:.5}",
                ks.statistic, ks.threshold_1pct, arcsine.statistic, arcsine.threshold_1pct
            ),
        ))
    })
}

/// Empirical two-pattern ratio against its closed-form cdf, and the
/// closed-form tail against the exact survival function at `z = 10³`.
pub fn rab_closed_form() -> CheckReport {
    run("rab_closed_form", || {
        let k = 10.0;
        let mut rng = trial_rng(VALIDATION_SEED, 400);
        let model = ChannelModel::new(1, 2, 1.0, RicianSpec::new(k, 1.0)?, 0.0, &mut rng)?;
        let mut weights = draw_weights::<f64, _>(2, &mut rng)?;
        let mut slot = model.draw_slot(&mut rng);
        let mut z = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            model.draw_slot_into(&mut slot, &mut rng);
            weights.redraw(&mut rng);
            let s = rab::combine(&weights, &slot.secondary)?.norm_sqr();
            let i = rab::combine(&weights, &slot.interference)?.norm_sqr();
            z.push(s / i);
        }
        let p = RatioDistParams::new(k, 1.0)?;
        let ks = ks_test(&EmpiricalDist::new(z)?, |x| rab_m2_cdf(x, &p).unwrap_or(f64::NAN))?;
        let exact = rab_m2_sf(1e3, &p)?;
        let tail = 1.0 - rab_m2_tail_cdf(1e3, &p)?;
        let rel = (tail - exact).abs() / exact;
        Ok(CheckReport::new(
            "rab_closed_form",
            ks.pass && rel <= TAIL_FORM_REL_TOL,
            rel,
            TAIL_FORM_REL_TOL,
            format!(
                "KS D={:.5} (thr {:.5}); survival at z=1e3 exact={exact:.6e} tail={tail:.6e}",
                ks.statistic, ks.threshold_1pct
            ),
        ))
    })
}

/// Basis orthonormality, pattern reconstruction and Parseval for `M = 1..4`.
pub fn espar_identities() -> CheckReport {
    run("espar_identities", || {
        let reactances = [-25.0, 10.0, 40.0];
        let mut worst = 0.0f64;
        for m in 1..=4 {
            let cfg = EsparConfig::<f64>::with_synthetic_admittance(m)?;
            let basis = build_basis(&cfg, 256)?;
            let currents = element_currents(&cfg, &reactances[..m - 1])?;
            let w = pattern_weights(&currents, &basis)?;
            worst = worst.max(basis.max_off_diagonal());
            worst = worst.max(basis.orthonormality_error());
            for j in 0..360 {
                let theta = j as f64 * std::f64::consts::TAU / 360.0 + 0.01;
                worst = worst.max((basis.expand(&w, theta) - pattern_value(&currents, &cfg, theta)).norm());
            }
            let energy: f64 = w.iter().map(|x| x.norm_sqr()).sum();
            worst = worst.max((energy - basis.pattern_energy(&currents)).abs());
        }
        Ok(CheckReport::new(
            "espar_identities",
            worst <= ESPAR_TOL,
            worst,
            ESPAR_TOL,
            "M = 1..4, 256-point grid".into(),
        ))
    })
}

/// `Σ (x/2)^{2m}/(m!)²` with compensated summation, for comparison with
/// [`bessel_i0`].
fn bessel_i0_oracle(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut sum, mut comp, mut term) = (1.0f64, 0.0f64, 1.0f64);
    for m in 1..400 {
        term *= q / (m as f64 * m as f64);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Lambert W residuals on a log grid and Bessel `I₀` against its series.
pub fn special_functions() -> CheckReport {
    run("special_functions", || {
        let inv_e = (-1.0f64).exp();
        let mut xs: Vec<f64> = (0..=60).map(|j| -inv_e + 10f64.powf(-6.0 + j as f64 * 0.09)).filter(|&x| x < 0.0).collect();
        xs.extend((0..=180).map(|j| 10f64.powf(-12.0 + j as f64 * 0.1)));
        let mut lambert = 0.0f64;
        for x in xs {
            let w = lambert_w0(x)?;
            lambert = lambert.max((w * w.exp() - x).abs() / x.abs().max(1.0));
        }
        let mut bessel = 0.0f64;
        for j in 0..=600 {
            let x = j as f64 * 0.05;
            let oracle = bessel_i0_oracle(x);
            bessel = bessel.max((bessel_i0(x)? - oracle).abs() / oracle);
            bessel = bessel.max((bessel_i0e(x)? * x.exp() - oracle).abs() / oracle);
        }
        let pass = lambert <= LAMBERT_RESIDUAL_TOL && bessel <= BESSEL_REL_TOL;
        Ok(CheckReport::new(
            "special_functions",
            pass,
            lambert.max(bessel),
            LAMBERT_RESIDUAL_TOL,
            format!("lambert residual {lambert:.3e} (tol {LAMBERT_RESIDUAL_TOL:.0e}), bessel rel err {bessel:.3e} (tol {BESSEL_REL_TOL:.0e})"),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_identity_detects_corrupted_lambert() {
        assert!(quantile_identity(Hooks::default()).pass);
        let bad = quantile_identity(Hooks { lambert_scale: 1.01 });
        assert!(!bad.pass, "{bad}");
    }

    #[test]
    fn bessel_oracle_known_values() {
        assert!((bessel_i0_oracle(1.0) - 1.2660658777520083).abs() < 1e-15);
        assert!((bessel_i0_oracle(2.0) - 2.279585302336067).abs() < 1e-15);
    }

    #[test]
    fn report_display_names_outcome() {
        let r = CheckReport::new("x", false, 1.0, 0.5, String::new());
        assert!(r.to_string().starts_with("FAIL x"));
    }
}
