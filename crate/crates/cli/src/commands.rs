//! Subcommand implementations. Each returns the process exit code.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use cogbeam::analytic::{self, RatioDistParams};
use cogbeam::espar::{build_basis, element_currents, pattern_value, pattern_weights};
use cogbeam::simulator::{sweep_with_progress, SweepGrid};
use cogbeam::validation::{self, CheckReport, Hooks, Level};
use cogbeam::NetworkConfig;
use log::info;

use crate::config::{self, EsparSection, FileConfig};
use crate::output::{self, float, SweepWriter};
use crate::presets::PresetName;

pub const EXIT_OK: i32 = 0;
/// A check failed, or a sweep produced partial results.
pub const EXIT_FAILED: i32 = 1;

fn load(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            Ok(config::parse_str(&text, p)?)
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub config: Option<PathBuf>,
    pub preset: Option<PresetName>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    /// Print the effective configuration as TOML instead of simulating.
    pub emit_config: bool,
}

/// Runs every grid and streams the CSV; returns the number of failed points.
pub fn run_sweeps<W: Write>(template: &NetworkConfig, grids: &[SweepGrid<f64>], out: W) -> Result<usize> {
    let mut writer = SweepWriter::new(out)?;
    for grid in grids {
        let mut write_err = None;
        sweep_with_progress(template, grid, |point, elapsed| {
            let c = &point.config;
            match &point.estimate {
                Ok(e) => info!(
                    "{} N={} M={} K={}: C={:.5} ± {:.5} ({:.2?})",
                    c.mode.as_str(),
                    c.n_users,
                    c.m_patterns,
                    c.k_factor,
                    e.mean,
                    e.stderr,
                    elapsed
                ),
                Err(err) => log::warn!(
                    "{} N={} M={} K={}: failed: {err}",
                    c.mode.as_str(),
                    c.n_users,
                    c.m_patterns,
                    c.k_factor
                ),
            }
            if write_err.is_none() {
                write_err = writer.write_point(point).err();
            }
        })?;
        if let Some(e) = write_err {
            return Err(e.into());
        }
    }
    Ok(writer.finish()?)
}

pub fn simulate(args: &SimulateArgs) -> Result<i32> {
    let mut file = load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        file.network.seed = seed;
    }
    if let Some(trials) = args.trials {
        file.network.trials = trials;
    }
    if let Some(p) = args.preset {
        file.preset = Some(p);
    }
    if args.emit_config {
        print!("{}", config::to_toml(&file));
        return Ok(EXIT_OK);
    }
    let (template, preset) = config::resolve(&file, None)?;
    let out_path = args.out.clone().or(preset.output_path.clone());
    info!(
        "preset {} with {} trials per point, seed {}",
        preset.name.as_str(),
        template.trials,
        template.seed
    );
    let failed = run_sweeps(&template, &preset.grids, open_output(out_path.as_deref())?)?;
    if failed > 0 {
        log::error!("{failed} grid point(s) failed; output is partial");
        return Ok(EXIT_FAILED);
    }
    Ok(EXIT_OK)
}

/// The fig5 grid on fewer users and trials, swept on one and on four
/// threads: the CSV bytes must match.
pub fn determinism_check() -> CheckReport {
    let name = "determinism";
    let run = |threads: usize| -> Result<Vec<u8>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        let template = NetworkConfig {
            trials: 3000,
            ..NetworkConfig::default()
        };
        let mut grids = PresetName::Fig5.grids();
        grids.extend(PresetName::Fig8.grids());
        for g in &mut grids {
            g.n_list = vec![8, 16, 32];
        }
        let mut buf = Vec::new();
        pool.install(|| run_sweeps(&template, &grids, &mut buf))?;
        Ok(buf)
    };
    match (run(1), run(4)) {
        (Ok(a), Ok(b)) => {
            let same = a == b;
            CheckReport::new(
                name,
                same,
                if same { 0.0 } else { 1.0 },
                0.0,
                format!("{} CSV bytes, threads 1 vs 4", a.len()),
            )
        }
        (Err(e), _) | (_, Err(e)) => CheckReport::new(name, false, f64::NAN, 0.0, format!("error: {e}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Fast,
    Full,
}

pub struct ValidateArgs {
    pub level: LevelArg,
    pub out: Option<PathBuf>,
    pub lambert_scale: f64,
}

pub fn validate(args: &ValidateArgs) -> Result<i32> {
    let level = match args.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let hooks = Hooks {
        lambert_scale: args.lambert_scale,
    };
    let mut reports = validation::run_all(level, hooks);
    reports.push(determinism_check());
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    println!(
        "{} of {} checks passed{}",
        reports.len() - failed.len(),
        reports.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    if let Some(p) = &args.out {
        output::write_checks(open_output(Some(p))?, &reports)?;
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_FAILED })
}

pub struct EsparArgs {
    pub config: Option<PathBuf>,
    pub elements: Option<usize>,
    pub reactances: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
}

pub fn espar(args: &EsparArgs) -> Result<i32> {
    let file = load(args.config.as_deref())?;
    let mut section = file.espar.unwrap_or_default();
    if let Some(m) = args.elements {
        section.m_elements = m;
        if section.reactances.len() + 1 != m {
            section.reactances = vec![0.0; m.saturating_sub(1)];
        }
    }
    if let Some(x) = &args.reactances {
        section.reactances = x.clone();
    }
    if let Some(g) = args.grid {
        section.grid_size = g;
    }
    let EsparSection { grid_size, .. } = section;
    let cfg = section.to_config()?;
    let currents = element_currents(&cfg, &section.reactances)?;
    let basis = build_basis(&cfg, grid_size)?;
    let weights = pattern_weights(&currents, &basis)?;

    let mut w = csv::Writer::from_writer(open_output(Some(&args.out))?);
    w.write_record(["theta", "re", "im", "magnitude", "basis_re", "basis_im"])?;
    for &theta in &basis.theta_grid {
        let p = pattern_value(&currents, &cfg, theta);
        let e = basis.expand(&weights, theta);
        w.write_record([float(theta), float(p.re), float(p.im), float(p.norm()), float(e.re), float(e.im)])?;
    }
    w.flush()?;

    let off_diagonal = basis.max_off_diagonal();
    let report_path = args.report.clone().unwrap_or_else(|| args.out.with_extension("report.txt"));
    let mut r = open_output(Some(&report_path))?;
    writeln!(r, "m_elements = {}", cfg.m_elements)?;
    writeln!(r, "grid_size = {grid_size}")?;
    writeln!(r, "max_off_diagonal = {}", float(off_diagonal))?;
    writeln!(r, "orthonormality_error = {}", float(basis.orthonormality_error()))?;
    writeln!(r, "reconstruction_residual = {}", float(basis.reconstruction_residual()))?;
    writeln!(r, "pattern_energy = {}", float(basis.pattern_energy(&currents)))?;
    for (l, wl) in weights.iter().enumerate() {
        writeln!(r, "weight_{l} = {} {}", float(wl.re), float(wl.im))?;
    }
    for (m, i) in currents.iter().enumerate() {
        writeln!(r, "current_{m} = {} {}", float(i.re), float(i.im))?;
    }
    r.flush()?;
    println!("max off-diagonal |<Phi_i, Phi_j>| = {off_diagonal:.3e}");
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    RatioCdf,
    RatioPdf,
    RatioSf,
    RabM2Cdf,
    RabM2Sf,
    RabM2TailCdf,
    /// x is the user count N.
    Normalizer,
    /// x is the user count N.
    RabM2Normalizer,
    /// x is the user count N.
    ScalingLaw,
    /// x is the user count N.
    EffectiveUsersModerateK,
    /// x is the user count N.
    EffectiveUsersRab,
    LambertW,
    BesselI0,
}

pub struct AnalyticArgs {
    pub function: Function,
    pub k_factor: f64,
    pub rho: f64,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log_spaced: bool,
    pub out: Option<PathBuf>,
}

fn grid(args: &AnalyticArgs) -> Result<Vec<f64>> {
    anyhow::ensure!(args.points >= 1, "--points must be >= 1");
    anyhow::ensure!(args.from <= args.to, "--from must not exceed --to");
    if args.log_spaced {
        anyhow::ensure!(args.from > 0.0, "--log needs --from > 0");
    }
    let n = args.points;
    Ok((0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            if args.log_spaced {
                (args.from.ln() + t * (args.to.ln() - args.from.ln())).exp()
            } else {
                args.from + t * (args.to - args.from)
            }
        })
        .collect())
}

pub fn analytic(args: &AnalyticArgs) -> Result<i32> {
    let p = RatioDistParams::new(args.k_factor, args.rho)?;
    let k = args.k_factor;
    let users = |x: f64| x.round().max(0.0) as u64;
    let eval = |x: f64| -> cogbeam::Result<f64> {
        match args.function {
            Function::RatioCdf => analytic::ratio_cdf(x, &p),
            Function::RatioPdf => analytic::ratio_pdf(x, &p),
            Function::RatioSf => analytic::ratio_sf(x, &p),
            Function::RabM2Cdf => analytic::rab_m2_cdf(x, &p),
            Function::RabM2Sf => analytic::rab_m2_sf(x, &p),
            Function::RabM2TailCdf => analytic::rab_m2_tail_cdf(x, &p),
            Function::Normalizer => analytic::normalizer_a_n(users(x), &p),
            Function::RabM2Normalizer => analytic::rab_m2_normalizer(users(x), &p),
            Function::ScalingLaw => analytic::theorem1_law(users(x), k),
            Function::EffectiveUsersModerateK => analytic::effective_users_moderate_k(users(x), k),
            Function::EffectiveUsersRab => analytic::effective_users_rab_m2(users(x), k),
            Function::LambertW => analytic::lambert_w0(x),
            Function::BesselI0 => analytic::bessel_i0(x),
        }
    };
    let mut w = csv::Writer::from_writer(open_output(args.out.as_deref())?);
    w.write_record(["x", "value"])?;
    for x in grid(args)? {
        w.write_record([float(x), float(eval(x)?)])?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}
