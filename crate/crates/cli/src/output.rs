//! CSV emission. Floats are written with 17 significant digits so that a
//! value read back is bit-identical.

use std::io::Write;

use cogbeam::simulator::SweepPoint;
use cogbeam::validation::CheckReport;

/// Columns of the sweep CSV.
pub const SWEEP_HEADER: [&str; 19] = [
    "mode",
    "N",
    "M",
    "K",
    "gamma_s",
    "gamma_sp",
    "Qp",
    "mean_capacity",
    "stderr",
    "trials",
    "seed",
    "gamma_p",
    "gamma_ps",
    "log_base",
    "flagged",
    "gain_vs_single_user",
    "capacity_per_log_n",
    "capacity_per_log_log_n",
    "status",
];

/// First field of the trailer row written after a sweep with failed points.
pub const PARTIAL_MARKER: &str = "#partial";

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub struct SweepWriter<W: Write> {
    inner: csv::Writer<W>,
    failed: usize,
    total: usize,
}

impl<W: Write> SweepWriter<W> {
    pub fn new(out: W) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new().flexible(true).from_writer(out);
        inner.write_record(SWEEP_HEADER)?;
        Ok(Self {
            inner,
            failed: 0,
            total: 0,
        })
    }

    pub fn write_point(&mut self, point: &SweepPoint<f64>) -> csv::Result<()> {
        let c = &point.config;
        let log_base = match c.log_base {
            cogbeam::simulator::LogBase::Nats => "nats",
            cogbeam::simulator::LogBase::Bits => "bits",
        };
        let (mean, stderr, flagged, status) = match &point.estimate {
            Ok(e) => (float(e.mean), float(e.stderr), e.flagged.to_string(), "ok".to_string()),
            Err(err) => {
                self.failed += 1;
                (String::new(), String::new(), String::new(), format!("error: {err}"))
            }
        };
        self.total += 1;
        let n = &point.normalized;
        self.inner.write_record([
            c.mode.as_str().to_string(),
            c.n_users.to_string(),
            c.m_patterns.to_string(),
            float(c.k_factor),
            float(c.mean_secondary_power),
            float(c.mean_interference_power),
            float(c.peak_interference),
            mean,
            stderr,
            c.trials.to_string(),
            c.seed.to_string(),
            float(c.primary_power),
            float(c.mean_ps_power),
            log_base.to_string(),
            flagged,
            opt(n.gain_vs_single_user),
            opt(n.per_log_n),
            opt(n.per_log_log_n),
            status,
        ])
    }

    /// Writes the trailer row if any point failed; returns the failure count.
    pub fn finish(mut self) -> csv::Result<usize> {
        if self.failed > 0 {
            self.inner.write_record([
                PARTIAL_MARKER.to_string(),
                format!("failed={}/{}", self.failed, self.total),
            ])?;
        }
        self.inner.flush()?;
        Ok(self.failed)
    }
}

pub fn write_checks<W: Write>(out: W, reports: &[CheckReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "pass", "metric", "tolerance", "detail"])?;
    for r in reports {
        w.write_record([
            r.name.to_string(),
            r.pass.to_string(),
            float(r.metric),
            float(r.tolerance),
            r.detail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
