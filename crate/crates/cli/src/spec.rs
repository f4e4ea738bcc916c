//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use mismatch_bounds::constellation::{Constellation, Modulation};
use mismatch_bounds::exponent::Integrator;
use mismatch_bounds::frame::FrameConfig;
use mismatch_bounds::tradeoff::{Averaging, BoundKind, BoundSettings, SearchBracket};

/// Every field is optional; flags win over the config file, then defaults
/// apply.
#[derive(Debug, Clone, Default, Args, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Constellation: bpsk or 16qam.
    #[arg(long)]
    pub modulation: Option<Modulation>,
    /// Frame length N in channel symbols.
    #[arg(long)]
    pub total: Option<usize>,
    /// Information bits k (default 256 for BPSK, 1024 for 16-QAM).
    #[arg(long)]
    pub info_bits: Option<usize>,
    /// Preamble length m; absent or 0 means perfect CSI.
    #[arg(long)]
    pub preamble: Option<usize>,
    /// First Eb/N0 of the grid in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_start: Option<f64>,
    /// Last Eb/N0 of the grid in dB (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    pub snr_stop: Option<f64>,
    /// Grid step in dB.
    #[arg(long)]
    pub snr_step: Option<f64>,
    /// Bound for the trade-off sweep: grcb, spb or both.
    #[arg(long)]
    pub bound: Option<String>,
    /// Target block error probability.
    #[arg(long)]
    pub target_pb: Option<f64>,
    /// Preamble lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count (estimates, or frames for LDPC runs).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Averaging back end: quadrature, grid, mc or is.
    #[arg(long)]
    pub averaging: Option<String>,
    /// Gauss-Hermite order per real dimension.
    #[arg(long)]
    pub gh_order: Option<usize>,
    /// Estimate-grid spacing in standard deviations.
    #[arg(long)]
    pub grid_spacing: Option<f64>,
    /// Estimate-grid radius in standard deviations.
    #[arg(long)]
    pub grid_radius: Option<f64>,
    /// Importance-sampling variance widening factor.
    #[arg(long)]
    pub widening: Option<f64>,
    /// LDPC: block errors to collect per point.
    #[arg(long)]
    pub target_errors: Option<u64>,
    /// Also emit the normal approximation.
    #[arg(long)]
    #[serde(default)]
    pub normal_approx: bool,
    /// LDPC: step the SNR to locate the target crossing instead of sweeping
    /// the grid.
    #[arg(long)]
    #[serde(default)]
    pub search: bool,
    /// LDPC: read the code from this alist file.
    #[arg(long)]
    pub code_in: Option<PathBuf>,
    /// LDPC: write the code to this alist file (sidecar at `<path>.json`).
    #[arg(long)]
    pub code_out: Option<PathBuf>,
    /// Output CSV path; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl RunSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `self` take precedence over `base`.
    pub fn over(self, base: RunSpec) -> RunSpec {
        RunSpec {
            modulation: self.modulation.or(base.modulation),
            total: self.total.or(base.total),
            info_bits: self.info_bits.or(base.info_bits),
            preamble: self.preamble.or(base.preamble),
            snr_start: self.snr_start.or(base.snr_start),
            snr_stop: self.snr_stop.or(base.snr_stop),
            snr_step: self.snr_step.or(base.snr_step),
            bound: self.bound.or(base.bound),
            target_pb: self.target_pb.or(base.target_pb),
            m_list: self.m_list.or(base.m_list),
            seed: self.seed.or(base.seed),
            samples: self.samples.or(base.samples),
            averaging: self.averaging.or(base.averaging),
            gh_order: self.gh_order.or(base.gh_order),
            grid_spacing: self.grid_spacing.or(base.grid_spacing),
            grid_radius: self.grid_radius.or(base.grid_radius),
            widening: self.widening.or(base.widening),
            target_errors: self.target_errors.or(base.target_errors),
            normal_approx: self.normal_approx || base.normal_approx,
            search: self.search || base.search,
            code_in: self.code_in.or(base.code_in),
            code_out: self.code_out.or(base.code_out),
            output: self.output.or(base.output),
        }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation.unwrap_or(Modulation::Bpsk)
    }

    pub fn constellation(&self) -> Constellation {
        match self.modulation() {
            Modulation::Bpsk => Constellation::bpsk(),
            Modulation::Qam16 => Constellation::qam16(),
        }
    }

    /// Frame at preamble `m` (the configured preamble when `None`).
    pub fn frame(&self, m: Option<usize>) -> Result<FrameConfig> {
        let c = self.constellation();
        let k = self.info_bits.unwrap_or(match self.modulation() {
            Modulation::Bpsk => 256,
            Modulation::Qam16 => 1024,
        });
        let m = m.or(self.preamble).unwrap_or(0);
        Ok(FrameConfig::new(self.total.unwrap_or(512), m, k, c.bits_per_symbol())?)
    }

    pub fn snr_grid(&self) -> Result<Vec<f64>> {
        let (a, b, h) = (self.snr_start.unwrap_or(0.0), self.snr_stop.unwrap_or(6.0), self.snr_step.unwrap_or(0.25));
        if !(h > 0.0) {
            bail!("grid step must be positive, got {h}");
        }
        if b < a {
            return Ok(Vec::new());
        }
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| a + i as f64 * h).collect())
    }

    pub fn m_list(&self) -> Vec<usize> {
        self.m_list.clone().unwrap_or_else(|| vec![8, 12, 16, 20, 24, 28, 32, 36, 40, 45, 48, 56, 64])
    }

    pub fn target_pb(&self) -> f64 {
        self.target_pb.unwrap_or(1e-3)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn bound_kinds(&self) -> Result<Vec<BoundKind>> {
        match self.bound.as_deref().unwrap_or("grcb") {
            "both" => Ok(vec![BoundKind::Grcb, BoundKind::Spb]),
            s => Ok(vec![s.parse()?]),
        }
    }

    pub fn averaging(&self, c: &Constellation) -> Result<Averaging> {
        let samples = self.samples.unwrap_or(2000);
        Ok(match self.averaging.as_deref() {
            None => match Averaging::default_for(c) {
                Averaging::EstimateGrid { spacing, radius } => Averaging::EstimateGrid {
                    spacing: self.grid_spacing.unwrap_or(spacing),
                    radius: self.grid_radius.unwrap_or(radius),
                },
                other => other,
            },
            Some("quadrature") => Averaging::PhaseQuadrature { points: 2001 },
            Some("grid") => Averaging::EstimateGrid {
                spacing: self.grid_spacing.unwrap_or(0.5),
                radius: self.grid_radius.unwrap_or(5.5),
            },
            Some("mc") => Averaging::MonteCarlo { samples, seed: self.seed() },
            Some("is") => Averaging::ImportanceSampling { samples, seed: self.seed(), widening: self.widening.unwrap_or(3.0) },
            Some(other) => bail!("unknown averaging back end '{other}' (quadrature, grid, mc, is)"),
        })
    }

    pub fn settings(&self, kind: BoundKind) -> Result<BoundSettings> {
        let c = self.constellation();
        let integrator = match self.gh_order {
            Some(order) => Integrator::GaussHermite { order },
            None => Integrator::default_for(&c),
        };
        let averaging = self.averaging(&c)?;
        Ok(BoundSettings::new(c, kind).with_integrator(integrator).with_averaging(averaging))
    }

    pub fn bracket(&self) -> SearchBracket {
        SearchBracket::default()
    }
}
