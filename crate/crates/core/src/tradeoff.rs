//! Averaging per-estimate bounds over the random channel estimate, the
//! minimum-SNR search and the preamble-length sweep.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::bpsk;
use crate::constellation::Constellation;
use crate::converse::{spb_phase, SpherePacking};
use crate::exponent::{maximize_exponent, maximize_newton, Evaluator, ExponentQuery, Integrator, Metric, WarmStart};
use crate::frame::{ebn0_to_sigma2, sample_estimate, ChannelEstimate, FrameConfig};
use crate::par::{neumaier_sum, Exec};
use crate::special::q_function;
use crate::{rng, Complex, Error, Result};

/// Which per-estimate bound is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Grcb,
    Spb,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Grcb => "grcb",
            BoundKind::Spb => "spb",
        })
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "grcb" => Ok(BoundKind::Grcb),
            "spb" => Ok(BoundKind::Spb),
            other => Err(Error::InvalidParameter(format!("unknown bound '{other}'"))),
        }
    }
}

/// Back end for the expectation over `ĥ = 1 - Δ`, `Δ ~ CN(0, 2σ²/m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Averaging {
    /// Trapezoid rule against the exact phase density of `ĥ` (BPSK only).
    PhaseQuadrature { points: usize },
    /// Trapezoid rule on a square grid over the estimation error in units of
    /// its per-dimension standard deviation, truncated to a disc.
    EstimateGrid { spacing: f64, radius: f64 },
    /// Monte Carlo over `samples` estimates; sample `i` uses stream `i`.
    MonteCarlo { samples: usize, seed: u64 },
    /// Monte Carlo with the estimation error drawn at `widening` times its
    /// variance and reweighted by the density ratio. Reaches the tail
    /// estimates that dominate the average far more often than plain
    /// sampling.
    ImportanceSampling { samples: usize, seed: u64, widening: f64 },
}

impl Averaging {
    /// Phase quadrature with 2001 points for BPSK, the estimate grid
    /// otherwise.
    pub fn default_for(constellation: &Constellation) -> Self {
        if constellation.is_bpsk() {
            Averaging::PhaseQuadrature { points: 2001 }
        } else {
            Averaging::EstimateGrid { spacing: 0.5, radius: 5.5 }
        }
    }
}

/// Everything besides the frame and SNR that determines a bound curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSettings {
    pub constellation: Constellation,
    pub kind: BoundKind,
    pub averaging: Averaging,
    pub integrator: Integrator,
    pub exec: Exec,
}

impl BoundSettings {
    pub fn new(constellation: Constellation, kind: BoundKind) -> Self {
        Self {
            averaging: Averaging::default_for(&constellation),
            integrator: Integrator::default_for(&constellation),
            constellation,
            kind,
            exec: Exec::default(),
        }
    }

    pub fn with_averaging(mut self, averaging: Averaging) -> Self {
        self.averaging = averaging;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn check(&self, frame: &FrameConfig) -> Result<()> {
        if self.kind == BoundKind::Spb && !self.constellation.is_bpsk() {
            return Err(Error::Unsupported("the sphere-packing bound is only applied to BPSK".into()));
        }
        if frame.bits_per_symbol != self.constellation.bits_per_symbol() {
            return Err(Error::InvalidFrame("frame and constellation disagree on bits per symbol".into()));
        }
        match self.averaging {
            Averaging::PhaseQuadrature { points } if points < 3 => {
                Err(Error::InvalidParameter("phase quadrature needs at least 3 points".into()))
            }
            Averaging::PhaseQuadrature { .. } if !self.constellation.is_bpsk() => {
                Err(Error::Unsupported("phase quadrature requires BPSK".into()))
            }
            Averaging::MonteCarlo { samples, .. } | Averaging::ImportanceSampling { samples, .. } if samples < 1000 => {
                Err(Error::InvalidParameter(format!("at least 1000 estimate samples required, got {samples}")))
            }
            Averaging::ImportanceSampling { widening, .. } if !(widening >= 1.0) => {
                Err(Error::InvalidParameter(format!("widening must be at least 1, got {widening}")))
            }
            Averaging::EstimateGrid { spacing, radius } if !(spacing > 0.0 && radius > spacing) => {
                Err(Error::InvalidParameter("estimate grid needs 0 < spacing < radius".into()))
            }
            _ => Ok(()),
        }
    }
}

/// One averaged-bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedBoundQuery {
    pub frame: FrameConfig,
    pub ebn0_db: f64,
    pub settings: BoundSettings,
}

/// A probability with its Monte Carlo standard error (zero for quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedBound {
    pub value: f64,
    pub std_error: f64,
}

/// Density of `arg(ĥ)` for `ĥ ~ CN(1, 2v)` (variance `v` per dimension),
/// with `γ = 1/(2v)`.
pub fn phase_density(theta: f64, gamma: f64) -> f64 {
    let c = theta.cos();
    let sg = gamma.sqrt();
    (-gamma).exp() / (2.0 * PI)
        + 0.5 * (gamma / PI).sqrt() * c * (-gamma * theta.sin().powi(2)).exp() * erfc(-sg * c)
}

/// Per-estimate bound with perfect CSI (no preamble): the matched bound at
/// code length `n = N`.
pub fn perfect_csi_bound(frame: &FrameConfig, ebn0_db: f64, settings: &BoundSettings) -> Result<f64> {
    settings.check(frame)?;
    let sigma2 = ebn0_to_sigma2(ebn0_db, frame.rate())?;
    match settings.kind {
        BoundKind::Grcb => {
            let q = ExponentQuery::matched(settings.constellation.clone(), sigma2, frame.symbol_rate(), frame.data_len)
                .with_integrator(settings.integrator);
            Ok(maximize_exponent(&q)?.p_bar)
        }
        BoundKind::Spb => {
            let sp = SpherePacking::new(frame.data_len, frame.info_bits as f64 * LN_2)?;
            Ok(sp.error_probability(1.0 / sigma2))
        }
    }
}

/// Per-estimate bound evaluator shared by all back ends.
struct PerEstimate<'a> {
    settings: &'a BoundSettings,
    frame: &'a FrameConfig,
    sigma2: f64,
    sphere: Option<SpherePacking>,
    warm: Option<WarmStart>,
}

impl<'a> PerEstimate<'a> {
    fn new(frame: &'a FrameConfig, sigma2: f64, settings: &'a BoundSettings) -> Result<Self> {
        let sphere = match settings.kind {
            BoundKind::Spb => Some(SpherePacking::new(frame.data_len, frame.info_bits as f64 * LN_2)?),
            BoundKind::Grcb => None,
        };
        let mut me = Self { settings, frame, sigma2, sphere, warm: None };
        if !settings.constellation.is_bpsk() {
            // start every Newton search from the matched optimum
            let r = me.full(ChannelEstimate::exact(Complex::new(1.0, 0.0)), None)?;
            me.warm = Some(r.1);
        }
        Ok(me)
    }

    fn gh_order(&self) -> usize {
        match self.settings.integrator {
            Integrator::GaussHermite { order } => order,
            Integrator::MonteCarlo { .. } => 64,
        }
    }

    fn phase(&self, theta: f64) -> Result<f64> {
        match &self.sphere {
            Some(sp) => Ok(spb_phase(sp, self.sigma2, theta)),
            None => bpsk::grcb_phase(self.sigma2, theta, self.frame.symbol_rate(), self.frame.data_len, self.gh_order()),
        }
    }

    fn full(&self, est: ChannelEstimate, warm: Option<WarmStart>) -> Result<(f64, WarmStart)> {
        let ev = Evaluator::full(
            &self.settings.constellation,
            self.sigma2,
            Complex::new(1.0, 0.0),
            Metric::Mismatched(est),
            self.settings.integrator,
        )?;
        let r = maximize_newton(&ev, self.frame.symbol_rate(), self.frame.data_len, warm)?;
        let rho = if r.rho_star > 0.0 { r.rho_star } else { 0.5 };
        Ok((r.p_bar, WarmStart { rho, s: r.s_star }))
    }

    fn at(&self, est: ChannelEstimate) -> Result<f64> {
        if self.settings.constellation.is_bpsk() {
            self.phase(est.theta())
        } else {
            Ok(self.full(est, self.warm)?.0)
        }
    }
}

/// `E[P̄(ĥ)]` over the ML estimate from `m` pilots.
pub fn averaged_bound(q: &AveragedBoundQuery) -> Result<AveragedBound> {
    let AveragedBoundQuery { frame, ebn0_db, settings } = q;
    settings.check(frame)?;
    if frame.preamble == 0 {
        return Err(Error::EmptyPreamble);
    }
    let m = frame.preamble;
    let sigma2 = ebn0_to_sigma2(*ebn0_db, frame.rate())?;
    let per = PerEstimate::new(frame, sigma2, settings)?;
    let exec = settings.exec;
    match settings.averaging {
        Averaging::PhaseQuadrature { points } => {
            let gamma = m as f64 / (2.0 * sigma2);
            // truncate where the density is below e^-50 of its peak
            let half = (10.0 / (2.0 * gamma).sqrt()).min(FRAC_PI_2);
            let step = 2.0 * half / (points - 1) as f64;
            let mid = points / 2;
            // symmetric in θ: evaluate the non-negative half
            let halves = points - mid;
            let vals = exec.map(halves, |i| -> Result<f64> {
                let theta = (i as f64 * step).min(half);
                let w = if i == halves - 1 { 0.5 } else { 1.0 } * if i == 0 { 1.0 } else { 2.0 };
                Ok(w * step * phase_density(theta, gamma) * per.phase(theta)?)
            });
            let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
            // Re ĥ < 0 has probability Q(sqrt(2γ)) and contributes bound 1
            let tail = q_function((2.0 * gamma).sqrt());
            Ok(AveragedBound { value: (neumaier_sum(vals) + tail).min(1.0), std_error: 0.0 })
        }
        Averaging::EstimateGrid { spacing, radius } => {
            let sd = (sigma2 / m as f64).sqrt();
            let steps = (radius / spacing).floor() as i64;
            let mut nodes = Vec::new();
            for a in -steps..=steps {
                // conjugate symmetry of the constellations: b >= 0 only
                for b in 0..=steps {
                    let (u, v) = (a as f64 * spacing, b as f64 * spacing);
                    if u * u + v * v > radius * radius {
                        continue;
                    }
                    let w = spacing * spacing * (-(u * u + v * v) / 2.0).exp() / (2.0 * PI) * if b == 0 { 1.0 } else { 2.0 };
                    nodes.push((Complex::new(1.0 - sd * u, -sd * v), w));
                }
            }
            let vals = exec.map_slice(&nodes, |&(hh, w)| -> Result<(f64, f64)> {
                Ok((w * per.at(ChannelEstimate::new(hh))?, w))
            });
            let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
            let mass = neumaier_sum(vals.iter().map(|v| v.1));
            let value = neumaier_sum(vals.iter().map(|v| v.0)) + (1.0 - mass).max(0.0);
            Ok(AveragedBound { value: value.min(1.0), std_error: 0.0 })
        }
        Averaging::MonteCarlo { samples, seed } => {
            let vals = exec.map(samples, |i| -> Result<f64> {
                let mut r = rng::stream(seed, i as u64);
                per.at(sample_estimate(Complex::new(1.0, 0.0), sigma2, m, &mut r)?)
            });
            sample_mean(vals)
        }
        Averaging::ImportanceSampling { samples, seed, widening } => {
            let sd = (sigma2 / m as f64).sqrt();
            let vals = exec.map(samples, |i| -> Result<f64> {
                let mut r = rng::stream(seed, i as u64);
                let z = rng::complex_normal(&mut r, widening);
                let w = widening * (-0.5 * z.norm_sqr() * (1.0 - 1.0 / widening)).exp();
                Ok(w * per.at(ChannelEstimate::new(Complex::new(1.0, 0.0) - z * sd))?)
            });
            sample_mean(vals)
        }
    }
}

fn sample_mean(vals: Vec<Result<f64>>) -> Result<AveragedBound> {
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let n = vals.len() as f64;
    let mean = neumaier_sum(vals.iter().copied()) / n;
    let var = neumaier_sum(vals.iter().map(|v| (v - mean).powi(2))) / (n - 1.0);
    Ok(AveragedBound { value: mean, std_error: (var / n).sqrt() })
}

/// Bound for a frame: the matched bound when `m = 0`, the averaged bound
/// otherwise.
pub fn frame_bound(frame: &FrameConfig, ebn0_db: f64, settings: &BoundSettings) -> Result<AveragedBound> {
    if frame.perfect_csi() {
        Ok(AveragedBound { value: perfect_csi_bound(frame, ebn0_db, settings)?, std_error: 0.0 })
    } else {
        averaged_bound(&AveragedBoundQuery { frame: *frame, ebn0_db, settings: settings.clone() })
    }
}

/// Minimum Eb/N0 reaching a target error probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub m: usize,
    pub ebn0_star_db: f64,
    pub target_pb: f64,
    pub bound_kind: BoundKind,
    /// Monte Carlo error of the bound propagated through the local slope.
    pub stderr_db: f64,
    /// Slope of `log10 P` against Eb/N0 across the final search bracket.
    pub slope_decades_per_db: f64,
}

/// Search bracket and resolution of the minimum-SNR search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBracket {
    pub lo_db: f64,
    pub hi_db: f64,
    pub resolution_db: f64,
}

impl Default for SearchBracket {
    fn default() -> Self {
        Self { lo_db: -2.0, hi_db: 14.0, resolution_db: 0.02 }
    }
}

/// Illinois-accelerated bisection on Eb/N0 for `log10 P(Eb/N0) = log10
/// target`. The bound is nonincreasing in SNR.
pub fn min_snr_for_target(
    frame: &FrameConfig,
    settings: &BoundSettings,
    target_pb: f64,
    bracket: SearchBracket,
) -> Result<TradeoffPoint> {
    if !(target_pb > 0.0 && target_pb < 1.0) {
        return Err(Error::InvalidParameter(format!("target probability must lie in (0, 1), got {target_pb}")));
    }
    if !(bracket.hi_db > bracket.lo_db && bracket.resolution_db > 0.0) {
        return Err(Error::InvalidParameter("search bracket must satisfy lo < hi and resolution > 0".into()));
    }
    let lt = target_pb.log10();
    let eval = |x: f64| -> Result<(f64, AveragedBound)> {
        let b = frame_bound(frame, x, settings)?;
        Ok((b.value.max(1e-300).log10() - lt, b))
    };
    let (mut lo, mut hi) = (bracket.lo_db, bracket.hi_db);
    let (mut flo, _) = eval(lo)?;
    let (mut fhi, mut bhi) = eval(hi)?;
    if !(flo > 0.0 && fhi <= 0.0) {
        return Err(Error::TargetNotBracketed { target: target_pb, lo: bracket.lo_db, hi: bracket.hi_db });
    }
    // Illinois weights on the stale endpoint
    let (mut wlo, mut whi) = (1.0, 1.0);
    let mut side = 0i8;
    let mut iters = 0;
    let mut exact = None;
    while hi - lo > bracket.resolution_db {
        iters += 1;
        if iters > 200 {
            return Err(Error::NotConverged { what: "minimum-SNR search", iterations: iters });
        }
        let width = hi - lo;
        let (a, b) = (flo * wlo, fhi * whi);
        let secant = hi - b * (hi - lo) / (b - a);
        let x = if secant.is_finite() && secant > lo + 0.02 * width && secant < hi - 0.02 * width {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let (fx, bx) = eval(x)?;
        if fx.abs() < 1e-6 {
            exact = Some((x, bx));
            break;
        }
        if fx > 0.0 {
            lo = x;
            flo = fx;
            wlo = 1.0;
            if side == 1 {
                whi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            fhi = fx;
            bhi = bx;
            whi = 1.0;
            if side == -1 {
                wlo *= 0.5;
            }
            side = -1;
        }
        // fall back to a midpoint step when the bracket barely shrank
        if hi - lo > 0.6 * width {
            let x = 0.5 * (lo + hi);
            let (fx, bx) = eval(x)?;
            if fx > 0.0 {
                lo = x;
                flo = fx;
            } else {
                hi = x;
                fhi = fx;
                bhi = bx;
            }
            wlo = 1.0;
            whi = 1.0;
            side = 0;
        }
    }
    let slope = (fhi - flo) / (hi - lo);
    let (star, at_star) = match exact {
        Some(e) => e,
        // linear interpolation of log10 P inside the final bracket
        None => (lo + (flo / (flo - fhi)).clamp(0.0, 1.0) * (hi - lo), bhi),
    };
    let stderr_db = stderr_in_db(at_star, slope);
    Ok(TradeoffPoint {
        m: frame.preamble,
        ebn0_star_db: star,
        target_pb,
        bound_kind: settings.kind,
        stderr_db,
        slope_decades_per_db: slope,
    })
}

/// Standard error of a bound value converted to dB through the local slope
/// of `log10 P` against Eb/N0.
pub fn stderr_in_db(bound: AveragedBound, slope_decades_per_db: f64) -> f64 {
    if bound.std_error == 0.0 {
        return 0.0;
    }
    bound.std_error / (bound.value * std::f64::consts::LN_10) / slope_decades_per_db.abs().max(1e-12)
}

/// Monte Carlo re-evaluation of a trade-off point: the averaged bound at
/// the point's Eb/N0 from random estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloCheck {
    pub ebn0_db: f64,
    pub value: f64,
    pub std_error: f64,
    pub stderr_db: f64,
}

pub fn monte_carlo_check(
    frame: &FrameConfig,
    settings: &BoundSettings,
    point: &TradeoffPoint,
    averaging: Averaging,
) -> Result<MonteCarloCheck> {
    if !matches!(averaging, Averaging::MonteCarlo { .. } | Averaging::ImportanceSampling { .. }) {
        return Err(Error::InvalidParameter("a Monte Carlo check needs a sampling back end".into()));
    }
    let s = settings.clone().with_averaging(averaging);
    let b = averaged_bound(&AveragedBoundQuery { frame: *frame, ebn0_db: point.ebn0_star_db, settings: s })?;
    Ok(MonteCarloCheck {
        ebn0_db: point.ebn0_star_db,
        value: b.value,
        std_error: b.std_error,
        stderr_db: stderr_in_db(b, point.slope_decades_per_db),
    })
}

/// Outcome of one preamble length in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepEntry {
    Point(TradeoffPoint),
    /// The frame is infeasible or the target is not reached in the bracket.
    Skipped { m: usize, reason: String },
}

/// Minimum SNR for every preamble length in `m_list`. Each search first
/// tries a narrow bracket around the previous result.
pub fn preamble_sweep(
    template: &FrameConfig,
    settings: &BoundSettings,
    target_pb: f64,
    m_list: &[usize],
    bracket: SearchBracket,
) -> Vec<SweepEntry> {
    let mut prev: Option<f64> = None;
    let mut out = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let frame = match template.with_preamble(m) {
            Ok(f) => f,
            Err(e) => {
                out.push(SweepEntry::Skipped { m, reason: e.to_string() });
                continue;
            }
        };
        let narrow = prev.map(|p| SearchBracket {
            lo_db: (p - 1.0).max(bracket.lo_db),
            hi_db: (p + 1.5).min(bracket.hi_db),
            ..bracket
        });
        let attempt = match narrow {
            Some(b) => match min_snr_for_target(&frame, settings, target_pb, b) {
                Err(Error::TargetNotBracketed { .. }) => min_snr_for_target(&frame, settings, target_pb, bracket),
                other => other,
            },
            None => min_snr_for_target(&frame, settings, target_pb, bracket),
        };
        match attempt {
            Ok(p) => {
                prev = Some(p.ebn0_star_db);
                out.push(SweepEntry::Point(p));
            }
            Err(e) => out.push(SweepEntry::Skipped { m, reason: e.to_string() }),
        }
    }
    out
}
