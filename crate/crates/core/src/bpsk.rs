//! BPSK phase reduction.
//!
//! With BPSK the mismatched log-metric ratio is a positive multiple of the
//! matched one whenever `cos θ > 0`, so after optimizing over `s` the
//! mismatched random-coding exponent equals the matched bi-AWGN exponent at
//! the degraded SNR `Eb/N0 + 10 log10 cos²θ`. For `|θ| >= π/2` the error
//! probability is taken to be one.

use std::f64::consts::FRAC_PI_2;

use crate::exponent::{maximize_exponent, ExponentQuery, Integrator};
use crate::frame::{ebn0_to_sigma2, ChannelEstimate, FrameConfig};
use crate::constellation::Constellation;
use crate::{Complex, Result};

/// The SNR penalty caused by a phase error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReduction {
    pub theta: f64,
    /// `10 log10 cos²θ`, `-inf` when invalid.
    pub snr_penalty_db: f64,
    pub valid: bool,
}

impl PhaseReduction {
    pub fn new(theta: f64) -> Self {
        let valid = phase_is_valid(theta);
        let snr_penalty_db = if valid { 10.0 * theta.cos().powi(2).log10() } else { f64::NEG_INFINITY };
        Self { theta, snr_penalty_db, valid }
    }
}

/// `|θ| < π/2`.
pub fn phase_is_valid(theta: f64) -> bool {
    theta.abs() < FRAC_PI_2
}

/// Phase of the estimate relative to the true gain, `arg(ĥ h*)`.
pub fn relative_phase(h: Complex, estimate: ChannelEstimate) -> f64 {
    (estimate.h_hat * h.conj()).arg()
}

/// `L(y, ĥ) = (2/σ²) Re{y ĥ*}`.
pub fn log_metric_ratio(y: Complex, estimate: ChannelEstimate, sigma2: f64) -> f64 {
    2.0 / sigma2 * (y * estimate.h_hat.conj()).re
}

/// `Eb/N0 + 10 log10 cos²θ`, or `None` when `|θ| >= π/2`.
pub fn degraded_snr(ebn0_db: f64, theta: f64) -> Option<f64> {
    let r = PhaseReduction::new(theta);
    r.valid.then(|| ebn0_db + r.snr_penalty_db)
}

/// Matched bi-AWGN random-coding bound at noise variance `sigma2 / cos²θ`.
pub fn grcb_phase(sigma2: f64, theta: f64, code_rate: f64, n: usize, order: usize) -> Result<f64> {
    if !phase_is_valid(theta) {
        return Ok(1.0);
    }
    let c2 = theta.cos().powi(2);
    let q = ExponentQuery::matched(Constellation::bpsk(), sigma2 / c2, code_rate, n)
        .with_integrator(Integrator::GaussHermite { order });
    Ok(maximize_exponent(&q)?.p_bar)
}

/// Mismatched BPSK random-coding bound for a frame at `ebn0_db` (overall
/// rate convention) and estimate phase error `theta`.
pub fn grcb_bpsk_mismatched(frame: &FrameConfig, ebn0_db: f64, theta: f64) -> Result<f64> {
    let sigma2 = ebn0_to_sigma2(ebn0_db, frame.rate())?;
    grcb_phase(sigma2, theta, frame.symbol_rate(), frame.data_len, 64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{e0_mismatched, Evaluator, Metric};
    use crate::frame::ebn0_to_sigma2;
    use std::f64::consts::PI;

    #[test]
    fn log_metric_ratio_examples() {
        let one = ChannelEstimate::exact(Complex::new(1.0, 0.0));
        assert_eq!(log_metric_ratio(Complex::new(1.0, 0.0), one, 0.5), 4.0);
        assert_eq!(log_metric_ratio(Complex::new(0.0, 1.0), one, 0.5), 0.0);
        let i = ChannelEstimate::exact(Complex::new(0.0, 1.0));
        assert!((log_metric_ratio(Complex::new(0.0, 1.0), i, 0.5) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn degraded_snr_examples() {
        assert_eq!(degraded_snr(3.0, 0.0), Some(3.0));
        let d = degraded_snr(3.0, PI / 3.0).unwrap();
        assert!((d - (3.0 + 10.0 * 0.25f64.log10())).abs() < 1e-12);
        assert!((d - 3.0 + 6.0206).abs() < 1e-4);
        assert_eq!(degraded_snr(3.0, 2.0 * PI / 3.0), None);
        assert_eq!(degraded_snr(3.0, PI / 2.0), None);
        assert_eq!(degraded_snr(3.0, -PI / 2.0), None);
        let r = PhaseReduction::new(0.3);
        assert!(r.valid && r.snr_penalty_db < 0.0);
    }

    #[test]
    fn theta_zero_equals_matched_and_right_angle_is_one() {
        let f = FrameConfig::new(512, 16, 256, 1).unwrap();
        let s2 = ebn0_to_sigma2(3.0, f.rate()).unwrap();
        let matched = maximize_exponent(&ExponentQuery::matched(Constellation::bpsk(), s2, f.symbol_rate(), f.data_len))
            .unwrap()
            .p_bar;
        assert_eq!(grcb_bpsk_mismatched(&f, 3.0, 0.0).unwrap(), matched);
        assert_eq!(grcb_bpsk_mismatched(&f, 3.0, PI / 2.0).unwrap(), 1.0);
        assert_eq!(grcb_bpsk_mismatched(&f, 3.0, 2.5).unwrap(), 1.0);
    }

    #[test]
    fn monotone_in_phase_error() {
        let f = FrameConfig::new(512, 16, 256, 1).unwrap();
        let mut prev = 0.0;
        for i in 0..=30 {
            let th = i as f64 * (PI / 2.0) / 30.0;
            let p = grcb_bpsk_mismatched(&f, 3.0, th).unwrap();
            assert!(p >= prev, "theta={th}");
            prev = p;
        }
        let near = grcb_bpsk_mismatched(&f, 3.0, PI / 2.0 - 1e-6).unwrap();
        assert_eq!(near, 1.0);
    }

    #[test]
    fn pi_over_four_matches_full_evaluator() {
        // sup_s of the full complex evaluator at θ = π/4 equals the matched
        // exponent at half the SNR
        let s2 = 0.5;
        let c = Constellation::bpsk();
        let est = ChannelEstimate::from_polar(1.0, PI / 4.0);
        let full = Evaluator::full(&c, s2, Complex::new(1.0, 0.0), Metric::Mismatched(est), Integrator::GaussHermite { order: 64 })
            .unwrap();
        for &rho in &[0.3, 0.8] {
            let (_, sup) = full.sup_over_s(rho).unwrap();
            let reduced = Evaluator::bpsk_matched(1.0, 2.0 * s2, 64).unwrap().e0(1.0 / (1.0 + rho), rho).value;
            assert!((sup - reduced).abs() < 1e-4, "rho={rho}: {sup} vs {reduced}");
            let direct = e0_mismatched(&c, s2, Complex::new(1.0, 0.0), est, (PI / 4.0).cos() / (1.0 + rho), rho, Integrator::GaussHermite { order: 64 })
                .unwrap()
                .value;
            assert!((direct - reduced).abs() < 1e-10);
        }
    }
}
