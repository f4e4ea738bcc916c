//! Frame geometry, SNR accounting, the channel law and the pilot-based
//! ML channel estimator.
//!
//! Noise variance `sigma2` is always per real dimension: the complex noise
//! sample has total variance `2 * sigma2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{rng, Complex, Error, Result};

/// Frame of `total` channel uses split into a preamble of `preamble` pilot
/// symbols and a data field of `data_len = total - preamble` symbols that
/// carries `info_bits` information bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub total: usize,
    pub preamble: usize,
    pub info_bits: usize,
    pub bits_per_symbol: u32,
    pub data_len: usize,
}

impl FrameConfig {
    pub fn new(total: usize, preamble: usize, info_bits: usize, bits_per_symbol: u32) -> Result<Self> {
        if preamble >= total {
            return Err(Error::InvalidFrame(format!(
                "preamble m = {preamble} leaves no data symbols in N = {total}"
            )));
        }
        if info_bits == 0 {
            return Err(Error::InvalidFrame("k must be at least 1".into()));
        }
        if bits_per_symbol == 0 {
            return Err(Error::InvalidFrame("bits per symbol must be at least 1".into()));
        }
        let data_len = total - preamble;
        if info_bits > data_len * bits_per_symbol as usize {
            return Err(Error::InvalidFrame(format!(
                "k = {info_bits} exceeds the {} code bits of the data field (code rate above 1)",
                data_len * bits_per_symbol as usize
            )));
        }
        Ok(Self { total, preamble, info_bits, bits_per_symbol, data_len })
    }

    /// Same frame with another preamble length.
    pub fn with_preamble(&self, preamble: usize) -> Result<Self> {
        Self::new(self.total, preamble, self.info_bits, self.bits_per_symbol)
    }

    /// Overall rate `k / N` in bits per channel use.
    pub fn rate(&self) -> f64 {
        self.info_bits as f64 / self.total as f64
    }

    /// Rate of the code in bits per data symbol, `k / n`. This is the rate
    /// entering the random-coding exponent.
    pub fn symbol_rate(&self) -> f64 {
        self.info_bits as f64 / self.data_len as f64
    }

    /// Binary code rate `k / (n * bits_per_symbol)`.
    pub fn code_rate(&self) -> f64 {
        self.symbol_rate() / self.bits_per_symbol as f64
    }

    /// Binary code length `n * bits_per_symbol`.
    pub fn code_bits(&self) -> usize {
        self.data_len * self.bits_per_symbol as usize
    }

    pub fn perfect_csi(&self) -> bool {
        self.preamble == 0
    }
}

/// An operating point: the noise variance per real dimension and the
/// matching Eb/N0 under the overall rate `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub sigma2: f64,
    pub ebn0_db: f64,
    pub rate: f64,
}

impl SnrPoint {
    pub fn from_ebn0_db(ebn0_db: f64, rate: f64) -> Result<Self> {
        Ok(Self { sigma2: ebn0_to_sigma2(ebn0_db, rate)?, ebn0_db, rate })
    }

    pub fn from_sigma2(sigma2: f64, rate: f64) -> Result<Self> {
        Ok(Self { sigma2, ebn0_db: sigma2_to_ebn0(sigma2, rate)?, rate })
    }

    /// Per-symbol SNR `1 / (2 sigma2)` with unit-power inputs and `|h| = 1`.
    pub fn snr(&self) -> f64 {
        0.5 / self.sigma2
    }
}

/// `sigma2 = 1 / (2 R 10^(Eb/N0 / 10))`.
pub fn ebn0_to_sigma2(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
    }
    Ok(1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0)))
}

/// Inverse of [`ebn0_to_sigma2`].
pub fn sigma2_to_ebn0(sigma2: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!("noise variance must be positive, got {sigma2}")));
    }
    Ok(-10.0 * (2.0 * rate * sigma2).log10())
}

/// Passes `x` through `y = h x + z`, `z ~ CN(0, 2 sigma2)`.
///
/// `sigma2 = 0` yields the noiseless output.
pub fn sample_channel<R: Rng + ?Sized>(x: &[Complex], h: Complex, sigma2: f64, rng: &mut R) -> Vec<Complex> {
    assert!(sigma2 >= 0.0, "noise variance must be non-negative");
    x.iter()
        .map(|&xi| {
            let y = h * xi;
            if sigma2 > 0.0 {
                y + rng::complex_normal(rng, sigma2)
            } else {
                y
            }
        })
        .collect()
}

/// All-ones BPSK preamble.
pub fn pilot_sequence(m: usize) -> Vec<Complex> {
    vec![Complex::new(1.0, 0.0); m]
}

/// A channel estimate `ĥ` with its amplitude and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEstimate {
    pub h_hat: Complex,
}

impl ChannelEstimate {
    pub fn new(h_hat: Complex) -> Self {
        Self { h_hat }
    }

    /// Estimate equal to the true gain.
    pub fn exact(h: Complex) -> Self {
        Self { h_hat: h }
    }

    pub fn from_polar(amplitude: f64, theta: f64) -> Self {
        Self { h_hat: Complex::from_polar(amplitude, theta) }
    }

    pub fn amplitude(&self) -> f64 {
        self.h_hat.norm()
    }

    /// Phase in `(-pi, pi]`.
    pub fn theta(&self) -> f64 {
        self.h_hat.arg()
    }
}

/// ML gain estimate from a preamble of unit-modulus pilots:
/// `ĥ = (1/m) Σ y_l conj(p_l)`.
pub fn ml_estimate(y_pilot: &[Complex], pilots: &[Complex]) -> Result<ChannelEstimate> {
    if pilots.is_empty() {
        return Err(Error::EmptyPreamble);
    }
    if y_pilot.len() != pilots.len() {
        return Err(Error::InvalidParameter(format!(
            "{} received samples for {} pilots",
            y_pilot.len(),
            pilots.len()
        )));
    }
    if pilots.iter().any(|p| (p.norm_sqr() - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidParameter("pilot symbols must have unit modulus".into()));
    }
    let sum: Complex = y_pilot.iter().zip(pilots).map(|(y, p)| y * p.conj()).sum();
    Ok(ChannelEstimate::new(sum / pilots.len() as f64))
}

/// Variance `2 sigma2 / m` of the complex estimation error `h - ĥ`.
pub fn estimation_error_variance(sigma2: f64, m: usize) -> f64 {
    2.0 * sigma2 / m as f64
}

/// Draws `ĥ = h - Δ`, `Δ ~ CN(0, 2 sigma2 / m)`, the law of the ML estimate
/// from `m` unit-modulus pilots.
pub fn sample_estimate<R: Rng + ?Sized>(h: Complex, sigma2: f64, m: usize, rng: &mut R) -> Result<ChannelEstimate> {
    if m == 0 {
        return Err(Error::EmptyPreamble);
    }
    let delta = rng::complex_normal(rng, 0.5 * estimation_error_variance(sigma2, m));
    Ok(ChannelEstimate::new(h - delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reference_frame_rates() {
        let f = FrameConfig::new(512, 16, 256, 1).unwrap();
        assert_eq!(f.data_len, 496);
        assert!((f.code_rate() - 256.0 / 496.0).abs() < 1e-15);
        assert!((f.code_rate() - 0.516).abs() < 1e-3);
        let f0 = FrameConfig::new(512, 0, 256, 1).unwrap();
        assert_eq!(f0.rate(), 0.5);
        assert_eq!(f0.code_rate(), 0.5);
        assert!(f0.perfect_csi());
        let q = FrameConfig::new(512, 20, 1024, 4).unwrap();
        assert_eq!(q.rate(), 2.0);
        assert!((q.symbol_rate() - 1024.0 / 492.0).abs() < 1e-15);
        assert_eq!(q.code_bits(), 492 * 4);
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(FrameConfig::new(512, 512, 1, 1).is_err());
        assert!(FrameConfig::new(512, 600, 1, 1).is_err());
        assert!(FrameConfig::new(512, 257, 256, 1).is_err());
        assert!(FrameConfig::new(512, 256, 256, 1).is_ok());
        assert!(FrameConfig::new(512, 0, 0, 1).is_err());
    }

    #[test]
    fn ebn0_conversions() {
        assert!((ebn0_to_sigma2(0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((ebn0_to_sigma2(10.0 * 2f64.log10(), 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!((ebn0_to_sigma2(3.0103, 0.5).unwrap() - 0.5).abs() < 1e-5);
        for &x in &[-2.0, 0.0, 2.5, 13.7] {
            let s = ebn0_to_sigma2(x, 0.5).unwrap();
            let back = sigma2_to_ebn0(s, 0.5).unwrap();
            assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }
        assert!(ebn0_to_sigma2(1.0, 0.0).is_err());
        assert!(ebn0_to_sigma2(1.0, -1.0).is_err());
    }

    #[test]
    fn noiseless_channel_is_scaling() {
        let x = [Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)];
        let h = Complex::new(0.3, -0.7);
        let y = sample_channel(&x, h, 0.0, &mut rng::stream(0, 0));
        assert_eq!(y, vec![h * x[0], h * x[1]]);
    }

    #[test]
    fn noiseless_and_single_pilot_estimates() {
        let p = pilot_sequence(8);
        let e = ml_estimate(&p, &p).unwrap();
        assert_eq!(e.h_hat, Complex::new(1.0, 0.0));
        assert_eq!(e.theta(), 0.0);
        let e = ml_estimate(&[Complex::new(0.0, 1.0)], &pilot_sequence(1)).unwrap();
        assert_eq!(e.h_hat, Complex::new(0.0, 1.0));
        assert!((e.theta() - PI / 2.0).abs() < 1e-15);
        assert_eq!(e.amplitude(), 1.0);
    }

    #[test]
    fn estimator_rejects_empty_or_bad_preamble() {
        assert_eq!(ml_estimate(&[], &[]).unwrap_err(), Error::EmptyPreamble);
        assert!(ml_estimate(&[Complex::new(1.0, 0.0)], &[Complex::new(2.0, 0.0)]).is_err());
        assert!(sample_estimate(Complex::new(1.0, 0.0), 0.5, 0, &mut rng::stream(0, 0)).is_err());
    }

    #[test]
    fn huge_preamble_concentrates_estimate() {
        let mut r = rng::stream(3, 0);
        for _ in 0..100 {
            let e = sample_estimate(Complex::new(1.0, 0.0), 0.5, 100_000_000, &mut r).unwrap();
            assert!(e.theta().abs() < 1e-3);
            assert!((e.amplitude() - 1.0).abs() < 1e-3);
        }
    }
}
