//! Converse bounds and the normal approximation.
//!
//! The 1959 sphere-packing bound treats `M` equal-energy codewords on the
//! `n`-dimensional real AWGN channel. Each decision region is replaced by a
//! circular cone whose solid angle is `1/M` of the full sphere; the error
//! probability of any code is at least the probability that the noise moves
//! the received point outside that cone. Both the solid angle and the escape
//! probability are evaluated in the log domain:
//!
//! * `Ω(φ)/Ω(π) = ½ I_{sin²φ}((n-1)/2, ½)` for `φ ≤ π/2`,
//! * `P(angle > φ) = E[Φ(R cot φ - √n A)]` with `R ~ χ_{n-1}` the norm of
//!   the noise orthogonal to the codeword and `A²` the per-dimension SNR.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::frame::{ebn0_to_sigma2, FrameConfig};
use crate::special::{ln_1m_exp, ln_beta_reg, ln_gamma, log_add_exp, log_ndtr, q_function};
use crate::{bpsk, Error, Result};

/// Sphere-packing query: `n` real dimensions, rate in bits per dimension and
/// linear per-dimension SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpbQuery {
    pub n: usize,
    pub rate: f64,
    pub snr: f64,
}

/// `ln(Ω(φ)/Ω(π))` for a cone of half-angle `φ` in `n` dimensions.
pub fn ln_cone_fraction(n: usize, phi: f64) -> f64 {
    let a = 0.5 * (n as f64 - 1.0);
    if phi <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if phi >= PI {
        return 0.0;
    }
    // I_{sin²}(a, ½) = 1 - I_{cos²}(½, a); pick the form whose argument
    // is not close to one
    let (s2, c2) = (phi.sin().powi(2), phi.cos().powi(2));
    let ln_half_cap = if s2 <= 0.5 { ln_beta_reg(a, 0.5, s2) } else { ln_1m_exp(ln_beta_reg(0.5, a, c2)) };
    if phi <= FRAC_PI_2 {
        ln_half_cap - LN_2
    } else {
        ln_1m_exp(ln_half_cap - LN_2)
    }
}

/// Cone half-angle for `M` codewords in `n` dimensions, as a precomputed
/// evaluator of the escape probability at any SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePacking {
    n: usize,
    half_angle: f64,
}

impl SpherePacking {
    /// Solves `Ω(φ)/Ω(π) = 1/M` for `ln M = ln_codewords` by bisection.
    pub fn new(n: usize, ln_codewords: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("sphere packing needs n >= 2, got {n}")));
        }
        if !(ln_codewords > 0.0) {
            return Err(Error::InvalidParameter("sphere packing needs M > 1 codewords".into()));
        }
        let target = -ln_codewords;
        let (mut lo, mut hi) = (0.0f64, PI);
        if !(ln_cone_fraction(n, hi) > target) {
            return Err(Error::NotBracketed { what: "cone half-angle" });
        }
        // the fraction is monotone in φ; bisect to relative tolerance 1e-10
        let mut iters = 0;
        while hi - lo > 1e-10 * hi {
            let mid = 0.5 * (lo + hi);
            if ln_cone_fraction(n, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
            if iters > 400 {
                return Err(Error::NotConverged { what: "cone half-angle bisection", iterations: iters });
            }
        }
        Ok(Self { n, half_angle: 0.5 * (lo + hi) })
    }

    pub fn from_query(q: &SpbQuery) -> Result<Self> {
        if !(q.rate > 0.0) {
            return Err(Error::InvalidParameter("sphere packing needs a positive rate".into()));
        }
        Self::new(q.n, q.n as f64 * q.rate * LN_2)
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    /// `ln P(angle > φ)` at per-dimension SNR `snr`.
    pub fn ln_error_probability(&self, snr: f64) -> f64 {
        ln_escape_probability(self.n, self.half_angle, snr)
    }

    pub fn error_probability(&self, snr: f64) -> f64 {
        self.ln_error_probability(snr).exp()
    }
}

/// `ln P(angle(x + z, x) > φ)` for `|x|² = n · snr`, `z ~ N(0, I_n)`.
pub fn ln_escape_probability(n: usize, phi: f64, snr: f64) -> f64 {
    if phi >= PI {
        return f64::NEG_INFINITY;
    }
    let shift = (n as f64 * snr).sqrt();
    if snr <= 0.0 {
        // isotropic noise: the angle is uniform over the sphere
        return ln_1m_exp(ln_cone_fraction(n, phi).min(0.0));
    }
    if (phi - FRAC_PI_2).abs() < 1e-15 {
        return log_ndtr(-shift);
    }
    let cot = phi.cos() / phi.sin();
    // chi density with k = n - 1 degrees of freedom
    let k = n as f64 - 1.0;
    let ln_norm = -(0.5 * k - 1.0) * LN_2 - ln_gamma(0.5 * k);
    let g = |r: f64| {
        let radial = if k > 1.0 { (k - 1.0) * r.ln() } else { 0.0 };
        radial - 0.5 * r * r + ln_norm + log_ndtr(r * cot - shift)
    };
    integrate_log_concave(g, k.sqrt())
}

/// `ln ∫_0^∞ exp(g(r)) dr` for concave `g` with mode near `guess`.
fn integrate_log_concave<G: Fn(f64) -> f64>(g: G, guess: f64) -> f64 {
    // locate the mode by golden-section on a bracket grown from the guess
    let mut lo = 0.0f64;
    let mut hi = (2.0 * guess).max(4.0);
    while g(hi) > g(0.5 * hi) {
        lo = 0.5 * hi;
        hi *= 2.0;
    }
    let mode = crate::optimize::golden_max(&g, lo.max(0.0), hi, 1e-9 * hi, 500)
        .map(|m| m.x)
        .unwrap_or(guess);
    let gmax = g(mode);
    // curvature sets the step; extend until the integrand drops by e^-60
    let dh = 1e-3 * mode.max(1.0);
    let curv = -(g(mode + dh) - 2.0 * gmax + g((mode - dh).max(1e-300))) / (dh * dh);
    let width = if curv > 0.0 && curv.is_finite() { 1.0 / curv.sqrt() } else { 1.0 };
    let step = width / 16.0;
    let mut acc = f64::NEG_INFINITY;
    let mut r = mode;
    let mut i = 0;
    loop {
        let v = g(r);
        acc = log_add_exp(acc, v);
        if v < gmax - 60.0 || i > 1_000_000 {
            break;
        }
        r += step;
        i += 1;
    }
    let mut r = mode - step;
    while r > 0.0 {
        let v = g(r);
        acc = log_add_exp(acc, v);
        if v < gmax - 60.0 {
            break;
        }
        r -= step;
    }
    acc + step.ln()
}

/// The 1959 sphere-packing lower bound on block error probability.
pub fn sphere_packing_1959(query: &SpbQuery) -> Result<f64> {
    Ok(SpherePacking::from_query(query)?.error_probability(query.snr))
}

/// Sphere-packing bound for a BPSK frame at `ebn0_db` with phase error
/// `theta`; one when `|θ| >= π/2`.
pub fn spb_bpsk_mismatched(frame: &FrameConfig, ebn0_db: f64, theta: f64) -> Result<f64> {
    let sp = SpherePacking::new(frame.data_len, frame.info_bits as f64 * LN_2)?;
    let sigma2 = ebn0_to_sigma2(ebn0_db, frame.rate())?;
    Ok(spb_phase(&sp, sigma2, theta))
}

/// Sphere-packing bound at noise variance `sigma2 / cos²θ`.
pub fn spb_phase(sp: &SpherePacking, sigma2: f64, theta: f64) -> f64 {
    if !bpsk::phase_is_valid(theta) {
        return 1.0;
    }
    sp.error_probability(theta.cos().powi(2) / sigma2)
}

/// Normal-approximation query for the complex AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalApproxQuery {
    /// Complex channel uses.
    pub n: usize,
    /// Bits per channel use.
    pub rate: f64,
    /// Linear SNR `1 / (2 σ²)`.
    pub snr: f64,
}

/// `ε ≈ Q((n C - n R + ½ log2 n) / √(n V))` with complex-AWGN capacity and
/// dispersion in bits.
pub fn normal_approximation(q: &NormalApproxQuery) -> f64 {
    let n = q.n as f64;
    let c = (1.0 + q.snr).log2();
    let log2e = std::f64::consts::LOG2_E;
    let v = q.snr * (q.snr + 2.0) / (q.snr + 1.0).powi(2) * log2e * log2e;
    q_function((n * c - n * q.rate + 0.5 * n.log2()) / (n * v).sqrt())
}
