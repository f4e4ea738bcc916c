use rand::Rng;
use serde::Serialize;

use super::code::LdpcCode;
use super::decoder::{Decoder, DecoderConfig};
use super::puncture::PunctureMask;
use crate::frame::{ebn0_to_sigma2, ml_estimate, pilot_sequence, sample_channel, ChannelEstimate, FrameConfig};
use crate::par::Exec;
use crate::{rng, Complex, Error, Result};

/// Block error rate measured at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimRecord {
    pub m: usize,
    pub ebn0_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub stderr: f64,
    /// Mean of `|h - ĥ|²` over the simulated frames (zero with perfect CSI).
    pub estimate_mse: f64,
}

/// Monte Carlo settings. Frames are simulated in batches of `batch_frames`;
/// batch `b` draws from stream `b` of `seed`, and the stopping rule is
/// checked after every round of `round_batches` batches, so the result does
/// not depend on the number of worker threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub ebn0_db: f64,
    pub max_frames: u64,
    pub target_errors: u64,
    pub seed: u64,
    pub batch_frames: u64,
    pub round_batches: usize,
    pub decoder: DecoderConfig,
    pub exec: Exec,
}

impl SimConfig {
    pub fn new(ebn0_db: f64, seed: u64) -> Self {
        Self {
            ebn0_db,
            max_frames: 1_000_000,
            target_errors: 100,
            seed,
            batch_frames: 256,
            round_batches: 4,
            decoder: DecoderConfig::default(),
            exec: Exec::default(),
        }
    }
}

/// Per-position LLRs `(2/σ²) Re{y ĥ*}` over the whole codeword, with zero at
/// punctured positions. `y` holds the received data field in transmission
/// order.
pub fn mismatched_llrs(y: &[Complex], estimate: ChannelEstimate, sigma2: f64, mask: &PunctureMask) -> Result<Vec<f64>> {
    let tx = mask.transmitted();
    if y.len() != tx.len() {
        return Err(Error::InvalidParameter(format!("expected {} data symbols, got {}", tx.len(), y.len())));
    }
    let mut llr = vec![0.0; mask.n_code];
    let g = estimate.h_hat.conj() * (2.0 / sigma2);
    for (&i, &yi) in tx.iter().zip(y) {
        llr[i] = (yi * g).re;
    }
    Ok(llr)
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    frames: u64,
    errors: u64,
    sq_err: f64,
}

fn check_dims(frame: &FrameConfig, code: &LdpcCode, mask: &PunctureMask) -> Result<()> {
    if frame.bits_per_symbol != 1 {
        return Err(Error::Unsupported("LDPC link simulation is BPSK only".into()));
    }
    if frame.info_bits != code.k_info() || mask.n_code != code.n_code() || mask.k_info != code.k_info() {
        return Err(Error::InvalidFrame("frame, code and puncture mask dimensions disagree".into()));
    }
    if frame.data_len != code.n_code() - mask.len() || frame.preamble != mask.len() {
        return Err(Error::InvalidFrame(format!(
            "data field of {} symbols does not carry a ({}, {}) code with {} punctured bits",
            frame.data_len,
            code.n_code(),
            code.k_info(),
            mask.len()
        )));
    }
    Ok(())
}

/// Pilot-aided BPSK link with ML gain estimation and mismatched-LLR
/// sum-product decoding; `h = 1`. With `m = 0` the decoder gets `ĥ = h`.
pub fn simulate_bler(frame: &FrameConfig, code: &LdpcCode, mask: &PunctureMask, cfg: &SimConfig) -> Result<SimRecord> {
    check_dims(frame, code, mask)?;
    if cfg.batch_frames == 0 || cfg.round_batches == 0 || cfg.max_frames == 0 {
        return Err(Error::InvalidParameter("batch size, round width and max_frames must be positive".into()));
    }
    let sigma2 = ebn0_to_sigma2(cfg.ebn0_db, frame.rate())?;
    let decoder = Decoder::new(code.parity_check());
    let tx = mask.transmitted();
    let pilots = pilot_sequence(frame.preamble);
    let h = Complex::new(1.0, 0.0);
    let k = code.k_info();

    let run_batch = |b: u64| -> Result<Tally> {
        let frames = cfg.batch_frames.min(cfg.max_frames - b * cfg.batch_frames);
        let mut r = rng::stream(cfg.seed, b);
        let mut t = Tally::default();
        let mut info = vec![0u8; k];
        let mut x = vec![Complex::new(0.0, 0.0); pilots.len() + tx.len()];
        x[..pilots.len()].copy_from_slice(&pilots);
        for _ in 0..frames {
            info.iter_mut().for_each(|u| *u = r.random::<bool>() as u8);
            let cw = code.encode(&info)?;
            for (slot, &i) in x[pilots.len()..].iter_mut().zip(&tx) {
                *slot = Complex::new(if cw[i] == 0 { 1.0 } else { -1.0 }, 0.0);
            }
            let y = sample_channel(&x, h, sigma2, &mut r);
            let est = if pilots.is_empty() {
                ChannelEstimate::exact(h)
            } else {
                ml_estimate(&y[..pilots.len()], &pilots)?
            };
            t.sq_err += (est.h_hat - h).norm_sqr();
            let llr = mismatched_llrs(&y[pilots.len()..], est, sigma2, mask)?;
            let out = decoder.decode(&llr, cfg.decoder);
            t.frames += 1;
            if out.bits != cw {
                t.errors += 1;
            }
        }
        Ok(t)
    };

    let total_batches = cfg.max_frames.div_ceil(cfg.batch_frames);
    let mut tally = Tally::default();
    let mut next = 0u64;
    while next < total_batches && tally.errors < cfg.target_errors {
        let width = (cfg.round_batches as u64).min(total_batches - next);
        let round = cfg.exec.map(width as usize, |i| run_batch(next + i as u64));
        for t in round {
            let t = t?;
            tally.frames += t.frames;
            tally.errors += t.errors;
            tally.sq_err += t.sq_err;
        }
        next += width;
    }
    let bler = tally.errors as f64 / tally.frames as f64;
    Ok(SimRecord {
        m: frame.preamble,
        ebn0_db: cfg.ebn0_db,
        frames: tally.frames,
        block_errors: tally.errors,
        bler,
        stderr: (bler * (1.0 - bler) / tally.frames as f64).sqrt(),
        estimate_mse: tally.sq_err / tally.frames as f64,
    })
}

/// SNR stepping used to locate the Eb/N0 where the measured BLER crosses a
/// target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpcSnrSearch {
    pub start_db: f64,
    pub step_db: f64,
    pub max_steps: usize,
    pub target_bler: f64,
}

impl LdpcSnrSearch {
    pub fn new(start_db: f64, target_bler: f64) -> Self {
        Self { start_db, step_db: 0.25, max_steps: 40, target_bler }
    }
}

/// Steps the SNR from `start_db` until two neighboring points straddle the
/// target, then interpolates `log10 BLER` linearly. Returns the crossing
/// and every simulated record in SNR order.
pub fn min_snr_ldpc(
    frame: &FrameConfig,
    code: &LdpcCode,
    mask: &PunctureMask,
    search: &LdpcSnrSearch,
    cfg: &SimConfig,
) -> Result<(f64, Vec<SimRecord>)> {
    if !(search.step_db > 0.0 && search.target_bler > 0.0 && search.target_bler < 1.0) {
        return Err(Error::InvalidParameter("step must be positive and the target in (0, 1)".into()));
    }
    let run = |db: f64| simulate_bler(frame, code, mask, &SimConfig { ebn0_db: db, ..*cfg });
    let above = |r: &SimRecord| r.bler >= search.target_bler;
    let first = run(search.start_db)?;
    let dir = if above(&first) { 1.0 } else { -1.0 };
    let mut records = vec![first];
    for i in 1..=search.max_steps {
        let r = run(search.start_db + dir * i as f64 * search.step_db)?;
        let crossed = above(&r) != above(&records[records.len() - 1]);
        records.push(r);
        if crossed {
            records.sort_by(|a, b| a.ebn0_db.total_cmp(&b.ebn0_db));
            let j = records.iter().position(|r| !above(r)).expect("a point below the target");
            let (a, b) = (&records[j - 1], &records[j]);
            let la = a.bler.log10();
            // zero errors at the lower point: place the crossing there
            let lb = if b.block_errors == 0 { f64::NEG_INFINITY } else { b.bler.log10() };
            let lt = search.target_bler.log10();
            let t = if lb.is_finite() { (la - lt) / (la - lb) } else { 1.0 };
            return Ok((a.ebn0_db + t * (b.ebn0_db - a.ebn0_db), records));
        }
    }
    Err(Error::TargetNotBracketed {
        target: search.target_bler,
        lo: search.start_db.min(search.start_db + dir * search.max_steps as f64 * search.step_db),
        hi: search.start_db.max(search.start_db + dir * search.max_steps as f64 * search.step_db),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::{peg_construct, puncture_mask, PegConfig};

    #[test]
    fn llr_conventions() {
        let mask = puncture_mask(4, 2, 1).unwrap();
        let y = [Complex::new(0.5, 0.0), Complex::new(0.0, 1.0), Complex::new(-1.0, 0.0)];
        let l = mismatched_llrs(&y, ChannelEstimate::exact(Complex::new(1.0, 0.0)), 0.5, &mask).unwrap();
        assert_eq!(l, vec![2.0, 0.0, 0.0, -4.0]);
        // phase-aligned: ĥ = i, y = i
        let l = mismatched_llrs(&y[1..2], ChannelEstimate::new(Complex::new(0.0, 1.0)), 0.5, &puncture_mask(2, 1, 1).unwrap())
            .unwrap();
        assert_eq!(l, vec![4.0, 0.0]);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let code = peg_construct(&PegConfig { n_code: 128, n_checks: 64, ..PegConfig::ira_512_256(2) }).unwrap();
        let mask = puncture_mask(128, 64, 8).unwrap();
        let frame = FrameConfig::new(128, 8, 64, 1).unwrap();
        let cfg = SimConfig { max_frames: 600, batch_frames: 100, ..SimConfig::new(1.0, 9) };
        let a = simulate_bler(&frame, &code, &mask, &cfg).unwrap();
        let b = simulate_bler(&frame, &code, &mask, &SimConfig { exec: Exec::Serial, ..cfg }).unwrap();
        assert_eq!(a, b);
        assert!(a.frames <= 600 && a.block_errors > 0);
        assert_eq!(a.bler, a.block_errors as f64 / a.frames as f64);
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let code = peg_construct(&PegConfig { n_code: 128, n_checks: 64, ..PegConfig::ira_512_256(2) }).unwrap();
        let mask = puncture_mask(128, 64, 8).unwrap();
        let frame = FrameConfig::new(128, 4, 64, 1).unwrap();
        assert!(simulate_bler(&frame, &code, &mask, &SimConfig::new(1.0, 0)).is_err());
    }
}
