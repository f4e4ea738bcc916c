use std::collections::BTreeMap;

use mismatch_bounds::exponent::{maximize_exponent, ExponentQuery};
use mismatch_bounds::frame::{ebn0_to_sigma2, ChannelEstimate, FrameConfig};
use mismatch_bounds::ldpc::*;
use mismatch_bounds::par::Exec;
use mismatch_bounds::tradeoff::{min_snr_for_target, BoundKind, BoundSettings, SearchBracket};
use mismatch_bounds::{constellation::Constellation, rng, Complex};
use rand::Rng;

fn default_code() -> LdpcCode {
    peg_construct(&PegConfig::ira_512_256(1)).unwrap()
}

fn histogram(d: Vec<usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for x in d {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

#[test]
fn default_code_follows_the_degree_profile() {
    let code = default_code();
    let h = code.parity_check();
    assert_eq!((h.rows(), h.cols(), code.k_info()), (256, 512, 256));
    let cols = histogram(h.column_degrees());
    // half the variable nodes have degree 2 (one accumulator end has degree 1)
    assert_eq!(cols[&4], 256);
    assert_eq!(cols[&2] + cols.get(&1).copied().unwrap_or(0), 256);
    let rows = histogram(h.row_degrees());
    assert!(rows.keys().all(|&d| d == 5 || d == 6));
    assert!(rows[&6] >= 254);
    assert!(girth(h).unwrap() >= 6);
}

#[test]
fn construction_is_deterministic_per_seed() {
    let a = peg_construct(&PegConfig::ira_512_256(3)).unwrap();
    let b = peg_construct(&PegConfig::ira_512_256(3)).unwrap();
    let c = peg_construct(&PegConfig::ira_512_256(4)).unwrap();
    assert_eq!(a.parity_check(), b.parity_check());
    assert_ne!(a.parity_check(), c.parity_check());
}

#[test]
fn alist_round_trip() {
    let code = default_code();
    let text = write_alist(code.parity_check());
    let h = read_alist(&text).unwrap();
    assert_eq!(&h, code.parity_check());
    assert_eq!(write_alist(&h), text);
}

#[test]
fn noiseless_frames_decode_in_one_iteration() {
    let code = default_code();
    let mut r = rng::stream(5, 0);
    let info: Vec<u8> = (0..256).map(|_| r.random_range(0..2)).collect();
    let x = code.encode(&info).unwrap();
    let llrs: Vec<f64> = x.iter().map(|&b| if b == 0 { LLR_CLIP } else { -LLR_CLIP }).collect();
    let out = bp_decode(code.parity_check(), &llrs, 100);
    assert!(out.converged);
    assert_eq!(out.iterations, 1);
    assert_eq!(out.bits, x);
    let out = bp_decode(code.parity_check(), &vec![0.0; 512], 100);
    assert!(!out.converged);
    assert_eq!(out.iterations, 100);
}

#[test]
fn vanishing_noise_gives_no_block_errors() {
    let code = default_code();
    for m in [0, 24] {
        let mask = puncture_mask(512, 256, m).unwrap();
        let frame = FrameConfig::new(512, m, 256, 1).unwrap();
        let cfg = SimConfig { max_frames: 512, ..SimConfig::new(12.0, 2) };
        let r = simulate_bler(&frame, &code, &mask, &cfg).unwrap();
        assert_eq!((r.frames, r.block_errors), (512, 0));
    }
}

#[test]
fn positive_rescaling_of_the_estimate_keeps_llr_signs() {
    let mask = puncture_mask(512, 256, 16).unwrap();
    let sigma2 = ebn0_to_sigma2(2.0, 0.5).unwrap();
    let mut r = rng::stream(11, 0);
    for _ in 0..1000 {
        let y: Vec<Complex> = (0..496)
            .map(|_| Complex::new(if r.random::<bool>() { 1.0 } else { -1.0 }, 0.0) + rng::complex_normal(&mut r, sigma2))
            .collect();
        let a = mismatched_llrs(&y, ChannelEstimate::exact(Complex::new(1.0, 0.0)), sigma2, &mask).unwrap();
        let b = mismatched_llrs(&y, ChannelEstimate::new(Complex::new(2.0, 0.0)), sigma2, &mask).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.signum() == y.signum() || (*x == 0.0 && *y == 0.0)));
    }
}

#[test]
fn simulation_is_reproducible_and_thread_independent() {
    let code = default_code();
    let mask = puncture_mask(512, 256, 24).unwrap();
    let frame = FrameConfig::new(512, 24, 256, 1).unwrap();
    let cfg = SimConfig { max_frames: 2048, target_errors: 1000, ..SimConfig::new(1.5, 8) };
    let a = simulate_bler(&frame, &code, &mask, &cfg).unwrap();
    let b = simulate_bler(&frame, &code, &mask, &cfg).unwrap();
    let c = simulate_bler(&frame, &code, &mask, &SimConfig { exec: Exec::Serial, ..cfg }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    // pilot ML estimate error variance 2σ²/m
    let sigma2 = ebn0_to_sigma2(1.5, frame.rate()).unwrap();
    let want = 2.0 * sigma2 / 24.0;
    let se = want * (1.0 / a.frames as f64).sqrt();
    assert!((a.estimate_mse - want).abs() < 4.0 * se, "{} vs {want}", a.estimate_mse);
}

#[test]
fn sidecar_round_trip() {
    let code = default_code();
    let side = CodeSidecar {
        seed: 1,
        n_code: 512,
        k_info: 256,
        girth: girth(code.parity_check()),
        punctures: vec![puncture_mask(512, 256, 24).unwrap()],
    };
    assert_eq!(CodeSidecar::from_json(&side.to_json()).unwrap(), side);
}

/// Ideal-CSI code versus the matched random-coding bound at BLER 1e-3.
#[test]
fn ideal_csi_code_is_within_0_7_db_of_the_matched_bound() {
    let frame = FrameConfig::new(512, 0, 256, 1).unwrap();
    let settings = BoundSettings::new(Constellation::bpsk(), BoundKind::Grcb);
    let bound = min_snr_for_target(&frame, &settings, 1e-3, SearchBracket::default()).unwrap().ebn0_star_db;
    let code = default_code();
    let mask = puncture_mask(512, 256, 0).unwrap();
    let search = LdpcSnrSearch { step_db: 0.125, ..LdpcSnrSearch::new(bound + 0.5, 1e-3) };
    let (star, records) = min_snr_ldpc(&frame, &code, &mask, &search, &SimConfig::new(0.0, 1)).unwrap();
    for r in &records {
        println!("ideal CSI: {:.3} dB bler {:.3e} ({} / {})", r.ebn0_db, r.bler, r.block_errors, r.frames);
    }
    println!("ideal CSI crossing {star:.3} dB, matched bound {bound:.3} dB, gap {:.3} dB", star - bound);
    // the bound itself is the one used by the frame-level tools
    let sigma2 = ebn0_to_sigma2(bound, 0.5).unwrap();
    let p = maximize_exponent(&ExponentQuery::matched(Constellation::bpsk(), sigma2, 0.5, 512)).unwrap().p_bar;
    assert!((p.log10() + 3.0).abs() < 0.05);
    assert!(star - bound <= 0.7, "gap {:.3} dB", star - bound);
}
