use proptest::prelude::*;

use mismatch_bounds::constellation::Constellation;
use mismatch_bounds::converse::{sphere_packing_1959, SpbQuery};
use mismatch_bounds::exponent::{maximize_exponent, Evaluator, ExponentQuery, Integrator, Metric};
use mismatch_bounds::frame::{ebn0_to_sigma2, sample_estimate, ChannelEstimate, FrameConfig};
use mismatch_bounds::ldpc::{peg_construct, puncture_mask, PegConfig};
use mismatch_bounds::rng;
use mismatch_bounds::tradeoff::{averaged_bound, frame_bound, Averaging, AveragedBoundQuery, BoundKind, BoundSettings};
use mismatch_bounds::Complex;

fn one() -> Complex {
    Complex::new(1.0, 0.0)
}

fn mismatched_bpsk(sigma2: f64, est: ChannelEstimate) -> Evaluator {
    Evaluator::full(&Constellation::bpsk(), sigma2, one(), Metric::Mismatched(est), Integrator::GaussHermite { order: 32 })
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn e0_vanishes_at_rho_zero(sigma2 in 0.05f64..4.0, theta in -1.4f64..1.4, s in 0.05f64..5.0) {
        let ev = mismatched_bpsk(sigma2, ChannelEstimate::from_polar(1.3, theta));
        prop_assert!(ev.e0(s, 0.0).value.abs() < 1e-12);
    }

    #[test]
    fn e0_is_concave_in_rho(sigma2 in 0.05f64..2.0, theta in -1.2f64..1.2, s in 0.1f64..3.0, r in 0.05f64..0.95) {
        let ev = mismatched_bpsk(sigma2, ChannelEstimate::from_polar(0.8, theta));
        let h = 0.04;
        let (a, b, c) = (ev.e0(s, r - h).value, ev.e0(s, r).value, ev.e0(s, r + h).value);
        prop_assert!(a + c - 2.0 * b <= 1e-10, "second difference {}", a + c - 2.0 * b);
    }

    #[test]
    fn matched_metric_is_optimized_at_inverse_one_plus_rho(sigma2 in 0.1f64..2.0, rho in 0.1f64..1.0) {
        let ev = Evaluator::full(&Constellation::bpsk(), sigma2, one(), Metric::Mismatched(ChannelEstimate::exact(one())),
            Integrator::GaussHermite { order: 128 }).unwrap();
        // E0 is nearly flat in s at high SNR, so locate the optimum through
        // the Newton step from 1/(1+ρ) rather than by comparing maximizers;
        // the step is limited by the quadrature order
        let s0 = 1.0 / (1.0 + rho);
        let d = ev.e0_derivatives(s0, rho);
        prop_assert!(d.d_s_s < 0.0);
        prop_assert!((d.d_s / d.d_s_s).abs() < 1e-4, "Newton step {}", d.d_s / d.d_s_s);
        let (_, sup) = ev.sup_over_s(rho).unwrap();
        prop_assert!(sup - ev.e0(s0, rho).value < 1e-10);
    }

    #[test]
    fn amplitude_of_the_estimate_is_irrelevant_for_bpsk(sigma2 in 0.1f64..2.0, theta in -1.3f64..1.3, rho in 0.1f64..1.0) {
        let vals: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&a| mismatched_bpsk(sigma2, ChannelEstimate::from_polar(a, theta)).sup_over_s(rho).unwrap().1)
            .collect();
        prop_assert!((vals[0] - vals[1]).abs() < 1e-6 && (vals[2] - vals[1]).abs() < 1e-6, "{vals:?}");
    }

    #[test]
    fn reduction_matches_the_full_evaluator(sigma2 in 0.2f64..1.5, theta in -1.2f64..1.2) {
        let est = ChannelEstimate::from_polar(1.1, theta);
        let q = ExponentQuery::mismatched(Constellation::bpsk(), sigma2, est, 0.5, 512);
        let reduced = maximize_exponent(&q).unwrap();
        let full = maximize_exponent(&q.clone().full_evaluator()).unwrap();
        prop_assert!((reduced.eg - full.eg).abs() < 1e-4, "{} vs {}", reduced.eg, full.eg);
    }

    #[test]
    fn puncture_masks_touch_parity_only(m in 0usize..=256) {
        let mask = puncture_mask(512, 256, m).unwrap();
        prop_assert_eq!(mask.len(), m);
        prop_assert!(mask.positions.iter().all(|&p| (256..512).contains(&p)));
        prop_assert!(mask.positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn spb_never_exceeds_grcb(ebn0 in 0.0f64..5.0, m in prop::sample::select(vec![0usize, 16, 32])) {
        let frame = FrameConfig::new(512, m, 256, 1).unwrap();
        let g = frame_bound(&frame, ebn0, &BoundSettings::new(Constellation::bpsk(), BoundKind::Grcb)
            .with_averaging(Averaging::PhaseQuadrature { points: 401 })).unwrap();
        let s = frame_bound(&frame, ebn0, &BoundSettings::new(Constellation::bpsk(), BoundKind::Spb)
            .with_averaging(Averaging::PhaseQuadrature { points: 401 })).unwrap();
        prop_assert!(s.value <= g.value, "spb {} > grcb {}", s.value, g.value);
    }
}

#[test]
fn spb_below_grcb_on_matched_grid() {
    for &n in &[64usize, 256, 512, 1024] {
        for &snr_db in &[-2.0f64, 0.0, 2.0, 4.0] {
            let snr = 10f64.powf(snr_db / 10.0);
            let q = ExponentQuery::matched(Constellation::bpsk(), 1.0 / snr, 0.5, n);
            let g = maximize_exponent(&q).unwrap().p_bar;
            let s = sphere_packing_1959(&SpbQuery { n, rate: 0.5, snr }).unwrap();
            assert!(s <= g, "n={n}, snr={snr_db}: {s} > {g}");
        }
    }
}

#[test]
fn encodings_satisfy_every_check() {
    let code = peg_construct(&PegConfig::ira_512_256(1)).unwrap();
    let mut r = rng::stream(17, 0);
    let mut prev = code.encode(&vec![0u8; 256]).unwrap();
    assert!(prev.iter().all(|&b| b == 0));
    for _ in 0..10_000 {
        let info: Vec<u8> = (0..256).map(|_| r.random::<bool>() as u8).collect();
        let x = code.encode(&info).unwrap();
        assert!(code.parity_check().is_codeword(&x));
        // linearity
        let sum: Vec<u8> = x.iter().zip(&prev).map(|(a, b)| a ^ b).collect();
        let info_sum: Vec<u8> = sum[..256].to_vec();
        assert_eq!(code.encode(&info_sum).unwrap(), sum);
        prev = x;
    }
}

use rand::Rng;

#[test]
fn estimator_variance_matches_theory() {
    let (sigma2, m) = (0.4, 16);
    let mut r = rng::stream(23, 0);
    let trials = 40_000;
    let errs: Vec<f64> = (0..trials).map(|_| (one() - sample_estimate(one(), sigma2, m, &mut r).unwrap().h_hat).norm_sqr()).collect();
    let mean = errs.iter().sum::<f64>() / trials as f64;
    let sd = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0)).sqrt();
    let se = sd / (trials as f64).sqrt();
    let theory = 2.0 * sigma2 / m as f64;
    assert!((mean - theory).abs() < 3.0 * se, "{mean} vs {theory} (se {se})");
}

#[test]
fn averaged_bound_never_beats_perfect_csi() {
    let settings = BoundSettings::new(Constellation::bpsk(), BoundKind::Grcb);
    for &db in &[1.0, 2.0, 3.0, 4.0] {
        let perfect = frame_bound(&FrameConfig::new(512, 0, 256, 1).unwrap(), db, &settings).unwrap().value;
        for &m in &[4usize, 16, 48] {
            let frame = FrameConfig::new(512, m, 256, 1).unwrap();
            let avg = frame_bound(&frame, db, &settings).unwrap().value;
            assert!(avg >= perfect, "m={m}, {db} dB: {avg} < {perfect}");
        }
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let frame = FrameConfig::new(512, 16, 256, 1).unwrap();
    let mk = |averaging| AveragedBoundQuery {
        frame,
        ebn0_db: 3.0,
        settings: BoundSettings::new(Constellation::bpsk(), BoundKind::Grcb).with_averaging(averaging),
    };
    let a = averaged_bound(&mk(Averaging::MonteCarlo { samples: 2000, seed: 4 })).unwrap();
    let b = averaged_bound(&mk(Averaging::MonteCarlo { samples: 2000, seed: 4 })).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let serial = averaged_bound(&AveragedBoundQuery {
        settings: mk(Averaging::MonteCarlo { samples: 2000, seed: 4 }).settings.with_exec(mismatch_bounds::par::Exec::Serial),
        ..mk(Averaging::MonteCarlo { samples: 2000, seed: 4 })
    })
    .unwrap();
    assert_eq!(a.value.to_bits(), serial.value.to_bits());
}

#[test]
fn sampling_back_ends_agree_with_the_phase_quadrature() {
    let frame = FrameConfig::new(512, 16, 256, 1).unwrap();
    let base = BoundSettings::new(Constellation::bpsk(), BoundKind::Grcb);
    let q = |averaging| AveragedBoundQuery { frame, ebn0_db: 3.0, settings: base.clone().with_averaging(averaging) };
    let exact = averaged_bound(&q(Averaging::PhaseQuadrature { points: 2001 })).unwrap().value;
    let grid = averaged_bound(&q(Averaging::EstimateGrid { spacing: 0.25, radius: 6.0 })).unwrap().value;
    assert!((grid / exact - 1.0).abs() < 2e-3, "grid {grid} vs {exact}");
    let is = averaged_bound(&q(Averaging::ImportanceSampling { samples: 20_000, seed: 2, widening: 3.0 })).unwrap();
    assert!((is.value - exact).abs() < 4.0 * is.std_error, "is {} ± {} vs {exact}", is.value, is.std_error);
    let mc = averaged_bound(&q(Averaging::MonteCarlo { samples: 20_000, seed: 2 })).unwrap();
    assert!((mc.value - exact).abs() < 4.0 * mc.std_error, "mc {} ± {} vs {exact}", mc.value, mc.std_error);
}

#[test]
fn eb_n0_round_trip_is_consistent_across_modules() {
    let frame = FrameConfig::new(512, 16, 256, 1).unwrap();
    let s = ebn0_to_sigma2(2.0, frame.rate()).unwrap();
    assert!((s - 1.0 / (2.0 * 0.5 * 10f64.powf(0.2))).abs() < 1e-15);
}
