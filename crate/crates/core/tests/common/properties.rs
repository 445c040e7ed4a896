//! Invariants over random inputs, shared by the `properties` and
//! `acceptance` targets.

use proptest::prelude::*;

use specmar::cmar::{build_cmar, build_reference_variant, combine_axes, MotionReference, ReferenceMethod};
use specmar::eval::{aae, bland_altman, pearson};
use specmar::mss::{generalized_ss, modified_ss, SubtractionParams};
use specmar::signal_io::{frame_lengths, window_count};
use specmar::spectral::{magnitude_spectrum, MagnitudeSpectrum};
use specmar::tracker::{closeness, select_bin, smooth, TrackerParams, TrackerState};
use specmar::{estimate_recording, MotionComponent, PipelineConfig, SynthSpec};

fn config(cases: u32) -> ProptestConfig {
    // Regression files would be looked up next to a lib.rs this module does not have.
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn spectrum(bins: Vec<f64>) -> MagnitudeSpectrum {
    MagnitudeSpectrum::new(bins, 4096, 125.0)
}

fn reference(bins: Vec<f64>) -> MotionReference {
    MotionReference { bins, method: ReferenceMethod::Min }
}

fn unit_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, len)
}

fn paired(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..max).prop_flat_map(|n| (unit_vec(n), unit_vec(n)))
}

fn triple(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1..max).prop_flat_map(|n| (unit_vec(n), unit_vec(n), unit_vec(n)))
}

fn params() -> impl Strategy<Value = SubtractionParams> {
    (0.0f64..=1.0, 0.0f64..=1.0, prop::sample::select(vec![1u8, 2])).prop_map(|(alpha1, alpha2, p)| SubtractionParams {
        alpha1,
        alpha2,
        p,
        ..Default::default()
    })
}

proptest! {
    #![proptest_config(config(10_000))]

    fn subtraction_is_nonnegative((y, n) in paired(64), p in params()) {
        let out = modified_ss(&spectrum(y.clone()), &reference(n.clone()), &p).unwrap();
        prop_assert!(out.bins.iter().all(|&v| v >= 0.0));
        let g = generalized_ss(&spectrum(y), &reference(n), p.p).unwrap();
        prop_assert!(g.bins.iter().all(|&v| v >= 0.0));
    }

    fn more_noise_never_raises_output((y, n) in paired(64), bump in unit_vec(64), p in params()) {
        let louder: Vec<f64> = n.iter().zip(&bump).map(|(a, b)| (a + b).min(1.0)).collect();
        let base = modified_ss(&spectrum(y.clone()), &reference(n), &p).unwrap();
        let more = modified_ss(&spectrum(y), &reference(louder), &p).unwrap();
        for (a, b) in base.bins.iter().zip(&more.bins) {
            prop_assert!(b <= a);
        }
    }

    fn unit_weights_reduce_to_generalized((y, n) in paired(64), p in prop::sample::select(vec![1u8, 2])) {
        let unit = SubtractionParams { alpha1: 1.0, alpha2: 1.0, p, ..Default::default() };
        let m = modified_ss(&spectrum(y.clone()), &reference(n.clone()), &unit).unwrap();
        let g = generalized_ss(&spectrum(y), &reference(n), p).unwrap();
        prop_assert_eq!(m.bins, g.bins);
    }

    fn zero_noise_weight_keeps_argmax((y, n) in paired(64), alpha1 in 0.01f64..=1.0) {
        let p = SubtractionParams { alpha1, alpha2: 0.0, ..Default::default() };
        let ys = spectrum(y);
        let out = modified_ss(&ys, &reference(n), &p).unwrap();
        prop_assert_eq!(out.argmax(), ys.argmax());
    }

    fn min_reference_is_dominated((x, y, z) in triple(64)) {
        let (sx, sy, sz) = (spectrum(x.clone()), spectrum(y.clone()), spectrum(z.clone()));
        let lo = combine_axes(&sx, &sy, &sz, ReferenceMethod::Min).unwrap();
        let hi = combine_axes(&sx, &sy, &sz, ReferenceMethod::Max).unwrap();
        for k in 0..lo.len() {
            prop_assert!(lo[k] <= x[k] && lo[k] <= y[k] && lo[k] <= z[k]);
            prop_assert!(lo[k] <= hi[k]);
        }
        let r = build_cmar(&sx, &sy, &sz).unwrap();
        prop_assert!(r.bins.iter().all(|&v| (0.0..=1.0).contains(&v)));
        if r.bins.iter().any(|&v| v > 0.0) {
            prop_assert_eq!(r.bins.iter().copied().fold(0.0, f64::max), 1.0);
        }
    }

    fn min_reference_ignores_axis_order((x, y, z) in triple(64)) {
        let (sx, sy, sz) = (spectrum(x), spectrum(y), spectrum(z));
        let base = build_cmar(&sx, &sy, &sz).unwrap().bins;
        for (a, b, c) in [(&sx, &sz, &sy), (&sy, &sx, &sz), (&sy, &sz, &sx), (&sz, &sx, &sy), (&sz, &sy, &sx)] {
            prop_assert_eq!(&build_cmar(a, b, c).unwrap().bins, &base);
        }
    }
}

proptest! {
    #![proptest_config(config(2_000))]

    fn window_count_formula(len in 1usize..200_000, fs in prop::sample::select(vec![25.0, 64.0, 100.0, 125.0, 250.0]),
                            window_s in 1u32..16, hop_s in 1u32..8) {
        let (w, h) = frame_lengths(fs, window_s as f64, hop_s as f64).unwrap();
        match window_count(len, w, h) {
            Ok(count) => {
                prop_assert!(len >= w);
                prop_assert_eq!(count, (len - w) / h + 1);
                // Last window fits, one more would not.
                prop_assert!((count - 1) * h + w <= len);
                prop_assert!(count * h + w > len);
            }
            Err(_) => prop_assert!(len < w),
        }
    }

    fn consecutive_windows_overlap_by_window_minus_hop(extra in 0usize..5000) {
        let n = 1000 + extra;
        let z = vec![0.0; n];
        let rec = specmar::RawRecording::new("p", 125.0, z.clone(), z.clone(), z.clone(), z.clone(), z).unwrap();
        let frames = specmar::window_frames(&rec, 8.0, 2.0).unwrap();
        for w in frames.windows(2) {
            let overlap = (w[0].start_sample + w[0].len) - w[1].start_sample;
            prop_assert_eq!(overlap, 750);
        }
    }

    fn smoothing_is_convex(b in 30.0f64..240.0, b1 in 30.0f64..240.0, b2 in 30.0f64..240.0,
                           g in (0.0f64..1.0, 0.0f64..1.0)) {
        let (g1, rest) = (g.0, 1.0 - g.0);
        let params = TrackerParams { gamma: [g1, rest * g.1, rest - rest * g.1], ..Default::default() };
        let st = TrackerState { n0: 0, b_minus1: b1, b_minus2: b2, initialized: true };
        let out = smooth(b, &st, &params);
        let (lo, hi) = (b.min(b1).min(b2), b.max(b1).max(b2));
        prop_assert!(out >= lo - 1e-9 && out <= hi + 1e-9);
    }

    fn closeness_in_unit_interval(n0 in 0usize..131, offset in -30i64..=30) {
        let loc = (n0 as i64 + offset).max(0) as usize;
        let c = closeness(loc, n0, &TrackerParams::default());
        prop_assert!((0.0..=1.0).contains(&c));
    }

    fn selected_bin_stays_near_previous(ppg in unit_vec(131), mss in unit_vec(131), n0 in 0usize..131) {
        let params = TrackerParams::default();
        let st = TrackerState::bootstrap(n0, 100.0);
        let sel = select_bin(&spectrum(ppg), &spectrum(mss), &st, &params).unwrap();
        prop_assert!(sel.bin < 131);
        prop_assert!(sel.bin.abs_diff(n0) <= params.delta_s + params.delta1);
    }

    fn magnitude_triangle_inequality(a in prop::collection::vec(-5.0f64..5.0, 1..200), seed in any::<u64>()) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, _)| (((i as u64).wrapping_mul(seed | 1) % 97) as f64) / 10.0 - 4.8).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (sa, sb, ss) = (
            magnitude_spectrum(&a, 256, 125.0).unwrap(),
            magnitude_spectrum(&b, 256, 125.0).unwrap(),
            magnitude_spectrum(&sum, 256, 125.0).unwrap(),
        );
        for k in 0..256 {
            prop_assert!(ss.bins[k] <= sa.bins[k] + sb.bins[k] + 1e-9);
        }
    }

    fn aae_of_constant_offset(x in prop::collection::vec(40.0f64..200.0, 1..100), c in -20.0f64..20.0) {
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        prop_assert_eq!(aae(&x, &x).unwrap(), 0.0);
        prop_assert!((aae(&shifted, &x).unwrap() - c.abs()).abs() < 1e-9);
        let neg: Vec<f64> = x.iter().map(|v| v - c).collect();
        prop_assert!((aae(&neg, &x).unwrap() - aae(&shifted, &x).unwrap()).abs() < 1e-9);
    }

    fn pearson_affine_invariant(x in prop::collection::vec(40.0f64..200.0, 3..100),
                                y in prop::collection::vec(40.0f64..200.0, 3..100),
                                a in 0.1f64..10.0, b in -50.0f64..50.0) {
        let n = x.len().min(y.len());
        let (x, y) = (&x[..n], &y[..n]);
        if let Ok(r) = pearson(x, y) {
            prop_assert!((-1.0..=1.0).contains(&r));
            let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson(&xt, y).unwrap() - r).abs() < 1e-9);
            prop_assert!((pearson(y, &xt).unwrap() - r).abs() < 1e-9);
        }
    }

    fn limits_of_agreement_formula(x in prop::collection::vec(40.0f64..200.0, 2..100), d in prop::collection::vec(-10.0f64..10.0, 100)) {
        let est: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let ba = bland_altman(&est, &x).unwrap();
        prop_assert!((ba.loa_lo - (ba.mu - 1.96 * ba.sigma)).abs() <= 1e-12);
        prop_assert!((ba.loa_hi - (ba.mu + 1.96 * ba.sigma)).abs() <= 1e-12);
    }

    fn variant_matches_min_for_identical_axes(x in unit_vec(40), m in prop::sample::select(vec!["max", "x", "y", "z"])) {
        let mut s = x.clone();
        specmar::spectral::normalize_peak(&mut s);
        let sp = spectrum(s);
        let base = build_cmar(&sp, &sp, &sp).unwrap();
        let v = build_reference_variant(&sp, &sp, &sp, m.parse().unwrap()).unwrap();
        prop_assert_eq!(base.bins, v.bins);
    }
}

fn motion_recording(seed: u64, bpm: f64) -> specmar::RawRecording {
    let spec = SynthSpec::constant(bpm, 20.0)
        .with_motion(MotionComponent {
            freq_hz: 1.3 + (seed % 7) as f64 * 0.2,
            axis_amplitude: [1.0, 0.7, 0.4],
            ppg_leak: 0.8,
        })
        .with_noise(0.3)
        .with_seed(seed);
    specmar::generate(&spec).unwrap().0
}

proptest! {
    #![proptest_config(config(24))]

    fn trajectory_scale_invariant(seed in any::<u64>(), bpm in 60.0f64..170.0, exp in -8i32..8, c in 0.01f64..100.0) {
        let rec = motion_recording(seed, bpm);
        let cfg = PipelineConfig::default();
        let base = estimate_recording(&rec, &cfg).unwrap();
        prop_assert_eq!(&estimate_recording(&rec.scaled(2f64.powi(exp)), &cfg).unwrap(), &base);
        let scaled = estimate_recording(&rec.scaled(c), &cfg).unwrap();
        for (a, b) in scaled.iter().zip(&base) {
            prop_assert!((a - b).abs() < 1e-6, "c = {}: {} vs {}", c, a, b);
        }
    }

    fn repeated_runs_bit_identical(seed in any::<u64>(), bpm in 60.0f64..170.0) {
        let rec = motion_recording(seed, bpm);
        let cfg = PipelineConfig::default();
        let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
        prop_assert_eq!(bits(estimate_recording(&rec, &cfg).unwrap()), bits(estimate_recording(&rec, &cfg).unwrap()));
    }
}

/// Every property by name.
pub const ALL: &[(&str, fn())] = &[
    ("subtraction_is_nonnegative", subtraction_is_nonnegative),
    ("more_noise_never_raises_output", more_noise_never_raises_output),
    ("unit_weights_reduce_to_generalized", unit_weights_reduce_to_generalized),
    ("zero_noise_weight_keeps_argmax", zero_noise_weight_keeps_argmax),
    ("min_reference_is_dominated", min_reference_is_dominated),
    ("min_reference_ignores_axis_order", min_reference_ignores_axis_order),
    ("window_count_formula", window_count_formula),
    ("consecutive_windows_overlap_by_window_minus_hop", consecutive_windows_overlap_by_window_minus_hop),
    ("smoothing_is_convex", smoothing_is_convex),
    ("closeness_in_unit_interval", closeness_in_unit_interval),
    ("selected_bin_stays_near_previous", selected_bin_stays_near_previous),
    ("magnitude_triangle_inequality", magnitude_triangle_inequality),
    ("aae_of_constant_offset", aae_of_constant_offset),
    ("pearson_affine_invariant", pearson_affine_invariant),
    ("limits_of_agreement_formula", limits_of_agreement_formula),
    ("variant_matches_min_for_identical_axes", variant_matches_min_for_identical_axes),
    ("trajectory_scale_invariant", trajectory_scale_invariant),
    ("repeated_runs_bit_identical", repeated_runs_bit_identical),
];

#[allow(dead_code)]
pub fn run(name: &str) {
    let (_, f) = ALL.iter().find(|(n, _)| *n == name).expect("registered property");
    f()
}
