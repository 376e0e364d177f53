//! Property suite shared by the `properties` test target and the acceptance
//! run. Each entry runs a deterministic proptest runner for `cases` cases.

use std::fmt::Debug;

use fps_precoding::evaluation::{run_realization, spectral_efficiency, Algorithm};
use fps_precoding::fps::{
    altmin, fit_scaled_binary, init_fdd_mc, init_fdd_sc, solve_alpha_switch, switch_on, switch_target,
    update_fdd_mc, update_fdd_sc, AltMinSettings, PhaseBank, Regime, SwitchMatrix,
};
use fps_precoding::linalg::{
    column_orthonormality_error, frobenius_sq, real, row_orthonormality_error, CMat, SvdFactors, C64,
};
use fps_precoding::oracle::{brute_force_alpha_s, grid_alpha_scan, OracleBudget};
use fps_precoding::sysmodel::{
    fully_digital_precoder, generate_channels, upa_steering, ArrayGrid, BlockLayout, CombinerSet,
    SystemConfig, TargetPrecoder,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Property = fn(u32) -> Result<(), String>;

pub const ALL: [(&str, Property); 16] = [
    (
        "P1 closed form matches enumeration",
        closed_form_matches_enumeration,
    ),
    ("P2 grid never beats candidates", grid_never_beats_candidates),
    ("P3 analog power bound (single carrier)", analog_power_bounded_sc),
    ("P3 analog power bound (multicarrier)", analog_power_bounded_mc),
    ("P4 surrogate monotone (single carrier)", altmin_monotone_sc),
    ("P4 surrogate monotone (multicarrier)", altmin_monotone_mc),
    (
        "P5 digital update semi-unitary (single carrier)",
        digital_update_semi_unitary_sc,
    ),
    (
        "P5 digital update semi-unitary (multicarrier)",
        digital_update_semi_unitary_mc,
    ),
    (
        "P6 switches follow indicator rule",
        switches_follow_indicator_rule,
    ),
    ("P7 scale equivariance", scale_equivariance),
    (
        "matrix switch step matches enumeration",
        matrix_switch_step_matches_enumeration,
    ),
    (
        "channels rebuild from cluster parameters",
        channels_rebuild_from_cluster_parameters,
    ),
    ("channel generation reproducible", channel_generation_reproducible),
    ("target block power and nulling", target_blocks_power_and_nulling),
    ("hybrid rate below fully digital", hybrid_rate_below_fully_digital),
    (
        "rate invariant under combiner rotation",
        rate_invariant_under_combiner_rotation,
    ),
];

fn run<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMat::from_iterator(rows, cols, v.into_iter().map(|(re, im)| C64::new(re, im))))
}

fn nonzero_vector(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_len)
        .prop_filter("nonzero", |x| x.iter().any(|v| v.abs() > 1e-6))
}

/// `(N_t, N_c, N_RF, F_opt)` with at most `N_RF` target columns.
fn sc_instance() -> impl Strategy<Value = (usize, usize, usize, CMat)> {
    (4usize..10, 1usize..6, 1usize..4)
        .prop_flat_map(|(nt, nc, nrf)| (Just(nt), Just(nc), Just(nrf), 1..=nrf))
        .prop_flat_map(|(nt, nc, nrf, m)| (Just(nt), Just(nc), Just(nrf), complex_matrix(nt, m)))
}

/// `(N_c, N_RF, F_opt)` with at least `N_RF` target columns.
fn mc_instance() -> impl Strategy<Value = (usize, usize, CMat)> {
    (5usize..10, 1usize..6, 1usize..4)
        .prop_flat_map(|(nt, nc, nrf)| (Just(nt), Just(nc), Just(nrf), nrf..nrf + 6))
        .prop_flat_map(|(nt, nc, nrf, m)| (Just(nc), Just(nrf), complex_matrix(nt, m)))
}

fn target(f_opt: CMat) -> TargetPrecoder {
    let m = f_opt.ncols();
    TargetPrecoder::new(f_opt, BlockLayout::new(1, 1, m)).unwrap()
}

pub fn closed_form_matches_enumeration(cases: u32) -> Result<(), String> {
    run(cases, nonzero_vector(14), |x| {
        let fit = fit_scaled_binary(&x).unwrap();
        let brute = brute_force_alpha_s(&x, &OracleBudget::default()).unwrap();
        prop_assert!(
            (fit.objective - brute.objective).abs() < 1e-9,
            "closed form {} vs enumeration {}",
            fit.objective,
            brute.objective
        );
        Ok(())
    })
}

pub fn grid_never_beats_candidates(cases: u32) -> Result<(), String> {
    let budget = OracleBudget {
        max_n: 16,
        grid_points: 20_001,
    };
    run(cases, nonzero_vector(12), move |x| {
        let fit = fit_scaled_binary(&x).unwrap();
        let (_, grid_f) = grid_alpha_scan(&x, &budget).unwrap();
        prop_assert!(grid_f >= fit.objective - 1e-9);
        Ok(())
    })
}

pub fn switches_follow_indicator_rule(cases: u32) -> Result<(), String> {
    run(cases, nonzero_vector(40), |x| {
        let fit = fit_scaled_binary(&x).unwrap();
        let expected: Vec<bool> = x.iter().map(|&v| switch_on(v, fit.alpha)).collect();
        prop_assert_eq!(&fit.selection, &expected);
        prop_assert!(fit.alpha != 0.0);
        Ok(())
    })
}

pub fn scale_equivariance(cases: u32) -> Result<(), String> {
    run(cases, (nonzero_vector(30), 0.01f64..100.0), |(x, t)| {
        let a = fit_scaled_binary(&x).unwrap();
        let on_threshold = x
            .iter()
            .any(|&v| (v - a.alpha / 2.0).abs() < 1e-9 * (1.0 + v.abs()));
        prop_assume!(!on_threshold);
        let scaled: Vec<f64> = x.iter().map(|v| v * t).collect();
        let b = fit_scaled_binary(&scaled).unwrap();
        prop_assert!((b.alpha - t * a.alpha).abs() <= 1e-9 * (t * a.alpha).abs());
        prop_assert_eq!(
            (a.candidate.split, a.candidate.branch),
            (b.candidate.split, b.candidate.branch)
        );
        prop_assert_eq!(a.selection, b.selection);
        Ok(())
    })
}

pub fn analog_power_bounded_sc(cases: u32) -> Result<(), String> {
    let bits = prop::collection::vec(any::<bool>(), 200);
    run(cases, (sc_instance(), bits), |((nt, nc, nrf, f_opt), bits)| {
        let bank = PhaseBank::uniform(nc, nrf).unwrap();
        let s = SwitchMatrix::from_fn(nt, nc * nrf, |i, j| bits[(i * 7 + j * 3) % bits.len()]);
        let f_dd = init_fdd_sc(&f_opt, nrf).unwrap();
        let lhs = frobenius_sq(&(s.times_bank(&bank) * &f_dd));
        prop_assert!(lhs <= s.count_ones() as f64 + 1e-9);
        Ok(())
    })
}

pub fn analog_power_bounded_mc(cases: u32) -> Result<(), String> {
    let bits = prop::collection::vec(any::<bool>(), 200);
    run(cases, (mc_instance(), bits), |((nc, nrf, f_opt), bits)| {
        let bank = PhaseBank::uniform(nc, nrf).unwrap();
        let s = SwitchMatrix::from_fn(f_opt.nrows(), nc * nrf, |i, j| bits[(i * 5 + j) % bits.len()]);
        let f_dd = init_fdd_mc(&f_opt, nrf).unwrap();
        let lhs = frobenius_sq(&(s.times_bank(&bank) * &f_dd));
        prop_assert!(lhs <= s.count_ones() as f64 + 1e-9);
        Ok(())
    })
}

pub fn digital_update_semi_unitary_sc(cases: u32) -> Result<(), String> {
    run(
        cases,
        (sc_instance(), -3.0f64..3.0),
        |((nt, nc, nrf, f_opt), alpha)| {
            prop_assume!(alpha.abs() > 1e-3);
            let bank = PhaseBank::uniform(nc, nrf).unwrap();
            prop_assert!(column_orthonormality_error(&init_fdd_sc(&f_opt, nrf).unwrap()) < 1e-10);
            let s = SwitchMatrix::from_fn(nt, nc * nrf, |i, j| (i + 2 * j) % 3 != 0);
            let next = update_fdd_sc(&f_opt, &s, &bank, alpha).unwrap();
            prop_assert!(column_orthonormality_error(&next) < 1e-10);
            Ok(())
        },
    )
}

pub fn digital_update_semi_unitary_mc(cases: u32) -> Result<(), String> {
    run(
        cases,
        (mc_instance(), -3.0f64..3.0),
        |((nc, nrf, f_opt), alpha)| {
            prop_assume!(alpha.abs() > 1e-3);
            let bank = PhaseBank::uniform(nc, nrf).unwrap();
            prop_assert!(row_orthonormality_error(&init_fdd_mc(&f_opt, nrf).unwrap()) < 1e-10);
            let s = SwitchMatrix::from_fn(f_opt.nrows(), nc * nrf, |i, j| (i + j) % 2 == 0);
            let next = update_fdd_mc(&f_opt, &s, &bank, alpha).unwrap();
            prop_assert!(row_orthonormality_error(&next) < 1e-10);
            Ok(())
        },
    )
}

pub fn altmin_monotone_sc(cases: u32) -> Result<(), String> {
    run(cases, sc_instance(), |(_, nc, nrf, f_opt)| {
        let bank = PhaseBank::uniform(nc, nrf).unwrap();
        let (hp, report) = altmin(
            &target(f_opt),
            &bank,
            Regime::SingleCarrier,
            AltMinSettings::default(),
        )
        .unwrap();
        let trace = &report.surrogate_trace;
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{:?}", trace);
        prop_assert!(column_orthonormality_error(&hp.f_dd) < 1e-10);
        prop_assert!(*trace.last().unwrap() >= report.true_objective - 1e-9);
        Ok(())
    })
}

pub fn altmin_monotone_mc(cases: u32) -> Result<(), String> {
    run(cases, mc_instance(), |(nc, nrf, f_opt)| {
        let bank = PhaseBank::uniform(nc, nrf).unwrap();
        let (hp, report) = altmin(
            &target(f_opt),
            &bank,
            Regime::Multicarrier,
            AltMinSettings::default(),
        )
        .unwrap();
        let trace = &report.surrogate_trace;
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{:?}", trace);
        prop_assert!(row_orthonormality_error(&hp.f_dd) < 1e-10);
        Ok(())
    })
}

pub fn matrix_switch_step_matches_enumeration(cases: u32) -> Result<(), String> {
    run(cases, (complex_matrix(3, 1), 1usize..4), |(f_opt, nc)| {
        let bank = PhaseBank::uniform(nc, 1).unwrap();
        let f_dd = init_fdd_sc(&f_opt, 1).unwrap();
        let step = solve_alpha_switch(&f_opt, &f_dd, &bank).unwrap();
        let x = switch_target(&f_opt, &f_dd, &bank);
        let brute = brute_force_alpha_s(x.as_slice(), &OracleBudget::default()).unwrap();
        prop_assert!((step.objective - brute.objective).abs() < 1e-9);
        Ok(())
    })
}

pub fn small_system(seed: u64, n_users: usize, n_subcarriers: usize) -> SystemConfig {
    SystemConfig {
        n_tx_antennas: 16,
        n_rx_antennas: 4,
        tx_grid: Some(ArrayGrid::new(4, 4)),
        rx_grid: Some(ArrayGrid::new(2, 2)),
        n_users,
        n_subcarriers,
        n_streams: 1,
        n_rf_tx: 2.max(n_users),
        n_rf_rx: 1,
        n_shifters: 4,
        n_clusters: 2,
        n_rays: 3,
        rng_seed: seed,
        ..SystemConfig::desk_su_sc()
    }
}

pub fn channels_rebuild_from_cluster_parameters(cases: u32) -> Result<(), String> {
    run(cases, (any::<u64>(), 1usize..4), |(seed, f_count)| {
        let cfg = small_system(seed, 2, f_count);
        let ch = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let scale = (16.0 * 4.0 / 6.0f64).sqrt();
        for k in 0..2 {
            for f in 0..f_count {
                let mut h = CMat::zeros(4, 16);
                for cl in &ch.cluster_params[k] {
                    let phase = -2.0 * std::f64::consts::PI * (f * cl.delay_tap) as f64 / f_count as f64;
                    for ray in &cl.rays {
                        let ar = upa_steering(ArrayGrid::new(2, 2), ray.aoa_azimuth, ray.aoa_elevation);
                        let at = upa_steering(ArrayGrid::new(4, 4), ray.aod_azimuth, ray.aod_elevation);
                        h += ar * at.adjoint() * (ray.gain * C64::from_polar(scale, phase));
                    }
                }
                let err = (ch.get(k, f) - h).iter().map(|z| z.norm()).fold(0.0, f64::max);
                prop_assert!(err < 1e-12, "reconstruction error {}", err);
            }
        }
        Ok(())
    })
}

pub fn channel_generation_reproducible(cases: u32) -> Result<(), String> {
    run(cases, any::<u64>(), |seed| {
        let cfg = small_system(seed, 1, 2);
        let a = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn target_blocks_power_and_nulling(cases: u32) -> Result<(), String> {
    run(cases, any::<u64>(), |seed| {
        let cfg = small_system(seed, 3, 2);
        let ch = generate_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let fd = fully_digital_precoder(&ch, &cfg).unwrap();
        for f in 0..2 {
            for k in 0..3 {
                let block = fd.block(k, f);
                prop_assert!((frobenius_sq(&block) - cfg.n_streams as f64).abs() < 1e-10);
                for j in (0..3).filter(|&j| j != k) {
                    prop_assert!((ch.get(j, f) * &block).norm() < 1e-8);
                }
            }
        }
        Ok(())
    })
}

pub fn hybrid_rate_below_fully_digital(cases: u32) -> Result<(), String> {
    run(cases, 0u64..1_000_000, |seed| {
        let cfg = SystemConfig {
            n_shifters: 8,
            ..small_system(seed, 1, 1)
        };
        let fd = run_realization(&cfg, Algorithm::FullyDigital, 0).unwrap();
        let fps = run_realization(&cfg, Algorithm::FpsAltmin, 0).unwrap();
        let a = fd.record.spectral_efficiency_bits_per_s_per_hz;
        let b = fps.record.spectral_efficiency_bits_per_s_per_hz;
        prop_assert!(b <= a + 1e-9, "hybrid {} > digital {}", b, a);
        prop_assert!(b >= 0.0);
        Ok(())
    })
}

pub fn rate_invariant_under_combiner_rotation(cases: u32) -> Result<(), String> {
    run(cases, (any::<u64>(), complex_matrix(2, 2)), |(seed, rot)| {
        let cfg = SystemConfig {
            n_streams: 2,
            n_rf_tx: 4,
            n_rf_rx: 2,
            n_rx_antennas: 9,
            rx_grid: Some(ArrayGrid::new(3, 3)),
            ..small_system(seed, 2, 2)
        };
        let out = run_realization(&cfg, Algorithm::FpsAltmin, 0).unwrap();
        let svd = SvdFactors::thin(&(rot + CMat::identity(2, 2) * real(0.1)));
        let q = &svd.u * svd.v.adjoint();
        let rotated = CombinerSet {
            mode: out.combiners.mode,
            w_rf: out.combiners.w_rf.clone(),
            w_bb: out
                .combiners
                .w_bb
                .iter()
                .map(|per| per.iter().map(|w| w * &q).collect())
                .collect(),
        };
        let fd = fully_digital_precoder(&out.channels, &cfg).unwrap();
        let a = spectral_efficiency(&out.channels, &fd, &out.combiners, &cfg).unwrap();
        let b = spectral_efficiency(&out.channels, &fd, &rotated, &cfg).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        Ok(())
    })
}
