mod invariants;

use fps_precoding::linalg::{frobenius_sq, CMat};
use fps_precoding::sysmodel::{generate_channels, ChannelSet, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CASES: u32 = 300;

macro_rules! property_tests {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = invariants::$name(CASES) {
                    panic!("{e}");
                }
            }
        )*
    };
}

property_tests!(
    closed_form_matches_enumeration,
    grid_never_beats_candidates,
    analog_power_bounded_sc,
    analog_power_bounded_mc,
    altmin_monotone_sc,
    altmin_monotone_mc,
    digital_update_semi_unitary_sc,
    digital_update_semi_unitary_mc,
    switches_follow_indicator_rule,
    scale_equivariance,
    matrix_switch_step_matches_enumeration,
    channels_rebuild_from_cluster_parameters,
    channel_generation_reproducible,
    target_blocks_power_and_nulling,
    hybrid_rate_below_fully_digital,
    rate_invariant_under_combiner_rotation,
);

#[test]
fn suite_table_names_are_unique() {
    let mut names: Vec<&str> = invariants::ALL.iter().map(|(name, _)| *name).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), invariants::ALL.len());
}

#[test]
fn channel_power_matches_normalization() {
    let cfg = SystemConfig::desk_su_sc();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 1000;
    let mean: f64 = (0..draws)
        .map(|_| frobenius_sq(generate_channels(&cfg, &mut rng).unwrap().get(0, 0)))
        .sum::<f64>()
        / draws as f64;
    let expected = (cfg.n_tx_antennas * cfg.n_rx_antennas) as f64;
    assert!(
        (mean / expected - 1.0).abs() < 0.05,
        "mean ‖H‖² = {mean}, expected {expected}"
    );
}

#[test]
fn explicit_matrices_build_channel_sets() {
    let h = CMat::identity(2, 3);
    let ch = ChannelSet::from_matrices(vec![vec![h.clone(), h.clone()]]).unwrap();
    assert_eq!(ch.n_users, 2);
    assert!(ChannelSet::from_matrices(vec![vec![h.clone()], vec![]]).is_err());
}
