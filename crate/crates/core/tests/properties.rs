use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xtalk_core::channel::{
    compose_dense, draw_channel_with, effective_channel_ap_ue, effective_channel_enb_ap,
    exp_power_profile,
};
use xtalk_core::matrices::{apply, apply_blocks, assemble_k_ap_ue, assemble_k_enb_ap};
use xtalk_core::montecarlo::aggregate;
use xtalk_core::verify::{
    ap_oracle_error, ap_partition_error, random_symbols, ue_oracle_error, ue_partition_error,
};
use xtalk_core::{
    resolve_ap_layout, resolve_ue_layout, run_campaign, Aggregation, CampaignConfig, Complex64,
    DMatrix, Direction, MultipathChannel, OfdmNumerology,
};

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn small() -> (OfdmNumerology, OfdmNumerology) {
    (OfdmNumerology::laa_small(), OfdmNumerology::wifi_small())
}

#[test]
fn small_pair_matches_waveform_simulation() {
    let (laa, wifi) = small();
    assert!(ue_oracle_error(&laa, &wifi, 4, 100, 1, None).unwrap() < 1e-9);
    assert!(ap_oracle_error(&laa, &wifi, 4, 100, 2, None).unwrap() < 1e-9);
}

#[test]
fn effective_channel_is_linear_in_taps() {
    let (laa, wifi) = small();
    let profile = exp_power_profile(4, 0.7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let a = draw_channel_with(&profile, &mut rng);
        let b = draw_channel_with(&profile, &mut rng);
        let c = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let sum = MultipathChannel::from_taps(
            a.taps.iter().zip(&b.taps).map(|(x, y)| x + c * y).collect(),
        );

        let tau1 = rng.random_range(0.0..wifi.t_total);
        let k =
            assemble_k_ap_ue(&resolve_ue_layout(&laa, &wifi, tau1).unwrap(), &wifi, &laa).unwrap();
        let ha = effective_channel_ap_ue(&a, &k, &laa, &wifi).unwrap().matrix;
        let hb = effective_channel_ap_ue(&b, &k, &laa, &wifi).unwrap().matrix;
        let hs = effective_channel_ap_ue(&sum, &k, &laa, &wifi)
            .unwrap()
            .matrix;
        let err = max_abs(&(hs - ha - hb * c));
        assert!(err < 1e-8, "ue {err}");

        let tau = rng.random_range(-wifi.t_total..laa.t_total - wifi.t_total);
        let k =
            assemble_k_enb_ap(&resolve_ap_layout(&laa, &wifi, tau).unwrap(), &laa, &wifi).unwrap();
        let ha = effective_channel_enb_ap(&a, &k, &laa, &wifi)
            .unwrap()
            .matrix;
        let hb = effective_channel_enb_ap(&b, &k, &laa, &wifi)
            .unwrap()
            .matrix;
        let hs = effective_channel_enb_ap(&sum, &k, &laa, &wifi)
            .unwrap()
            .matrix;
        let err = max_abs(&(hs - ha - hb * c));
        assert!(err < 1e-8, "ap {err}");
    }
}

#[test]
fn fast_composition_matches_dense_at_full_size() {
    let laa = OfdmNumerology::laa_default();
    let wifi = OfdmNumerology::wifi_default();
    let profile = exp_power_profile(16, 0.7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ch = draw_channel_with(&profile, &mut rng);
    let k = assemble_k_enb_ap(
        &resolve_ap_layout(&laa, &wifi, -1.3e-6).unwrap(),
        &laa,
        &wifi,
    )
    .unwrap();
    let fast = effective_channel_enb_ap(&ch, &k, &laa, &wifi)
        .unwrap()
        .matrix;
    let dense = compose_dense(&ch, &k, &wifi).unwrap();
    assert!(max_abs(&(fast - dense)) < 1e-10);
}

#[test]
fn block_product_matches_dense_product() {
    let (laa, wifi) = small();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let tau1 = rng.random_range(0.0..wifi.t_total);
        let k =
            assemble_k_ap_ue(&resolve_ue_layout(&laa, &wifi, tau1).unwrap(), &wifi, &laa).unwrap();
        let syms = random_symbols(-8..=8, wifi.n_fft, &mut rng);
        let a = apply(&k, &syms).unwrap();
        let b = apply_blocks(&k, &syms).unwrap();
        let err = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}

fn small_campaign(direction: Direction, n_draws: usize, identity: bool) -> CampaignConfig {
    let (laa, wifi) = small();
    let mut cfg = match direction {
        Direction::EnbToAp => CampaignConfig::enb_to_ap(&laa, &wifi),
        Direction::ApToUe => {
            let mut c = CampaignConfig::ap_to_ue();
            c.tau_hi = wifi.t_total;
            c
        }
    };
    cfg.n_draws = n_draws;
    cfg.n_tap = 4;
    cfg.master_seed = 17;
    cfg.identity_channel = identity;
    cfg
}

#[test]
fn doubling_draws_stays_within_monte_carlo_noise() {
    let (laa, wifi) = small();
    for direction in [Direction::EnbToAp, Direction::ApToUe] {
        let n = 400;
        let a = run_campaign(&small_campaign(direction, n, false), &laa, &wifi).unwrap();
        let b = run_campaign(&small_campaign(direction, 2 * n, false), &laa, &wifi).unwrap();
        let std = a.sample_std();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let bound = 3.0 * std[(i, j)] / (n as f64).sqrt();
                let d = (a.values[(i, j)] - b.values[(i, j)]).abs();
                assert!(
                    d <= bound + 1e-15,
                    "{direction} ({i},{j}) moved {d:e} > {bound:e}"
                );
            }
        }
    }
}

#[test]
fn leakage_is_symmetric_about_aligned_pairs() {
    // every fourth small-LAA subcarrier sits on a small-Wi-Fi subcarrier
    let (laa, wifi) = small();
    let ratio = (wifi.subcarrier_spacing / laa.subcarrier_spacing).round() as i64;
    let map = run_campaign(&small_campaign(Direction::EnbToAp, 200, true), &laa, &wifi).unwrap();
    let col = |k: i64| k.rem_euclid(laa.n_fft as i64) as usize;
    for w in -3i64..=3 {
        let row = w.rem_euclid(wifi.n_fft as i64) as usize;
        let centre = w * ratio;
        let peak = map.values[(row, col(centre))];
        for d in 1..=3 {
            let lo = map.values[(row, col(centre - d))];
            let hi = map.values[(row, col(centre + d))];
            assert!(
                (lo - hi).abs() <= 1e-6 * peak,
                "w={w} d={d}: {lo:e} vs {hi:e}"
            );
        }
    }
}

#[test]
fn aggregation_conserves_energy() {
    let (laa, wifi) = small();
    let cfg = small_campaign(Direction::ApToUe, 1, false);
    for draw in 0..10 {
        let (_, h) =
            xtalk_core::montecarlo::draw_effective_channel(&cfg, &laa, &wifi, draw, None).unwrap();
        let total: f64 = aggregate(&h, Aggregation::Sum).sum();
        assert!((total - h.matrix.norm_squared()).abs() < 1e-10 * total.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn ue_layouts_partition(frac in 0.0f64..1.0) {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let l = resolve_ue_layout(&laa, &wifi, frac * wifi.t_total).unwrap();
        prop_assert_eq!(ue_partition_error(&l, &laa), None);
        prop_assert_eq!(l.segments().count(), l.cp_segments.len() + l.data_segments.len());
    }

    #[test]
    fn ap_layouts_partition(frac in 0.0f64..1.0) {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let tau = -wifi.t_total + frac * laa.t_total;
        prop_assume!(tau < laa.t_total - wifi.t_total);
        let l = resolve_ap_layout(&laa, &wifi, tau).unwrap();
        prop_assert_eq!(ap_partition_error(&l, &wifi), None);
        prop_assert_eq!(l.segments.len(), if tau < 0.0 { 2 } else { 1 });
    }

    #[test]
    fn small_layouts_partition(frac in 0.0f64..1.0) {
        let (laa, wifi) = small();
        let l = resolve_ue_layout(&laa, &wifi, frac * wifi.t_total).unwrap();
        prop_assert_eq!(ue_partition_error(&l, &laa), None);
    }
}
