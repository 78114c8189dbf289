//! Fixtures shared by the criterion benchmarks in `benches/`.

use xtalk_core::channel::{draw_channel, exp_power_profile, DEFAULT_DECAY, DEFAULT_N_TAP};
use xtalk_core::{MultipathChannel, OfdmNumerology};

/// Full-size LAA and Wi-Fi numerologies.
pub fn full_pair() -> (OfdmNumerology, OfdmNumerology) {
    (
        OfdmNumerology::laa_default(),
        OfdmNumerology::wifi_default(),
    )
}

/// A default-profile channel realization.
pub fn channel(seed: u64) -> MultipathChannel {
    let profile = exp_power_profile(DEFAULT_N_TAP, DEFAULT_DECAY).expect("default profile");
    draw_channel(&profile, seed)
}
