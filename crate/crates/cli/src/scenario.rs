//! Scenario files: flat `key = value` lines grouped under `[scenario]`,
//! `[campaign]`, `[laa]` and `[wifi]` sections.

use serde::{Deserialize, Serialize};
use xtalk_core::params::NumerologyConfig;
use xtalk_core::{Aggregation, CampaignConfig, Direction, OfdmNumerology};

pub const BUILTIN: [&str; 2] = ["fig4a", "fig4b"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub scenario: Output,
    pub campaign: Campaign,
    #[serde(default = "laa_preset")]
    pub laa: NumerologyConfig,
    #[serde(default = "wifi_preset")]
    pub wifi: NumerologyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub name: String,
    pub svg: bool,
    pub json: bool,
    pub crop_guards: bool,
    pub svg_floor_db: f64,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            name: "scenario".into(),
            svg: true,
            json: false,
            crop_guards: true,
            svg_floor_db: -60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub direction: Direction,
    #[serde(default = "default_draws")]
    pub n_draws: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Seconds; defaults to the full admissible range of the direction.
    pub tau_lo: Option<f64>,
    pub tau_hi: Option<f64>,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_n_tap")]
    pub n_tap: usize,
    #[serde(default = "yes")]
    pub fresh_channel_per_draw: bool,
    #[serde(default)]
    pub identity_channel: bool,
    #[serde(default)]
    pub aggregation: Aggregation,
}

fn laa_preset() -> NumerologyConfig {
    NumerologyConfig {
        preset: Some("laa".into()),
        ..Default::default()
    }
}

fn wifi_preset() -> NumerologyConfig {
    NumerologyConfig {
        preset: Some("wifi".into()),
        ..Default::default()
    }
}

fn default_draws() -> usize {
    500
}

fn default_seed() -> u64 {
    1
}

fn default_decay() -> f64 {
    xtalk_core::channel::DEFAULT_DECAY
}

fn default_n_tap() -> usize {
    xtalk_core::channel::DEFAULT_N_TAP
}

fn yes() -> bool {
    true
}

pub fn builtin(name: &str) -> Option<ScenarioFile> {
    let (direction, tau_hi) = match name {
        "fig4a" => (Direction::EnbToAp, None),
        // below 2 T_W - T_CP^L a single Wi-Fi symbol boundary falls inside the LAA CP
        "fig4b" => (Direction::ApToUe, Some(3.3e-6)),
        _ => return None,
    };
    Some(ScenarioFile {
        scenario: Output {
            name: name.into(),
            ..Output::default()
        },
        campaign: Campaign {
            direction,
            n_draws: default_draws(),
            seed: default_seed(),
            tau_lo: None,
            tau_hi,
            decay: default_decay(),
            n_tap: default_n_tap(),
            fresh_channel_per_draw: true,
            identity_channel: false,
            aggregation: Aggregation::Sum,
        },
        laa: laa_preset(),
        wifi: wifi_preset(),
    })
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn numerologies(&self) -> xtalk_core::Result<(OfdmNumerology, OfdmNumerology)> {
        Ok((self.laa.resolve()?, self.wifi.resolve()?))
    }

    pub fn campaign_config(&self, laa: &OfdmNumerology, wifi: &OfdmNumerology) -> CampaignConfig {
        let c = &self.campaign;
        let mut cfg = match c.direction {
            Direction::EnbToAp => CampaignConfig::enb_to_ap(laa, wifi),
            Direction::ApToUe => {
                let mut cfg = CampaignConfig::ap_to_ue();
                cfg.tau_hi = wifi.t_total;
                cfg
            }
        };
        cfg.n_draws = c.n_draws;
        cfg.master_seed = c.seed;
        cfg.tau_lo = c.tau_lo.unwrap_or(cfg.tau_lo);
        cfg.tau_hi = c.tau_hi.unwrap_or(cfg.tau_hi);
        cfg.decay = c.decay;
        cfg.n_tap = c.n_tap;
        cfg.fresh_channel_per_draw = c.fresh_channel_per_draw;
        cfg.identity_channel = c.identity_channel;
        cfg.aggregation = c.aggregation;
        cfg
    }
}
