//! Averaged interference maps over random timing offsets and channel draws.
//!
//! Draw `i` uses its own ChaCha stream `(master_seed, i)`, so results do not
//! depend on the thread count. Draws are summed in fixed-size chunks and the
//! chunk sums are combined pairwise in index order.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    draw_channel_with, effective_channel_ap_ue, effective_channel_enb_ap, exp_power_profile,
    EffectiveChannel, MultipathChannel, DEFAULT_DECAY, DEFAULT_N_TAP,
};
use crate::error::{Error, Result};
use crate::matrices::{assemble_k_ap_ue, assemble_k_enb_ap};
use crate::params::OfdmNumerology;
use crate::timing::{resolve_ap_layout, resolve_ue_layout};

const CHUNK: usize = 8;

/// Stream id of the shared channel when channels are not redrawn.
const FIXED_CHANNEL_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// LAA eNB interfering with a Wi-Fi AP (victim Wi-Fi).
    #[serde(rename = "enb-ap")]
    EnbToAp,
    /// Wi-Fi AP interfering with an LAA UE (victim LAA).
    #[serde(rename = "ap-ue")]
    ApToUe,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::EnbToAp => "enb-ap",
            Direction::ApToUe => "ap-ue",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enb-ap" => Ok(Direction::EnbToAp),
            "ap-ue" => Ok(Direction::ApToUe),
            _ => Err(Error::Config(format!(
                "unknown direction '{s}' (expected enb-ap or ap-ue)"
            ))),
        }
    }
}

/// How column groups (distinct aggressor symbols) are folded per subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    Sum,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub direction: Direction,
    pub n_draws: usize,
    /// Uniform offset range `[tau_lo, tau_hi)`; equal bounds pin the offset.
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub master_seed: u64,
    pub decay: f64,
    pub n_tap: usize,
    pub fresh_channel_per_draw: bool,
    /// Replace the random channel by a single unit tap.
    pub identity_channel: bool,
    pub aggregation: Aggregation,
}

impl CampaignConfig {
    /// LAA into Wi-Fi, offset uniform over every admissible value.
    pub fn enb_to_ap(laa: &OfdmNumerology, wifi: &OfdmNumerology) -> Self {
        CampaignConfig {
            direction: Direction::EnbToAp,
            n_draws: 500,
            tau_lo: -wifi.t_total,
            tau_hi: laa.t_total - wifi.t_total,
            master_seed: 1,
            decay: DEFAULT_DECAY,
            n_tap: DEFAULT_N_TAP,
            fresh_channel_per_draw: true,
            identity_channel: false,
            aggregation: Aggregation::Sum,
        }
    }

    /// Wi-Fi into LAA, offset uniform over `[0, 3.3 us)`.
    pub fn ap_to_ue() -> Self {
        CampaignConfig {
            direction: Direction::ApToUe,
            n_draws: 500,
            tau_lo: 0.0,
            tau_hi: 3.3e-6,
            master_seed: 1,
            decay: DEFAULT_DECAY,
            n_tap: DEFAULT_N_TAP,
            fresh_channel_per_draw: true,
            identity_channel: false,
            aggregation: Aggregation::Sum,
        }
    }

    pub fn victim<'a>(
        &self,
        laa: &'a OfdmNumerology,
        wifi: &'a OfdmNumerology,
    ) -> &'a OfdmNumerology {
        match self.direction {
            Direction::EnbToAp => wifi,
            Direction::ApToUe => laa,
        }
    }

    pub fn aggressor<'a>(
        &self,
        laa: &'a OfdmNumerology,
        wifi: &'a OfdmNumerology,
    ) -> &'a OfdmNumerology {
        match self.direction {
            Direction::EnbToAp => laa,
            Direction::ApToUe => wifi,
        }
    }

    pub fn validate(&self, laa: &OfdmNumerology, wifi: &OfdmNumerology) -> Result<()> {
        if self.n_draws == 0 {
            return Err(Error::Config("n_draws must be positive".into()));
        }
        let (lo, hi) = match self.direction {
            Direction::EnbToAp => (-wifi.t_total, laa.t_total - wifi.t_total),
            Direction::ApToUe => (0.0, wifi.t_total),
        };
        let ok = self.tau_lo >= lo
            && self.tau_lo <= self.tau_hi
            && self.tau_hi <= hi
            && self.tau_lo < hi;
        if !ok {
            return Err(Error::Config(format!(
                "tau range [{:e}, {:e}) outside admissible [{lo:e}, {hi:e}) for {}",
                self.tau_lo, self.tau_hi, self.direction
            )));
        }
        exp_power_profile(self.n_tap, self.decay).map_err(|e| Error::Config(e.to_string()))?;
        let victim = self.victim(laa, wifi);
        if !self.identity_channel && self.n_tap > victim.n_cp + 1 {
            return Err(Error::Config(format!(
                "n_tap {} exceeds victim CP {} + 1",
                self.n_tap, victim.n_cp
            )));
        }
        Ok(())
    }
}

/// Averaged squared effective-channel magnitudes, victim subcarriers (rows)
/// by aggressor subcarriers (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMap {
    pub values: DMatrix<f64>,
    /// Per-entry mean of the squared per-draw value, for error estimates.
    pub second_moment: DMatrix<f64>,
    /// FFT bin of each row / column in the victim / aggressor numerology.
    pub victim_bins: Vec<usize>,
    pub aggressor_bins: Vec<usize>,
    pub victim_freqs: Vec<f64>,
    pub aggressor_freqs: Vec<f64>,
    pub victim_label: String,
    pub aggressor_label: String,
    pub n_draws: usize,
    pub config: CampaignConfig,
}

impl InterferenceMap {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    /// Standard deviation of the per-draw values at each entry.
    pub fn sample_std(&self) -> DMatrix<f64> {
        let n = self.n_draws as f64;
        let bessel = if self.n_draws > 1 { n / (n - 1.0) } else { 0.0 };
        self.second_moment.zip_map(&self.values, |m2, m| {
            ((m2 - m * m).max(0.0) * bessel).sqrt()
        })
    }
}

/// Folds `|H|^2` into victim rows by aggressor subcarrier.
pub fn aggregate(h: &EffectiveChannel, how: Aggregation) -> DMatrix<f64> {
    let n = h.aggressor.n_fft;
    let rows = h.matrix.nrows();
    let mut out = DMatrix::zeros(rows, n);
    for g in &h.block_map {
        for (k, c) in g.cols.clone().enumerate() {
            let col = h.matrix.column(c);
            for r in 0..rows {
                let e = col[r].norm_sqr();
                match how {
                    Aggregation::Sum => out[(r, k)] += e,
                    Aggregation::Max => out[(r, k)] = f64::max(out[(r, k)], e),
                }
            }
        }
    }
    out
}

fn draw_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_tau(cfg: &CampaignConfig, rng: &mut ChaCha8Rng) -> f64 {
    if cfg.tau_hi > cfg.tau_lo {
        rng.random_range(cfg.tau_lo..cfg.tau_hi)
    } else {
        cfg.tau_lo
    }
}

/// Effective channel of one draw: timing offset and channel realization.
pub fn draw_effective_channel(
    cfg: &CampaignConfig,
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    draw: usize,
    shared: Option<&MultipathChannel>,
) -> Result<(f64, EffectiveChannel)> {
    let mut rng = draw_rng(cfg.master_seed, draw as u64);
    let tau = sample_tau(cfg, &mut rng);
    let channel = match (cfg.identity_channel, shared) {
        (true, _) => MultipathChannel::identity(),
        (false, Some(ch)) => ch.clone(),
        (false, None) => draw_channel_with(&exp_power_profile(cfg.n_tap, cfg.decay)?, &mut rng),
    };
    let h = match cfg.direction {
        Direction::EnbToAp => {
            let k = assemble_k_enb_ap(&resolve_ap_layout(laa, wifi, tau)?, laa, wifi)?;
            effective_channel_enb_ap(&channel, &k, laa, wifi)?
        }
        Direction::ApToUe => {
            let k = assemble_k_ap_ue(&resolve_ue_layout(laa, wifi, tau)?, wifi, laa)?;
            effective_channel_ap_ue(&channel, &k, laa, wifi)?
        }
    };
    Ok((tau, h))
}

struct Moments {
    sum: DMatrix<f64>,
    sum_sq: DMatrix<f64>,
}

impl Moments {
    fn add(mut self, other: Moments) -> Moments {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }
}

fn pairwise(mut parts: Vec<Moments>) -> Option<Moments> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.add(b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop()
}

pub fn run_campaign(
    cfg: &CampaignConfig,
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
) -> Result<InterferenceMap> {
    cfg.validate(laa, wifi)?;
    let victim = cfg.victim(laa, wifi);
    let aggressor = cfg.aggressor(laa, wifi);
    let shared = if cfg.fresh_channel_per_draw || cfg.identity_channel {
        None
    } else {
        let profile = exp_power_profile(cfg.n_tap, cfg.decay)?;
        Some(draw_channel_with(
            &profile,
            &mut draw_rng(cfg.master_seed, FIXED_CHANNEL_STREAM),
        ))
    };
    let (rows, cols) = (victim.n_fft, aggressor.n_fft);
    let n_chunks = cfg.n_draws.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments {
                sum: DMatrix::zeros(rows, cols),
                sum_sq: DMatrix::zeros(rows, cols),
            };
            for draw in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_draws) {
                let (_, h) = draw_effective_channel(cfg, laa, wifi, draw, shared.as_ref())
                    .map_err(|e| Error::Campaign {
                        draw,
                        source: Box::new(e),
                    })?;
                let e = aggregate(&h, cfg.aggregation);
                m.sum_sq += e.map(|v| v * v);
                m.sum += e;
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = pairwise(parts).expect("n_draws > 0");
    let n = cfg.n_draws as f64;
    Ok(InterferenceMap {
        values: total.sum / n,
        second_moment: total.sum_sq / n,
        victim_bins: (0..rows).collect(),
        aggressor_bins: (0..cols).collect(),
        victim_freqs: victim.frequencies(),
        aggressor_freqs: aggressor.frequencies(),
        victim_label: victim.label.clone(),
        aggressor_label: aggressor.label.clone(),
        n_draws: cfg.n_draws,
        config: cfg.clone(),
    })
}

/// Which lines of the map [`dominant_count`] walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line {
    /// One count per victim subcarrier, over aggressor subcarriers.
    Victim,
    /// One count per aggressor subcarrier, over victim subcarriers.
    Aggressor,
}

/// Per line, the number of entries within `threshold_db` of that line's peak.
/// An all-zero line counts 0.
pub fn dominant_count(map: &InterferenceMap, line: Line, threshold_db: f64) -> Result<Vec<usize>> {
    if threshold_db.is_nan() || threshold_db >= 0.0 {
        return Err(Error::Domain(format!(
            "threshold {threshold_db} dB must be negative"
        )));
    }
    if map.rows() == 0 || map.cols() == 0 {
        return Err(Error::Domain("empty interference map".into()));
    }
    let ratio = 10f64.powf(threshold_db / 10.0);
    let count = |vals: Vec<f64>| {
        let peak = vals.iter().copied().fold(0.0, f64::max);
        if peak > 0.0 {
            vals.iter().filter(|&&v| v >= peak * ratio).count()
        } else {
            0
        }
    };
    Ok(match line {
        Line::Victim => map
            .values
            .row_iter()
            .map(|r| count(r.iter().copied().collect()))
            .collect(),
        Line::Aggressor => map
            .values
            .column_iter()
            .map(|c| count(c.iter().copied().collect()))
            .collect(),
    })
}

/// Drops guard subcarriers from both axes. Masks are indexed like the map's
/// current rows (victim) or columns (aggressor) and follow the direction:
/// `laa_mask` applies to the LAA axis, `wifi_mask` to the Wi-Fi axis.
pub fn crop_guards(
    map: &InterferenceMap,
    laa_mask: &[bool],
    wifi_mask: &[bool],
) -> Result<InterferenceMap> {
    let (victim_mask, aggressor_mask) = match map.config.direction {
        Direction::EnbToAp => (wifi_mask, laa_mask),
        Direction::ApToUe => (laa_mask, wifi_mask),
    };
    if victim_mask.len() != map.rows() || aggressor_mask.len() != map.cols() {
        return Err(Error::Dimension(format!(
            "masks {}x{} do not match map {}x{}",
            victim_mask.len(),
            aggressor_mask.len(),
            map.rows(),
            map.cols()
        )));
    }
    let rows: Vec<usize> = (0..map.rows()).filter(|&r| victim_mask[r]).collect();
    let cols: Vec<usize> = (0..map.cols()).filter(|&c| aggressor_mask[c]).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::Domain("guard crop leaves an empty map".into()));
    }
    let pick =
        |m: &DMatrix<f64>| DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    Ok(InterferenceMap {
        values: pick(&map.values),
        second_moment: pick(&map.second_moment),
        victim_bins: rows.iter().map(|&r| map.victim_bins[r]).collect(),
        aggressor_bins: cols.iter().map(|&c| map.aggressor_bins[c]).collect(),
        victim_freqs: rows.iter().map(|&r| map.victim_freqs[r]).collect(),
        aggressor_freqs: cols.iter().map(|&c| map.aggressor_freqs[c]).collect(),
        victim_label: map.victim_label.clone(),
        aggressor_label: map.aggressor_label.clone(),
        n_draws: map.n_draws,
        config: map.config.clone(),
    })
}

pub fn median(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}
