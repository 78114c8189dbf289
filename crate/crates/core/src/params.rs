//! OFDM numerologies for the two coexisting technologies.
//!
//! Durations are in seconds and frequencies in Hz throughout. Presets:
//!
//! * [`OfdmNumerology::laa_default`] - 20 MHz LAA-LTE with the commonly quoted
//!   rounded durations (66.7 / 4.7 / 71.4 us).
//! * [`OfdmNumerology::laa_exact`] - the same carrier with durations derived
//!   from the 30.72 MHz sample clock, so CP and data share one sampling rate.
//! * [`OfdmNumerology::wifi_default`] - 20 MHz 802.11a/g/n legacy OFDM.
//! * [`OfdmNumerology::laa_small`] / [`OfdmNumerology::wifi_small`] - a scaled
//!   down pair with the same structure, used for fast checks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `subcarrier_spacing * t_data == 1`.
pub const SPACING_TOLERANCE: f64 = 1e-3;

/// Relative tolerance on `t_total == t_cp + t_data`.
pub const DURATION_TOLERANCE: f64 = 1e-12;

const LTE_SAMPLE_RATE: f64 = 30.72e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmNumerology {
    pub label: String,
    pub subcarrier_spacing: f64,
    pub t_data: f64,
    pub t_cp: f64,
    pub t_total: f64,
    pub n_fft: usize,
    pub n_cp: usize,
    /// `true` marks an active (non-guard) subcarrier, indexed like the FFT bins.
    pub guard_mask: Vec<bool>,
}

/// A failed numerology invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    TotalDuration,
    SpacingTimesData,
    FftSize,
    CpSize,
    NonPositiveDuration,
    GuardMaskLength,
    NoActiveSubcarrier,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::TotalDuration => "t_total ≠ t_cp + t_data",
            Violation::SpacingTimesData => "subcarrier_spacing × t_data ≉ 1",
            Violation::FftSize => "n_fft ≥ 1",
            Violation::CpSize => "n_cp ≥ 1",
            Violation::NonPositiveDuration => "durations > 0",
            Violation::GuardMaskLength => "guard_mask length = n_fft",
            Violation::NoActiveSubcarrier => "guard_mask has an active entry",
        })
    }
}

/// Active-subcarrier mask with `active` bins placed symmetrically around DC.
///
/// With `exclude_dc` the DC bin stays inactive and the active bins are
/// `1..=active/2` plus the mirrored negative-frequency bins.
pub fn centered_mask(n_fft: usize, active: usize, exclude_dc: bool) -> Vec<bool> {
    let mut mask = vec![false; n_fft];
    if n_fft == 0 {
        return mask;
    }
    let usable = if exclude_dc { n_fft - 1 } else { n_fft };
    let active = active.min(usable);
    let neg = active / 2;
    let pos = active - neg;
    let first_pos = usize::from(exclude_dc);
    mask[first_pos..first_pos + pos].fill(true);
    mask[n_fft - neg..].fill(true);
    mask
}

impl OfdmNumerology {
    /// LAA-LTE, 20 MHz, durations as rounded in the usual parameter tables.
    pub fn laa_default() -> Self {
        let n_fft = 2048;
        OfdmNumerology {
            label: "laa".into(),
            subcarrier_spacing: 15e3,
            t_data: 66.7e-6,
            t_cp: 4.7e-6,
            t_total: 71.4e-6,
            n_fft,
            n_cp: 144,
            guard_mask: centered_mask(n_fft, 1200, true),
        }
    }

    /// LAA-LTE with durations taken from the 30.72 MHz clock (2048 and 144
    /// samples), so `subcarrier_spacing * t_data == 1` and CP/data share a rate.
    pub fn laa_exact() -> Self {
        let n_fft = 2048;
        let t_data = n_fft as f64 / LTE_SAMPLE_RATE;
        let t_cp = 144.0 / LTE_SAMPLE_RATE;
        OfdmNumerology {
            label: "laa-exact".into(),
            subcarrier_spacing: 15e3,
            t_data,
            t_cp,
            t_total: t_cp + t_data,
            n_fft,
            n_cp: 144,
            guard_mask: centered_mask(n_fft, 1200, true),
        }
    }

    /// Legacy 20 MHz Wi-Fi OFDM (64-point FFT, 0.8 us guard interval).
    pub fn wifi_default() -> Self {
        let n_fft = 64;
        OfdmNumerology {
            label: "wifi".into(),
            subcarrier_spacing: 312.5e3,
            t_data: 3.2e-6,
            t_cp: 0.8e-6,
            t_total: 4.0e-6,
            n_fft,
            n_cp: 16,
            guard_mask: centered_mask(n_fft, 52, true),
        }
    }

    /// 64-subcarrier LAA-like numerology on a 5 MHz clock. Its CP (4.8 us)
    /// is longer than one [`wifi_small`](Self::wifi_small) symbol, like the
    /// full-size pair.
    pub fn laa_small() -> Self {
        let n_fft = 64;
        OfdmNumerology {
            label: "laa-small".into(),
            subcarrier_spacing: 78.125e3,
            t_data: 12.8e-6,
            t_cp: 4.8e-6,
            t_total: 17.6e-6,
            n_fft,
            n_cp: 24,
            guard_mask: centered_mask(n_fft, 48, true),
        }
    }

    /// 16-subcarrier Wi-Fi-like numerology on the same 5 MHz clock.
    pub fn wifi_small() -> Self {
        let n_fft = 16;
        OfdmNumerology {
            label: "wifi-small".into(),
            subcarrier_spacing: 312.5e3,
            t_data: 3.2e-6,
            t_cp: 0.8e-6,
            t_total: 4.0e-6,
            n_fft,
            n_cp: 4,
            guard_mask: centered_mask(n_fft, 12, true),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "laa" => Some(Self::laa_default()),
            "laa-exact" => Some(Self::laa_exact()),
            "wifi" => Some(Self::wifi_default()),
            "laa-small" => Some(Self::laa_small()),
            "wifi-small" => Some(Self::wifi_small()),
            _ => None,
        }
    }

    pub fn n_total(&self) -> usize {
        self.n_cp + self.n_fft
    }

    /// Sampling period of the CP part.
    pub fn cp_period(&self) -> f64 {
        self.t_cp / self.n_cp as f64
    }

    /// Sampling period of the data part.
    pub fn data_period(&self) -> f64 {
        self.t_data / self.n_fft as f64
    }

    /// Baseband frequency of subcarrier `k` using the DFT wraparound
    /// convention: bins at or above `n_fft / 2` map to negative frequencies.
    pub fn subcarrier_frequency(&self, k: usize) -> Result<f64> {
        if k >= self.n_fft {
            return Err(Error::Index {
                index: k,
                len: self.n_fft,
            });
        }
        Ok(self.frequency_unchecked(k))
    }

    pub(crate) fn frequency_unchecked(&self, k: usize) -> f64 {
        let signed = if k < self.n_fft / 2 {
            k as f64
        } else {
            k as f64 - self.n_fft as f64
        };
        signed * self.subcarrier_spacing
    }

    /// All subcarrier frequencies in bin order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_fft)
            .map(|k| self.frequency_unchecked(k))
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.guard_mask.iter().filter(|&&a| a).count()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let durations_ok = self.t_data > 0.0 && self.t_cp > 0.0 && self.t_total > 0.0;
        if !durations_ok || !self.subcarrier_spacing.is_finite() || self.subcarrier_spacing <= 0.0 {
            out.push(Violation::NonPositiveDuration);
        }
        let sum = self.t_cp + self.t_data;
        let gap = (self.t_total - sum).abs();
        if gap.is_nan() || gap > DURATION_TOLERANCE * self.t_total.abs().max(sum.abs()) {
            out.push(Violation::TotalDuration);
        }
        let product = self.subcarrier_spacing * self.t_data;
        let mismatch = (product - 1.0).abs();
        if mismatch.is_nan() || mismatch > SPACING_TOLERANCE {
            out.push(Violation::SpacingTimesData);
        }
        if self.n_fft == 0 {
            out.push(Violation::FftSize);
        }
        if self.n_cp == 0 {
            out.push(Violation::CpSize);
        }
        if self.guard_mask.len() != self.n_fft {
            out.push(Violation::GuardMaskLength);
        }
        if !self.guard_mask.iter().any(|&a| a) {
            out.push(Violation::NoActiveSubcarrier);
        }
        out
    }

    /// Returns `self` if every invariant holds, else a config error listing them.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            let names: Vec<String> = v.iter().map(|v| v.to_string()).collect();
            Err(Error::Config(format!(
                "numerology '{}' violates: {}",
                self.label,
                names.join(", ")
            )))
        }
    }

    /// Parses a numerology from flat `key = value` text.
    ///
    /// Recognised keys: `preset`, `label`, `subcarrier_spacing`, `t_data`,
    /// `t_cp`, `t_total`, `n_fft`, `n_cp`, `active_subcarriers`, `exclude_dc`.
    /// Fields not given are taken from `preset` (required unless every
    /// numeric field is present). `t_total` defaults to `t_cp + t_data`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let cfg: NumerologyConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.resolve()
    }

    pub fn to_config_string(&self) -> String {
        let active = self.active_count();
        let exclude_dc = !self.guard_mask.first().copied().unwrap_or(false);
        let default_mask = centered_mask(self.n_fft, active, exclude_dc);
        let mut s = format!(
            "label = \"{}\"\nsubcarrier_spacing = {:e}\nt_data = {:e}\nt_cp = {:e}\nt_total = {:e}\nn_fft = {}\nn_cp = {}\n",
            self.label,
            self.subcarrier_spacing,
            self.t_data,
            self.t_cp,
            self.t_total,
            self.n_fft,
            self.n_cp
        );
        if default_mask == self.guard_mask {
            s.push_str(&format!(
                "active_subcarriers = {active}\nexclude_dc = {exclude_dc}\n"
            ));
        }
        s
    }
}

/// Flat config record for a numerology; see [`OfdmNumerology::from_config_str`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumerologyConfig {
    pub preset: Option<String>,
    pub label: Option<String>,
    pub subcarrier_spacing: Option<f64>,
    pub t_data: Option<f64>,
    pub t_cp: Option<f64>,
    pub t_total: Option<f64>,
    pub n_fft: Option<usize>,
    pub n_cp: Option<usize>,
    pub active_subcarriers: Option<usize>,
    pub exclude_dc: Option<bool>,
}

impl NumerologyConfig {
    pub fn resolve(&self) -> Result<OfdmNumerology> {
        let base = match &self.preset {
            Some(name) => Some(
                OfdmNumerology::preset(name)
                    .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?,
            ),
            None => None,
        };
        let missing = |field: &str| Error::Config(format!("missing field '{field}' (no preset)"));
        let pick = |v: Option<f64>, from: Option<f64>, field: &str| -> Result<f64> {
            v.or(from).ok_or_else(|| missing(field))
        };
        let b = base.as_ref();
        let t_data = pick(self.t_data, b.map(|n| n.t_data), "t_data")?;
        let t_cp = pick(self.t_cp, b.map(|n| n.t_cp), "t_cp")?;
        let t_total = match (self.t_total, self.t_data.or(self.t_cp)) {
            (Some(t), _) => t,
            // any duration override recomputes the total
            (None, Some(_)) => t_cp + t_data,
            (None, None) => b.map(|n| n.t_total).unwrap_or(t_cp + t_data),
        };
        let n_fft = self
            .n_fft
            .or(b.map(|n| n.n_fft))
            .ok_or_else(|| missing("n_fft"))?;
        let n_cp = self
            .n_cp
            .or(b.map(|n| n.n_cp))
            .ok_or_else(|| missing("n_cp"))?;
        let guard_mask = match (self.active_subcarriers, self.exclude_dc, b) {
            (None, None, Some(base)) if base.n_fft == n_fft => base.guard_mask.clone(),
            (active, exclude_dc, _) => {
                centered_mask(n_fft, active.unwrap_or(n_fft), exclude_dc.unwrap_or(false))
            }
        };
        let num = OfdmNumerology {
            label: self
                .label
                .clone()
                .or(b.map(|n| n.label.clone()))
                .unwrap_or_else(|| "custom".into()),
            subcarrier_spacing: pick(
                self.subcarrier_spacing,
                b.map(|n| n.subcarrier_spacing),
                "subcarrier_spacing",
            )?,
            t_data,
            t_cp,
            t_total,
            n_fft,
            n_cp,
            guard_mask,
        };
        num.validated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laa_table_values() {
        let laa = OfdmNumerology::laa_default();
        assert_eq!(laa.n_fft, 2048);
        assert_eq!(laa.n_cp, 144);
        assert!((laa.t_total - 71.4e-6).abs() < 1e-15);
        let product = laa.subcarrier_spacing * laa.t_data;
        assert!((product - 1.0005).abs() < 1e-12);
        assert!((product - 1.0).abs() <= SPACING_TOLERANCE);
    }

    #[test]
    fn wifi_table_values() {
        let wifi = OfdmNumerology::wifi_default();
        assert_eq!(wifi.n_total(), 80);
        assert_eq!(wifi.subcarrier_spacing * wifi.t_data, 1.0);
        assert!((wifi.t_cp - 0.8e-6).abs() < 1e-18);
    }

    #[test]
    fn presets_are_valid() {
        for name in ["laa", "laa-exact", "wifi", "laa-small", "wifi-small"] {
            let n = OfdmNumerology::preset(name).unwrap();
            assert!(n.validate().is_empty(), "{name}: {:?}", n.validate());
        }
    }

    #[test]
    fn exact_lte_shares_clock() {
        let laa = OfdmNumerology::laa_exact();
        assert!((laa.cp_period() - laa.data_period()).abs() < 1e-20);
        assert!((laa.subcarrier_spacing * laa.t_data - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wifi_frequencies() {
        let wifi = OfdmNumerology::wifi_default();
        assert_eq!(wifi.subcarrier_frequency(0).unwrap(), 0.0);
        assert_eq!(wifi.subcarrier_frequency(1).unwrap(), 312.5e3);
        assert_eq!(wifi.subcarrier_frequency(63).unwrap(), -312.5e3);
        assert!(matches!(
            wifi.subcarrier_frequency(64),
            Err(Error::Index { index: 64, len: 64 })
        ));
    }

    #[test]
    fn frequencies_injective_and_symmetric() {
        for num in [
            OfdmNumerology::laa_default(),
            OfdmNumerology::wifi_default(),
        ] {
            let mut f = num.frequencies();
            f.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(f.windows(2).all(|w| w[0] < w[1]));
            // only the Nyquist bin -n/2 lacks a positive partner
            let unpaired: Vec<f64> = f
                .iter()
                .copied()
                .filter(|&x| !f.iter().any(|&y| (x + y).abs() < 1e-6))
                .collect();
            assert_eq!(unpaired.len(), 1);
            assert_eq!(
                unpaired[0],
                -(num.n_fft as f64 / 2.0) * num.subcarrier_spacing
            );
        }
    }

    #[test]
    fn validate_flags_broken_total() {
        let mut laa = OfdmNumerology::laa_default();
        laa.t_total = 70e-6;
        let v = laa.validate();
        assert_eq!(v, vec![Violation::TotalDuration]);
        assert_eq!(v[0].to_string(), "t_total ≠ t_cp + t_data");
    }

    #[test]
    fn validate_flags_empty_fft() {
        let mut wifi = OfdmNumerology::wifi_default();
        wifi.n_fft = 0;
        wifi.guard_mask.clear();
        wifi.guard_mask.push(true);
        let v = wifi.validate();
        assert!(v.contains(&Violation::FftSize));
        assert_eq!(Violation::FftSize.to_string(), "n_fft ≥ 1");
    }

    #[test]
    fn default_masks() {
        let laa = OfdmNumerology::laa_default();
        assert_eq!(laa.active_count(), 1200);
        assert!(!laa.guard_mask[0]);
        assert!(laa.guard_mask[600] && !laa.guard_mask[601]);
        assert!(laa.guard_mask[2048 - 600] && !laa.guard_mask[2048 - 601]);
        let wifi = OfdmNumerology::wifi_default();
        assert_eq!(wifi.active_count(), 52);
        assert!(!wifi.guard_mask[0] && wifi.guard_mask[26] && !wifi.guard_mask[27]);
        assert!(wifi.guard_mask[38] && !wifi.guard_mask[37]);
    }

    #[test]
    fn config_roundtrip_and_overrides() {
        let laa = OfdmNumerology::laa_default();
        let back = OfdmNumerology::from_config_str(&laa.to_config_string()).unwrap();
        assert_eq!(back, laa);

        let n = OfdmNumerology::from_config_str("preset = \"wifi\"\nn_cp = 32\nt_cp = 1.6e-6\n")
            .unwrap();
        assert_eq!(n.n_cp, 32);
        assert!((n.t_total - 4.8e-6).abs() < 1e-18);
        assert_eq!(n.guard_mask, OfdmNumerology::wifi_default().guard_mask);
    }

    #[test]
    fn config_rejects_unknown_key() {
        let err = OfdmNumerology::from_config_str("preset = \"wifi\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn config_rejects_invalid_numerology() {
        let err =
            OfdmNumerology::from_config_str("preset = \"wifi\"\nt_total = 5e-6\n").unwrap_err();
        assert!(err.to_string().contains("t_total"), "{err}");
    }
}
