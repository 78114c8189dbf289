//! Timing-offset case analysis.
//!
//! A victim observes one of its own OFDM symbols while an asynchronous
//! aggressor keeps transmitting back-to-back symbols. The observation window
//! is cut into segments, one per overlapping aggressor symbol, and every
//! victim sample index is assigned to exactly one segment.
//!
//! Sample ownership uses cut points: with cumulative segment end times `e_i`
//! and sampling period `T_s`, segment `i` owns `[ceil(e_{i-1}/T_s), ceil(e_i/T_s))`.
//! A sample taken exactly on a boundary belongs to the later segment.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::params::OfdmNumerology;

/// Segments shorter than this are treated as absent.
const MIN_DURATION: f64 = 1e-15;

/// Slack, in samples, absorbed by the cut-point ceiling.
const CUT_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// Victim CP part, period `t_cp / n_cp`.
    Cp,
    /// Victim data part, period `t_data / n_fft`; index restarts at 0.
    Data,
    /// One clock over the whole victim symbol, period `t_total / n_total`.
    Uniform,
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Grid::Cp => "cp",
            Grid::Data => "data",
            Grid::Uniform => "uniform",
        })
    }
}

/// Part of the observation window filled by a single aggressor symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Aggressor symbol relative to the reference symbol (`-2` for `p-2`).
    pub aggressor_symbol_offset: i64,
    pub grid: Grid,
    /// Start of the segment on the victim grid's time axis.
    pub window_start: f64,
    pub duration: f64,
    /// Aggressor-local time at `window_start`, in `[0, t_total)`.
    pub aggressor_start: f64,
    /// Victim sample indices owned by this segment. Empty only when a very
    /// short segment falls between two sampling instants.
    pub sample_range: Range<usize>,
}

impl Segment {
    /// Constant added to `n * T_s` to get the aggressor-local time.
    pub fn time_shift(&self) -> f64 {
        self.aggressor_start - self.window_start
    }

    /// Aggressor-local sampling time for victim sample `n`.
    pub fn local_time(&self, n: usize, period: f64) -> f64 {
        n as f64 * period - self.window_start + self.aggressor_start
    }

    pub fn window_end(&self) -> f64 {
        self.window_start + self.duration
    }

    pub fn n_samples(&self) -> usize {
        self.sample_range.len()
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<7} sym={:+} start={:.6}us dur={:.6}us agg_start={:.6}us samples=[{},{}) n={}",
            self.grid,
            self.aggressor_symbol_offset,
            self.window_start * 1e6,
            self.duration * 1e6,
            self.aggressor_start * 1e6,
            self.sample_range.start,
            self.sample_range.end,
            self.n_samples()
        )
    }
}

/// Layout of a victim symbol observed at the UE (Wi-Fi aggressor, LAA victim).
#[derive(Debug, Clone, PartialEq)]
pub struct UeLayout {
    pub tau1: f64,
    /// Aggressor symbols inside the victim CP besides the reference symbol.
    pub m_prime: usize,
    /// Whole aggressor symbols inside the victim data part.
    pub m_whole: usize,
    pub cp_segments: Vec<Segment>,
    pub data_segments: Vec<Segment>,
    pub cp_period: f64,
    pub data_period: f64,
    pub n_cp: usize,
    pub n_fft: usize,
}

impl UeLayout {
    pub fn segments(&self) -> impl Iterator<Item = (&Segment, f64)> {
        self.cp_segments
            .iter()
            .map(|s| (s, self.cp_period))
            .chain(self.data_segments.iter().map(|s| (s, self.data_period)))
    }

    /// Victim row of a segment sample once CP and data rows are stacked.
    pub fn row_of(&self, seg: &Segment, n: usize) -> usize {
        match seg.grid {
            Grid::Data => self.n_cp + n,
            _ => n,
        }
    }

    /// Victim-symbol time of a stacked row, measured from the CP start.
    pub fn row_time(&self, row: usize) -> f64 {
        if row < self.n_cp {
            row as f64 * self.cp_period
        } else {
            self.cp_period * self.n_cp as f64 + (row - self.n_cp) as f64 * self.data_period
        }
    }
}

impl fmt::Display for UeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ue layout tau1={:.6}us m_prime={} m_whole={} cp_segments={} data_segments={}",
            self.tau1 * 1e6,
            self.m_prime,
            self.m_whole,
            self.cp_segments.len(),
            self.data_segments.len()
        )?;
        for s in self.cp_segments.iter().chain(&self.data_segments) {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApCase {
    /// `0 <= tau`: the window sees one aggressor symbol.
    OneSymbol,
    /// `tau < 0`: the window straddles two aggressor symbols.
    TwoSymbols,
}

/// Layout of a victim symbol observed at the AP (LAA aggressor, Wi-Fi victim).
#[derive(Debug, Clone, PartialEq)]
pub struct ApLayout {
    pub tau: f64,
    pub case: ApCase,
    pub segments: Vec<Segment>,
    pub period: f64,
    pub n_total: usize,
}

impl ApLayout {
    /// Index of the last sample taken from symbol `m-1` in the two-symbol case.
    pub fn split_index(&self) -> Option<usize> {
        match self.case {
            ApCase::OneSymbol => None,
            ApCase::TwoSymbols => self
                .segments
                .iter()
                .find(|s| s.aggressor_symbol_offset == -1)
                .map(|s| s.sample_range.end.saturating_sub(1)),
        }
    }
}

impl fmt::Display for ApLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let case = match self.case {
            ApCase::OneSymbol => "case 1 (one symbol)",
            ApCase::TwoSymbols => "case 2 (two symbols)",
        };
        writeln!(
            f,
            "ap layout tau={:.6}us {case} segments={}",
            self.tau * 1e6,
            self.segments.len()
        )?;
        for s in &self.segments {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

fn ceil_cut(x: f64) -> usize {
    (x - CUT_SLACK).ceil().max(0.0) as usize
}

fn floor_tol(x: f64) -> i64 {
    (x + 1e-9).floor() as i64
}

fn ceil_tol(x: f64) -> i64 {
    (x - 1e-9).ceil() as i64
}

/// Cuts the window `[0, window)` into segments of consecutive aggressor
/// symbols. Symbol with relative offset `j` starts at `first_start + j * symbol`.
fn overlap_segments(
    window: f64,
    first_start: f64,
    symbol: f64,
    grid: Grid,
    period: f64,
    n_samples: usize,
) -> Vec<Segment> {
    let start = |j: i64| first_start + j as f64 * symbol;
    let mut j = (-first_start / symbol).floor() as i64;
    while start(j) > 0.0 {
        j -= 1;
    }
    while start(j) + symbol <= 0.0 {
        j += 1;
    }
    let mut segments = Vec::new();
    let mut cut = 0usize;
    while start(j) < window {
        let s = start(j);
        let lo = s.max(0.0);
        let hi = (s + symbol).min(window);
        let last = s + symbol >= window;
        if hi - lo > MIN_DURATION {
            let end_cut = if last {
                n_samples
            } else {
                ceil_cut(hi / period).min(n_samples)
            };
            let end_cut = end_cut.max(cut);
            segments.push(Segment {
                aggressor_symbol_offset: j,
                grid,
                window_start: lo,
                duration: hi - lo,
                aggressor_start: lo - s,
                sample_range: cut..end_cut,
            });
            cut = end_cut;
        }
        j += 1;
    }
    if let Some(last) = segments.last_mut() {
        last.sample_range.end = n_samples;
    }
    segments
}

/// Resolves the UE-side layout: one victim (`laa`) symbol against a stream
/// of aggressor (`wifi`) symbols. `tau1` is the delay from the start of the
/// victim data part to the CP start of aggressor symbol `p+1`.
pub fn resolve_ue_layout(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    tau1: f64,
) -> Result<UeLayout> {
    let tw = wifi.t_total;
    if !(tau1 >= 0.0 && tau1 < tw) {
        return Err(Error::Domain(format!("tau1={tau1:e} outside [0, {tw:e})")));
    }
    // symbol p occupies [tau1 - T_W, tau1) relative to the victim data start
    let p_start_data = tau1 - tw;
    let p_start_cp = laa.t_cp + p_start_data;
    let cp_segments = overlap_segments(
        laa.t_cp,
        p_start_cp,
        tw,
        Grid::Cp,
        laa.cp_period(),
        laa.n_cp,
    );
    let data_segments = overlap_segments(
        laa.t_data,
        p_start_data,
        tw,
        Grid::Data,
        laa.data_period(),
        laa.n_fft,
    );
    let m_prime = ceil_tol((laa.t_cp - (tw - tau1)) / tw).max(0) as usize;
    let m_whole = floor_tol((laa.t_data - tau1) / tw).max(0) as usize;
    Ok(UeLayout {
        tau1,
        m_prime,
        m_whole,
        cp_segments,
        data_segments,
        cp_period: laa.cp_period(),
        data_period: laa.data_period(),
        n_cp: laa.n_cp,
        n_fft: laa.n_fft,
    })
}

/// Victim and aggressor share `num` and are symbol aligned: one CP segment
/// and one data segment, both from symbol 0.
pub fn synchronous_layout(num: &OfdmNumerology) -> UeLayout {
    UeLayout {
        tau1: 0.0,
        m_prime: 0,
        m_whole: 0,
        cp_segments: overlap_segments(
            num.t_cp,
            0.0,
            num.t_total,
            Grid::Cp,
            num.cp_period(),
            num.n_cp,
        ),
        data_segments: overlap_segments(
            num.t_data,
            -num.t_cp,
            num.t_total,
            Grid::Data,
            num.data_period(),
            num.n_fft,
        ),
        cp_period: num.cp_period(),
        data_period: num.data_period(),
        n_cp: num.n_cp,
        n_fft: num.n_fft,
    }
}

/// Resolves the AP-side layout: one victim (`wifi`) symbol window starting
/// `tau` after the start of aggressor (`laa`) symbol `m`.
pub fn resolve_ap_layout(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    tau: f64,
) -> Result<ApLayout> {
    let lo = -wifi.t_total;
    let hi = laa.t_total - wifi.t_total;
    if !(tau >= lo && tau < hi) {
        return Err(Error::Domain(format!(
            "tau={tau:e} outside [{lo:e}, {hi:e})"
        )));
    }
    let n_total = wifi.n_total();
    let period = wifi.t_total / n_total as f64;
    let segments = overlap_segments(
        wifi.t_total,
        -tau,
        laa.t_total,
        Grid::Uniform,
        period,
        n_total,
    );
    Ok(ApLayout {
        tau,
        case: if tau < 0.0 {
            ApCase::TwoSymbols
        } else {
            ApCase::OneSymbol
        },
        segments,
        period,
        n_total,
    })
}
