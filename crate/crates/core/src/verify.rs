//! Built-in invariant checks behind `xtalk verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::SymbolVector;
use crate::channel::{
    draw_channel_with, effective_channel_ap_ue, effective_channel_enb_ap, exp_power_profile,
    homogeneous_effective_channel, off_diagonal_fraction, EffectiveChannel,
};
use crate::error::Result;
use crate::matrices::{assemble_k_ap_ue, assemble_k_enb_ap, StackedSymbolVector};
use crate::oracle;
use crate::params::OfdmNumerology;
use crate::timing::{resolve_ap_layout, resolve_ue_layout, ApLayout, Segment, UeLayout};

/// Deliberate defects used to prove that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Moves one cut point of the first inspected layout by a sample.
    CutPointOffByOne,
    /// Scales every effective channel by this factor.
    DftScale(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    pub fast: bool,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Checks that `segments` tile `0..n` and their durations add up to `window`.
pub fn partition_error(segments: &[Segment], n: usize, window: f64, period: f64) -> Option<String> {
    let mut next = 0;
    for s in segments {
        if s.sample_range.start != next {
            return Some(format!(
                "segment sym={} starts at {} instead of {next}",
                s.aggressor_symbol_offset, s.sample_range.start
            ));
        }
        next = s.sample_range.end;
        let slack = 1e-6 * period;
        for i in s.sample_range.clone() {
            let t = i as f64 * period;
            if t < s.window_start - slack || t >= s.window_end() {
                return Some(format!("sample {i} at {t:e} s outside its segment"));
            }
        }
    }
    if next != n {
        return Some(format!("samples end at {next}, expected {n}"));
    }
    let total: f64 = segments.iter().map(|s| s.duration).sum();
    if (total - window).abs() > 1e-12 {
        return Some(format!("durations sum to {total:e}, expected {window:e}"));
    }
    None
}

pub fn ue_partition_error(l: &UeLayout, laa: &OfdmNumerology) -> Option<String> {
    partition_error(&l.cp_segments, laa.n_cp, laa.t_cp, l.cp_period)
        .map(|e| format!("cp: {e}"))
        .or_else(|| {
            partition_error(&l.data_segments, laa.n_fft, laa.t_data, l.data_period)
                .map(|e| format!("data: {e}"))
        })
}

pub fn ap_partition_error(l: &ApLayout, wifi: &OfdmNumerology) -> Option<String> {
    partition_error(&l.segments, wifi.n_total(), wifi.t_total, l.period)
}

/// Unit-power QPSK symbols for every offset in `offsets`.
pub fn random_symbols<R: Rng + ?Sized>(
    offsets: std::ops::RangeInclusive<i64>,
    n_fft: usize,
    rng: &mut R,
) -> StackedSymbolVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let entries = offsets
        .map(|o| {
            let msgs = (0..n_fft)
                .map(|_| {
                    Complex64::new(
                        if rng.random() { h } else { -h },
                        if rng.random() { h } else { -h },
                    )
                })
                .collect();
            (o, SymbolVector::new(o, msgs))
        })
        .collect();
    StackedSymbolVector::new(entries).expect("distinct offsets")
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn scaled(mut h: EffectiveChannel, fault: Option<Fault>) -> EffectiveChannel {
    if let Some(Fault::DftScale(s)) = fault {
        h.matrix *= Complex64::new(s, 0.0);
    }
    h
}

fn observe(
    h: &EffectiveChannel,
    k: &crate::matrices::SamplingMatrix,
    syms: &StackedSymbolVector,
) -> Result<Vec<Complex64>> {
    h.observe(&syms.stacked_for(k)?)
}

/// Worst pipeline-vs-oracle error over `draws` random UE-side draws.
pub fn ue_oracle_error(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    n_tap: usize,
    draws: usize,
    seed: u64,
    fault: Option<Fault>,
) -> Result<f64> {
    let profile = exp_power_profile(n_tap, 0.7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let tau1 = rng.random_range(0.0..wifi.t_total);
        let ch = draw_channel_with(&profile, &mut rng);
        let span = (laa.t_total / wifi.t_total).ceil() as i64 + 2;
        let syms = random_symbols(-span..=span, wifi.n_fft, &mut rng);
        let k = assemble_k_ap_ue(&resolve_ue_layout(laa, wifi, tau1)?, wifi, laa)?;
        let h = scaled(effective_channel_ap_ue(&ch, &k, laa, wifi)?, fault);
        let got = observe(&h, &k, &syms)?;
        let want = oracle::ue_observation(laa, wifi, tau1, &ch.taps, &syms)?;
        worst = worst.max(max_abs_diff(&got, &want));
    }
    Ok(worst)
}

/// Worst pipeline-vs-oracle error over `draws` random AP-side draws.
pub fn ap_oracle_error(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    n_tap: usize,
    draws: usize,
    seed: u64,
    fault: Option<Fault>,
) -> Result<f64> {
    let profile = exp_power_profile(n_tap, 0.7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let tau = rng.random_range(-wifi.t_total..laa.t_total - wifi.t_total);
        let ch = draw_channel_with(&profile, &mut rng);
        let syms = random_symbols(-1..=0, laa.n_fft, &mut rng);
        let k = assemble_k_enb_ap(&resolve_ap_layout(laa, wifi, tau)?, laa, wifi)?;
        let h = scaled(effective_channel_enb_ap(&ch, &k, laa, wifi)?, fault);
        let got = observe(&h, &k, &syms)?;
        let want = oracle::ap_observation(laa, wifi, tau, &ch.taps, &syms)?;
        worst = worst.max(max_abs_diff(&got, &want));
    }
    Ok(worst)
}

fn check(name: &'static str, outcome: Result<Option<String>>, ok_detail: String) -> CheckResult {
    match outcome {
        Ok(None) => CheckResult {
            name,
            passed: true,
            detail: ok_detail,
        },
        Ok(Some(why)) => CheckResult {
            name,
            passed: false,
            detail: why,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn partition_check(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    points: usize,
    fault: Option<Fault>,
) -> Result<Option<String>> {
    let mut inject = fault == Some(Fault::CutPointOffByOne);
    for i in 0..points {
        let tau1 = wifi.t_total * i as f64 / points as f64;
        let mut l = resolve_ue_layout(laa, wifi, tau1)?;
        if inject && l.cp_segments.len() > 1 {
            l.cp_segments[0].sample_range.end += 1;
            inject = false;
        }
        if let Some(e) = ue_partition_error(&l, laa) {
            return Ok(Some(format!("tau1={tau1:e}: {e}")));
        }
        let lo = -wifi.t_total;
        let tau = lo + (laa.t_total - wifi.t_total - lo) * i as f64 / points as f64;
        let l = resolve_ap_layout(laa, wifi, tau)?;
        if let Some(e) = ap_partition_error(&l, wifi) {
            return Ok(Some(format!("tau={tau:e}: {e}")));
        }
    }
    Ok(None)
}

fn diagonality_check(draws: usize, fault: Option<Fault>) -> Result<(Option<String>, f64)> {
    let profile = exp_power_profile(16, 0.7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for num in [OfdmNumerology::wifi_default(), OfdmNumerology::laa_exact()] {
        for _ in 0..draws {
            let ch = draw_channel_with(&profile, &mut rng);
            let h = scaled(homogeneous_effective_channel(&ch, &num)?, fault);
            worst = worst.max(off_diagonal_fraction(&h.matrix));
        }
    }
    let fail = (worst >= 1e-10).then(|| format!("off-diagonal energy fraction {worst:e} >= 1e-10"));
    Ok((fail, worst))
}

pub fn run_checks(opts: VerifyOptions) -> Vec<CheckResult> {
    let laa = OfdmNumerology::laa_default();
    let wifi = OfdmNumerology::wifi_default();
    let small_laa = OfdmNumerology::laa_small();
    let small_wifi = OfdmNumerology::wifi_small();
    let (grid, diag_draws, oracle_draws) = if opts.fast {
        (1000, 2, 10)
    } else {
        (10_000, 20, 100)
    };
    let mut out = Vec::new();

    out.push(check(
        "timing-partition",
        partition_check(&laa, &wifi, grid, opts.fault),
        format!("{grid}-point tau1 and tau grids tile every victim index set"),
    ));

    match diagonality_check(diag_draws, opts.fault) {
        Ok((fail, worst)) => out.push(check(
            "homogeneous-diagonality",
            Ok(fail),
            format!("max off-diagonal energy fraction {worst:.3e}"),
        )),
        Err(e) => out.push(check("homogeneous-diagonality", Err(e), String::new())),
    }

    for (name, result) in [
        (
            "oracle-ap-ue",
            ue_oracle_error(&small_laa, &small_wifi, 4, oracle_draws, 21, opts.fault),
        ),
        (
            "oracle-enb-ap",
            ap_oracle_error(&small_laa, &small_wifi, 4, oracle_draws, 22, opts.fault),
        ),
    ] {
        out.push(match result {
            Ok(err) => check(
                name,
                Ok((err >= 1e-8).then(|| format!("max |pipeline - waveform| = {err:e}"))),
                format!("{oracle_draws} draws, max error {err:.3e}"),
            ),
            Err(e) => check(name, Err(e), String::new()),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let r = run_checks(VerifyOptions {
            fast: true,
            fault: None,
        });
        assert!(r.iter().all(|c| c.passed), "{r:?}");
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn cut_point_fault_breaks_partition_only() {
        let r = run_checks(VerifyOptions {
            fast: true,
            fault: Some(Fault::CutPointOffByOne),
        });
        assert!(!r[0].passed);
        assert!(r[1..].iter().all(|c| c.passed));
    }

    #[test]
    fn dft_scale_fault_breaks_oracles_only() {
        let r = run_checks(VerifyOptions {
            fast: true,
            fault: Some(Fault::DftScale(1.01)),
        });
        assert!(r[0].passed && r[1].passed, "{r:?}");
        assert!(!r[2].passed && !r[3].passed);
    }
}
